#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace htreg {

/// Minimal TOML subset reader: [section] / [a.b] tables, `key = value` with
/// string, integer, float, boolean and flat arrays, `#` comments. Keys are
/// exposed dotted ("section.key"). Covers what experiment configs need.
class TomlDoc {
 public:
  struct Value {
    enum class Type { string, number, boolean, array } type = Type::string;
    std::string str;
    double num = 0.0;
    bool bl = false;
    std::vector<Value> arr;
  };

  static TomlDoc parse(const std::string& text) {
    TomlDoc doc;
    std::istringstream in(text);
    std::string line, prefix;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip_comment(line);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(line_no, "unterminated table header");
        prefix = trim(s.substr(1, s.size() - 2));
        if (prefix.empty()) fail(line_no, "empty table name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(line_no, "expected key = value");
      std::string key = trim(s.substr(0, eq));
      std::string val = trim(s.substr(eq + 1));
      if (key.empty() || val.empty()) fail(line_no, "empty key or value");
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      doc.values_[full] = parse_value(val, line_no);
    }
    return doc;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second.type != Value::Type::string) throw std::runtime_error("toml: '" + key + "' is not a string");
    return it->second.str;
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second.type != Value::Type::number) throw std::runtime_error("toml: '" + key + "' is not a number");
    return it->second.num;
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
    return static_cast<std::int64_t>(get_double(key, static_cast<double>(dflt)));
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second.type != Value::Type::boolean) throw std::runtime_error("toml: '" + key + "' is not a boolean");
    return it->second.bl;
  }

  std::vector<double> get_double_array(const std::string& key, std::vector<double> dflt = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second.type != Value::Type::array) throw std::runtime_error("toml: '" + key + "' is not an array");
    std::vector<double> out;
    for (const auto& v : it->second.arr) {
      if (v.type != Value::Type::number) throw std::runtime_error("toml: '" + key + "' has non-numeric entries");
      out.push_back(v.num);
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key,
                                            std::vector<std::string> dflt = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second.type != Value::Type::array) throw std::runtime_error("toml: '" + key + "' is not an array");
    std::vector<std::string> out;
    for (const auto& v : it->second.arr) {
      if (v.type != Value::Type::string) throw std::runtime_error("toml: '" + key + "' has non-string entries");
      out.push_back(v.str);
    }
    return out;
  }

 private:
  static void fail(std::size_t line, const std::string& what) {
    throw std::runtime_error("toml parse error at line " + std::to_string(line) + ": " + what);
  }

  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') in_str = !in_str;
      if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
  }

  static Value parse_value(const std::string& raw, std::size_t line_no) {
    Value v;
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') fail(line_no, "unterminated string");
      v.type = Value::Type::string;
      v.str = raw.substr(1, raw.size() - 2);
      return v;
    }
    if (raw == "true" || raw == "false") {
      v.type = Value::Type::boolean;
      v.bl = raw == "true";
      return v;
    }
    if (raw.front() == '[') {
      if (raw.back() != ']') fail(line_no, "unterminated array");
      v.type = Value::Type::array;
      std::string inner = raw.substr(1, raw.size() - 2);
      std::string tok;
      bool in_str = false;
      auto flush = [&]() {
        const std::string t = trim(tok);
        if (!t.empty()) v.arr.push_back(parse_value(t, line_no));
        tok.clear();
      };
      for (char c : inner) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
          flush();
          continue;
        }
        tok.push_back(c);
      }
      flush();
      return v;
    }
    try {
      std::size_t pos = 0;
      v.num = std::stod(raw, &pos);
      if (pos != raw.size()) fail(line_no, "trailing characters after number '" + raw + "'");
      v.type = Value::Type::number;
      return v;
    } catch (const std::invalid_argument&) {
      fail(line_no, "cannot parse value '" + raw + "'");
    }
    return v;
  }

  std::map<std::string, Value> values_;
};

}  // namespace htreg
