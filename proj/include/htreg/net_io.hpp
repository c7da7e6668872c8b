#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "htreg/net.hpp"

namespace htreg {

/// Parse failure with a 1-based line number, so truncated or hand-edited
/// files produce a usable message instead of a crash.
struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("parse error at line " + std::to_string(line) + ": " + what),
        line_no(line) {}
  std::size_t line_no;
};

namespace detail {

inline std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace detail

/// Serializes a network as a versioned line-oriented text document.
/// Weights and biases are written as C99 hex floats, so the round trip is
/// bit-exact and the files diff cleanly:
///
///   htreg-net 1
///   input_dim <d>
///   layers <count>
///   layer <rows> <cols>
///   w <rows*cols hex doubles, row-major>
///   b <rows hex doubles>
///   ...
inline std::string serialize(const Network& net) {
  std::ostringstream out;
  out << "htreg-net 1\n";
  out << "input_dim " << net.input_dim() << "\n";
  out << "layers " << net.layers().size() << "\n";
  for (const auto& l : net.layers()) {
    out << "layer " << l.rows << " " << l.cols << "\n";
    out << "w";
    for (double v : l.w) out << " " << detail::hex_double(v);
    out << "\nb";
    for (double v : l.b) out << " " << detail::hex_double(v);
    out << "\n";
  }
  return out.str();
}

inline Network deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "unexpected end of document");
    ++line_no;
    return line;
  };
  auto parse_doubles = [&](const std::string& tag, std::size_t count) {
    const std::string l = next_line();
    std::istringstream ls(l);
    std::string head;
    ls >> head;
    if (head != tag) throw ParseError(line_no, "expected '" + tag + "' row, got '" + head + "'");
    std::vector<double> vals;
    vals.reserve(count);
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw ParseError(line_no, "bad numeric token '" + tok + "'");
      vals.push_back(v);
    }
    if (vals.size() != count)
      throw ParseError(line_no, "expected " + std::to_string(count) + " values, got " +
                                    std::to_string(vals.size()));
    return vals;
  };

  {
    std::istringstream hs(next_line());
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != "htreg-net") throw ParseError(line_no, "not an htreg-net document");
    if (version != 1) throw ParseError(line_no, "unsupported version " + std::to_string(version));
  }
  std::size_t input_dim = 0, layer_count = 0;
  {
    std::istringstream ls(next_line());
    std::string key;
    ls >> key >> input_dim;
    if (key != "input_dim" || ls.fail()) throw ParseError(line_no, "expected 'input_dim <d>'");
  }
  {
    std::istringstream ls(next_line());
    std::string key;
    ls >> key >> layer_count;
    if (key != "layers" || ls.fail() || layer_count == 0)
      throw ParseError(line_no, "expected 'layers <count>' with count >= 1");
  }
  std::vector<AffineLayer> layers;
  std::size_t expect_cols = input_dim;
  for (std::size_t li = 0; li < layer_count; ++li) {
    std::istringstream ls(next_line());
    std::string key;
    std::size_t rows = 0, cols = 0;
    ls >> key >> rows >> cols;
    if (key != "layer" || ls.fail() || rows == 0)
      throw ParseError(line_no, "expected 'layer <rows> <cols>'");
    if (cols != expect_cols)
      throw ParseError(line_no, "layer " + std::to_string(li) + " cols " + std::to_string(cols) +
                                    " does not chain with previous output " +
                                    std::to_string(expect_cols));
    AffineLayer l(rows, cols);
    l.w = parse_doubles("w", rows * cols);
    l.b = parse_doubles("b", rows);
    layers.push_back(std::move(l));
    expect_cols = rows;
  }
  return Network(std::move(layers));
}

}  // namespace htreg
