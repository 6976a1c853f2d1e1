#pragma once

// Line-oriented profile text format:
//
//   # optional comment lines
//   n m M
//   v_1(a_1) ... v_1(a_m)
//   ...
//   v_n(a_1) ... v_n(a_m)
//
// Entries are decimals or `p/q` rationals.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sinkmech/core.hpp"

namespace sinkmech {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  return tokens;
}

/// Next non-blank, non-comment line; false at EOF.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace detail

template <Scalar T>
ValuationProfile<T> read_profile(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) throw ParseError("missing header 'n m M'", line_no);
  auto header = detail::split_ws(line);
  if (header.size() != 3) throw ParseError("header must be 'n m M'", line_no);
  std::size_t n = 0;
  std::size_t m = 0;
  try {
    n = std::stoul(header[0]);
    m = std::stoul(header[1]);
  } catch (const std::exception&) {
    throw ParseError("bad agent/alternative count", line_no);
  }
  T range;
  try {
    range = parse_scalar<T>(header[2]);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line_no);
  }
  std::vector<T> values;
  values.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    if (!detail::next_content_line(in, line, line_no)) {
      throw ParseError("expected " + std::to_string(n) + " valuation rows", line_no);
    }
    auto tokens = detail::split_ws(line);
    if (tokens.size() != m) throw ParseError("expected " + std::to_string(m) + " entries", line_no);
    for (const auto& t : tokens) {
      try {
        values.push_back(parse_scalar<T>(t));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
    }
  }
  try {
    return ValuationProfile<T>(n, m, range, std::move(values));
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), line_no);
  }
}

template <Scalar T>
void write_profile(std::ostream& out, const ValuationProfile<T>& profile) {
  out << profile.agents() << ' ' << profile.alternatives() << ' ' << format_scalar(profile.range()) << '\n';
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    for (std::size_t a = 0; a < profile.alternatives(); ++a) {
      if (a) out << ' ';
      out << format_scalar(profile.value(i, a));
    }
    out << '\n';
  }
}

/// Single-line rendering, e.g. `((0,1/2),(1/2,0))`.
template <Scalar T>
std::string describe_profile(const ValuationProfile<T>& profile) {
  std::string s = "(";
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (i) s += ",";
    s += "(";
    for (std::size_t a = 0; a < profile.alternatives(); ++a) {
      if (a) s += ",";
      s += format_scalar(profile.value(i, a));
    }
    s += ")";
  }
  return s + ")";
}

}  // namespace sinkmech
