#pragma once

// Dual certificates for the inefficiency LP and their verification by weak
// duality.
//
// File format: four sections, one entry per line, rationals as p/q, '#'
// comments allowed.
//
//   [lambda]            agent (1-based)  truthful-profile  misreport-profile  value
//   [gamma] [mu] [delta]  reduced-profile  value
//
// Lambda entries use full profile indices; gamma (allocation simplex), mu
// (budget balance), and delta (loss) entries use reduced indices.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sinkmech/amd/build.hpp"
#include "sinkmech/profile_io.hpp"

namespace sinkmech::amd {

template <Scalar T>
struct DualCertificate {
  struct Lambda {
    std::size_t agent = 0;  // 0-based in memory
    std::uint64_t truthful = 0;
    std::uint64_t misreport = 0;
    T value;
  };
  struct Entry {
    std::uint64_t reduced = 0;
    T value;
  };
  std::vector<Lambda> lambda;
  std::vector<Entry> gamma;
  std::vector<Entry> mu;
  std::vector<Entry> delta;
};

template <Scalar T>
DualCertificate<T> read_certificate(std::istream& in) {
  DualCertificate<T> cert;
  std::string line;
  std::size_t line_no = 0;
  std::string section;
  auto number = [&](const std::string& token) {
    try {
      return parse_scalar<T>(token);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  };
  auto index = [&](const std::string& token) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw ParseError("bad index '" + token + "'", line_no);
    }
  };
  while (sinkmech::detail::next_content_line(in, line, line_no)) {
    auto tokens = sinkmech::detail::split_ws(line);
    if (tokens.size() == 1 && tokens[0].size() > 2 && tokens[0].front() == '[' && tokens[0].back() == ']') {
      section = tokens[0].substr(1, tokens[0].size() - 2);
      if (section != "lambda" && section != "gamma" && section != "mu" && section != "delta") {
        throw ParseError("unknown section [" + section + "]", line_no);
      }
      continue;
    }
    if (section.empty()) throw ParseError("entry before any section header", line_no);
    if (section == "lambda") {
      if (tokens.size() != 4) throw ParseError("lambda entries are 'agent truthful misreport value'", line_no);
      const auto agent = index(tokens[0]);
      if (agent == 0) throw ParseError("agents are numbered from 1", line_no);
      cert.lambda.push_back(
          typename DualCertificate<T>::Lambda{static_cast<std::size_t>(agent - 1), index(tokens[1]), index(tokens[2]), number(tokens[3])});
    } else {
      if (tokens.size() != 2) throw ParseError(section + " entries are 'profile value'", line_no);
      auto& target = section == "gamma" ? cert.gamma : section == "mu" ? cert.mu : cert.delta;
      target.push_back(typename DualCertificate<T>::Entry{index(tokens[0]), number(tokens[1])});
    }
  }
  return cert;
}

template <Scalar T>
void write_certificate(std::ostream& out, const DualCertificate<T>& cert) {
  out << "[lambda]\n";
  for (const auto& l : cert.lambda) {
    out << l.agent + 1 << ' ' << l.truthful << ' ' << l.misreport << ' ' << format_scalar(l.value) << '\n';
  }
  auto section = [&](const char* name, const auto& entries) {
    out << '[' << name << "]\n";
    for (const auto& e : entries) out << e.reduced << ' ' << format_scalar(e.value) << '\n';
  };
  section("gamma", cert.gamma);
  section("mu", cert.mu);
  section("delta", cert.delta);
}

template <Scalar T>
struct ColumnResidual {
  std::size_t column = 0;
  std::string name;
  T activity;  // y^T A_j
  T cost;      // c_j
  lp::Bound bound = lp::Bound::NonNegative;
};

template <Scalar T>
struct CertificateCheck {
  bool feasible = true;
  T objective;
  std::vector<ColumnResidual<T>> violated_columns;
  std::vector<std::string> sign_errors;
};

/// Dual vector on the program's rows implied by the certificate. Entries
/// that land on merged rows are added together.
template <Scalar T>
std::vector<T> certificate_duals(const AmdProgram<T>& prog, const DualCertificate<T>& cert) {
  if (prog.mechanism_class != MechanismClass::Randomized) {
    throw ArgumentError("certificates apply to the unrestricted randomized program");
  }
  const auto& grid = prog.grid;
  const OrbitTable orbits = prog.orbits ? *prog.orbits : orbit_reduce(grid);
  std::vector<T> y(prog.lp.row_count(), T(0));
  for (const auto& l : cert.lambda) {
    if (l.agent >= grid.agents()) throw ArgumentError("certificate agent out of range");
    if (l.truthful >= grid.profile_count() || l.misreport >= grid.profile_count()) {
      throw ArgumentError("certificate profile index out of range");
    }
    const auto it = prog.sp_row.find(SpKey{l.agent, l.truthful, l.misreport});
    if (it == prog.sp_row.end()) {
      throw ArgumentError("no strategyproofness row for agent " + std::to_string(l.agent + 1) + ", profiles " +
                          std::to_string(l.truthful) + " -> " + std::to_string(l.misreport));
    }
    if (it->second) y[*it->second] += l.value;
  }
  auto place = [&](const std::vector<typename DualCertificate<T>::Entry>& entries,
                   const std::vector<std::optional<std::size_t>>& rows) {
    for (const auto& e : entries) {
      if (e.reduced >= orbits.size()) throw ArgumentError("certificate reduced index out of range");
      const auto& row = rows.at(orbits.representative(e.reduced));
      if (row) y[*row] += e.value;
    }
  };
  place(cert.gamma, prog.simplex_row);
  place(cert.mu, prog.budget_row);
  place(cert.delta, prog.loss_row);
  return y;
}

/// Checks y^T A <= c on nonnegative columns and y^T A = c on free columns,
/// with y >= 0 on >= rows, y <= 0 on <= rows; returns b^T y.
template <Scalar T>
CertificateCheck<T> check_dual_vector(const lp::LinearProgram<T>& lp, const std::vector<T>& y) {
  if (y.size() != lp.row_count()) throw ArgumentError("dual vector length does not match row count");
  CertificateCheck<T> check;
  check.objective = T(0);
  std::vector<T> activity(lp.column_count(), T(0));
  for (std::size_t r = 0; r < lp.row_count(); ++r) {
    if (y[r] == T(0)) continue;
    const auto& row = lp.rows()[r];
    if ((row.sense == lp::Sense::GreaterEqual && is_negative(y[r])) ||
        (row.sense == lp::Sense::LessEqual && is_positive(y[r]))) {
      check.sign_errors.push_back(row.name + " has multiplier " + format_scalar(y[r]) + " of the wrong sign");
    }
    check.objective += y[r] * row.rhs;
    for (const auto& [col, coef] : row.terms) activity[col] += y[r] * coef;
  }
  for (std::size_t j = 0; j < lp.column_count(); ++j) {
    const auto& col = lp.columns()[j];
    const T gap = activity[j] - col.cost;
    const bool bad = col.bound == lp::Bound::Free ? !is_zero(gap) : is_positive(gap);
    if (bad) check.violated_columns.push_back({j, col.name, activity[j], col.cost, col.bound});
  }
  check.feasible = check.violated_columns.empty() && check.sign_errors.empty();
  return check;
}

template <Scalar T>
CertificateCheck<T> verify_dual_certificate(const AmdProgram<T>& prog, const DualCertificate<T>& cert) {
  for (const auto& l : cert.lambda) {
    if (is_negative(l.value)) throw ArgumentError("lambda entries must be nonnegative");
  }
  for (const auto& d : cert.delta) {
    if (is_negative(d.value)) throw ArgumentError("delta entries must be nonnegative");
  }
  return check_dual_vector(prog.lp, certificate_duals(prog, cert));
}

template <Scalar T>
void write_certificate_report(std::ostream& out, const CertificateCheck<T>& check) {
  out << (check.feasible ? "feasible" : "infeasible") << ", objective " << format_scalar(check.objective) << '\n';
  for (const auto& e : check.sign_errors) out << "  " << e << '\n';
  for (const auto& c : check.violated_columns) {
    out << "  column " << c.name << ": y^T A = " << format_scalar(c.activity)
        << (c.bound == lp::Bound::Free ? " must equal " : " exceeds ") << format_scalar(c.cost) << '\n';
  }
}

}  // namespace sinkmech::amd
