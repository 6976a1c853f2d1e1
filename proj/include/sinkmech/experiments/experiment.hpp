#pragma once

// Expected and worst-case sample inefficiency of the naive randomized sink
// mechanism on groups sampled from a rating matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sinkmech/core.hpp"
#include "sinkmech/experiments/ratings.hpp"
#include "sinkmech/parallel.hpp"

namespace sinkmech::experiments {

/// How ratings become valuations: v = rating - (lo + hi) / 2 and M is either
/// the scale width or a caller-supplied value at least that wide.
struct RangeRule {
  std::optional<double> custom;

  double range(const RatingMatrix& matrix) const {
    const double width = matrix.hi() - matrix.lo();
    if (!custom) return width;
    if (*custom < width) throw ArgumentError("custom M is narrower than the rating scale");
    return *custom;
  }
};

inline ValuationProfile<double> ratings_to_profile(const RatingMatrix& matrix, const std::vector<std::size_t>& users,
                                                   const std::vector<std::size_t>& items, const RangeRule& rule = {}) {
  const double mid = (matrix.lo() + matrix.hi()) / 2;
  std::vector<double> values;
  values.reserve(users.size() * items.size());
  for (std::size_t u : users) {
    for (std::size_t j : items) {
      const auto r = matrix.at(u, j);
      if (!r) throw ArgumentError("profile needs complete ratings; impute first");
      values.push_back(*r - mid);
    }
  }
  return ValuationProfile<double>(users.size(), items.size(), rule.range(matrix), std::move(values));
}

struct ExperimentConfig {
  std::string dataset = "dataset";
  std::vector<std::size_t> sizes{10, 60, 110, 160, 210};
  std::size_t trials = 50;
  std::size_t alternatives = 2;
  std::uint64_t seed = 1;
  RangeRule range;
  std::size_t workers = 1;

  void validate() const {
    if (sizes.empty()) throw ArgumentError("at least one group size is required");
    for (std::size_t n : sizes) {
      if (n < 2) throw ArgumentError("group sizes must be at least 2");
    }
    if (trials < 1) throw ArgumentError("trials must be at least 1");
    if (alternatives < 2) throw ArgumentError("alternatives per trial must be at least 2");
  }
};

struct TrialResult {
  double expected = 0;  // sample inefficiency averaged over the n sink choices
  double worst = 0;     // largest single-sink sample inefficiency
};

struct SizeResult {
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_expected = 0;
  double std_expected = 0;
  double mean_worst = 0;
  double std_worst = 0;
  double theory_line = 0;
  std::vector<TrialResult> per_trial;
};

struct ExperimentResult {
  std::string dataset;
  std::vector<SizeResult> sizes;
};

/// ceil(n/2) / n^2.
inline double theory_line(std::size_t n) {
  return static_cast<double>((n + 1) / 2) / (static_cast<double>(n) * static_cast<double>(n));
}

/// Sample inefficiency of each single-sink realization: the sink's report is
/// ignored and the others' efficient alternative (lowest index on ties) is chosen.
inline std::vector<double> sink_realizations(const ValuationProfile<double>& profile) {
  const std::size_t n = profile.agents();
  const double best = max_welfare(profile);
  const double norm = static_cast<double>(n) * profile.range();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Alternative chosen = efficient_alternative(profile, AgentSet{s});
    out[s] = (best - social_welfare(profile, chosen)) / norm;
  }
  return out;
}

inline TrialResult nrs_trial(const ValuationProfile<double>& profile) {
  const auto r = sink_realizations(profile);
  TrialResult t;
  t.expected = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  t.worst = *std::max_element(r.begin(), r.end());
  return t;
}

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t n, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

/// `count` distinct indices from [0, population), uniformly, in ascending order.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

/// For every group size, samples `trials` groups of users and alternative
/// sets uniformly; trial t of size n draws from a generator seeded by
/// (seed, n, t), so results do not depend on the worker count.
inline ExperimentResult run_experiment(const RatingMatrix& matrix, const ExperimentConfig& config) {
  config.validate();
  if (!matrix.complete()) throw ArgumentError("rating matrix has missing entries; impute first");
  if (config.alternatives > matrix.item_count()) {
    throw ArgumentError("matrix has " + std::to_string(matrix.item_count()) + " items, fewer than " +
                        std::to_string(config.alternatives) + " alternatives");
  }
  ExperimentResult result{config.dataset, {}};
  for (std::size_t n : config.sizes) {
    if (n > matrix.user_count()) {
      throw ArgumentError("group size " + std::to_string(n) + " exceeds the " + std::to_string(matrix.user_count()) +
                          " available users");
    }
    SizeResult size;
    size.n = n;
    size.trials = config.trials;
    size.per_trial.resize(config.trials);
    parallel_chunks(config.trials, config.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        auto rng = detail::trial_rng(config.seed, n, t);
        const auto users = detail::sample_indices(matrix.user_count(), n, rng);
        const auto items = detail::sample_indices(matrix.item_count(), config.alternatives, rng);
        size.per_trial[t] = nrs_trial(ratings_to_profile(matrix, users, items, config.range));
      }
    });
    std::vector<double> exp, worst;
    for (const auto& t : size.per_trial) {
      exp.push_back(t.expected);
      worst.push_back(t.worst);
    }
    std::tie(size.mean_expected, size.std_expected) = detail::mean_std(exp);
    std::tie(size.mean_worst, size.std_worst) = detail::mean_std(worst);
    size.theory_line = theory_line(n);
    result.sizes.push_back(std::move(size));
  }
  return result;
}

inline constexpr const char* kResultsHeader =
    "dataset,n,trials,mean_exp_ineff,std_exp_ineff,mean_worst_ineff,std_worst_ineff,theory_line";

inline std::string format_number(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

inline void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    for (const auto& s : r.sizes) {
      out << r.dataset << ',' << s.n << ',' << s.trials << ',' << format_number(s.mean_expected) << ','
          << format_number(s.std_expected) << ',' << format_number(s.mean_worst) << ','
          << format_number(s.std_worst) << ',' << format_number(s.theory_line) << '\n';
    }
  }
}

/// Inverse of `write_results_csv` (per-trial values are not stored).
inline std::vector<ExperimentResult> read_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("results file is empty", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw ParseError("unexpected results header", 1);
  std::vector<ExperimentResult> results;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line, line_no);
    if (f.size() != 8) throw ParseError("results rows have 8 fields", line_no);
    auto count = [&](const std::string& s) {
      const double v = detail::parse_double(s, line_no);
      if (v < 0 || v != std::floor(v)) throw ParseError("bad count '" + s + "'", line_no);
      return static_cast<std::size_t>(v);
    };
    SizeResult s;
    s.n = count(f[1]);
    s.trials = count(f[2]);
    s.mean_expected = detail::parse_double(f[3], line_no);
    s.std_expected = detail::parse_double(f[4], line_no);
    s.mean_worst = detail::parse_double(f[5], line_no);
    s.std_worst = detail::parse_double(f[6], line_no);
    s.theory_line = detail::parse_double(f[7], line_no);
    if (results.empty() || results.back().dataset != f[0]) results.push_back({f[0], {}});
    results.back().sizes.push_back(std::move(s));
  }
  return results;
}

/// Line chart: group size against log10 sample inefficiency. One polyline per
/// dataset for the mean (with +-1 std error bars) and one for the worst
/// realization, plus the ceil(n/2)/n^2 reference line.
inline void write_results_svg(std::ostream& out, const std::vector<ExperimentResult>& results) {
  constexpr double width = 720, height = 480, left = 70, right = 180, top = 30, bottom = 50;
  constexpr double floor_value = 1e-6;
  std::vector<std::size_t> sizes;
  double lo = 1, hi = floor_value;
  auto track = [&](double v) {
    if (v > floor_value) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (const auto& r : results) {
    for (const auto& s : r.sizes) {
      sizes.push_back(s.n);
      track(s.mean_expected);
      track(s.mean_worst);
      track(s.theory_line);
      track(s.mean_expected + s.std_expected);
    }
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  const double y_lo = std::floor(std::log10(std::min(lo, hi)));
  const double y_hi = std::max(y_lo + 1, std::ceil(std::log10(hi)));
  const double x_lo = sizes.empty() ? 0 : static_cast<double>(sizes.front());
  const double x_hi = sizes.empty() ? 1 : std::max(x_lo + 1, static_cast<double>(sizes.back()));
  auto px = [&](double n) { return left + (n - x_lo) / (x_hi - x_lo) * (width - left - right); };
  auto py = [&](double v) {
    const double l = std::log10(std::max(v, std::pow(10.0, y_lo)));
    return top + (y_hi - l) / (y_hi - y_lo) * (height - top - bottom);
  };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (std::size_t n : sizes) {
    out << "<text x=\"" << px(static_cast<double>(n)) << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  for (double e = y_lo; e <= y_hi; e += 1) {
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(std::pow(10.0, e)) + 4 << "\" text-anchor=\"end\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">group size n</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">sample inefficiency</text>\n";

  std::size_t legend = 0;
  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const std::string& color,
                      const std::string& dash, const std::string& label) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
    out << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << (i ? " " : "") << format_number(px(pts[i].first)) << ',' << format_number(py(pts[i].second));
    }
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(legend++);
    out << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
    out << "/>\n<text x=\"" << width - right + 36 << "\" y=\"" << ly + 4 << "\">" << label << "</text>\n";
  };
  for (std::size_t d = 0; d < results.size(); ++d) {
    const auto& r = results[d];
    const std::string color = palette[(2 * d) % 6];
    const std::string worst_color = palette[(2 * d + 1) % 6];
    std::vector<std::pair<double, double>> mean, worst;
    for (const auto& s : r.sizes) {
      const double x = static_cast<double>(s.n);
      mean.emplace_back(x, s.mean_expected);
      worst.emplace_back(x, s.mean_worst);
      out << "<line x1=\"" << px(x) << "\" y1=\"" << py(s.mean_expected + s.std_expected) << "\" x2=\"" << px(x)
          << "\" y2=\"" << py(s.mean_expected - s.std_expected) << "\" stroke=\"" << color << "\"/>\n";
    }
    polyline(mean, color, "", r.dataset + " mean");
    polyline(worst, worst_color, "6,3", r.dataset + " worst sink");
  }
  std::vector<std::pair<double, double>> theory;
  for (std::size_t n : sizes) theory.emplace_back(static_cast<double>(n), theory_line(n));
  polyline(theory, "black", "2,3", "ceil(n/2)/n^2");
  out << "</svg>\n";
}

}  // namespace sinkmech::experiments
