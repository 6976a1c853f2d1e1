#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sinkmech/mechanisms.hpp"
#include "sinkmech/parallel.hpp"
#include "sinkmech/randomized.hpp"
#include "sinkmech/scalar.hpp"

namespace sinkmech::cli {

enum class Format { Text, Csv, JsonLines };
enum class Numeric { Exact, Float };

struct GlobalOptions {
  Format format = Format::Text;
  Numeric numeric = Numeric::Exact;
  std::size_t workers = default_workers();
};

/// Grid parameters shared by several subcommands; M stays a string until the
/// numeric mode is known.
struct GridArgs {
  std::size_t n = 2;
  std::size_t m = 2;
  std::size_t k = 3;
  std::string range = "1";

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "number of agents")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--m", m, "number of alternatives")->check(CLI::Range(2, 64))->capture_default_str();
    app->add_option("--k", k, "valuation levels per alternative")->check(CLI::Range(2, 1000))->capture_default_str();
    app->add_option("--M", range, "valuation range width (p/q or decimal)")->capture_default_str();
  }
};

inline void add_global_options(CLI::App* app, GlobalOptions& g) {
  const std::map<std::string, Format> formats{{"text", Format::Text}, {"csv", Format::Csv}, {"json-lines", Format::JsonLines}};
  const std::map<std::string, Numeric> modes{{"exact", Numeric::Exact}, {"float", Numeric::Float}};
  app->add_option("--format", g.format, "output format: text, csv, json-lines")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  app->add_option("--numeric", g.numeric, "arithmetic: exact (rationals) or float")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  app->add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

inline std::string decimal(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

inline const char* format_name(Format f) {
  switch (f) {
    case Format::Text: return "text";
    case Format::Csv: return "csv";
    case Format::JsonLines: return "json-lines";
  }
  return "?";
}

inline const char* numeric_name(Numeric n) { return n == Numeric::Exact ? "exact" : "float"; }

/// Resolved configuration, one line on stderr.
inline void log_config(const std::string& command, const GlobalOptions& g,
                       const std::vector<std::pair<std::string, std::string>>& items) {
  std::cerr << "# " << command << ":";
  for (const auto& [k, v] : items) std::cerr << ' ' << k << '=' << v;
  std::cerr << " format=" << format_name(g.format) << " numeric=" << numeric_name(g.numeric)
            << " workers=" << g.workers << '\n';
}

/// $SINKMECH_DATA_DIR, else the directory baked in at build time.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SINKMECH_DATA_DIR"); env && *env) return env;
#ifdef SINKMECH_DATA_DIR
  return SINKMECH_DATA_DIR;
#else
  return "data";
#endif
}

inline const std::vector<std::string>& mechanism_names() {
  static const std::vector<std::string> names{"vcg", "single-sink", "nrs", "irrelevant-sink", "mis", "constant"};
  return names;
}

/// `sink` is 1-based and only used by single-sink.
template <Scalar T>
Mechanism<T> make_mechanism(const std::string& name, std::size_t sink) {
  if (name == "vcg") return vcg_mechanism<T>();
  if (name == "single-sink") {
    if (sink == 0) throw ArgumentError("--sink is 1-based");
    return single_sink_mechanism<T>(sink - 1);
  }
  if (name == "nrs") return nrs_mechanism<T>();
  if (name == "irrelevant-sink") return irrelevant_sink_mechanism<T>();
  if (name == "mis") return mis_mechanism<T>();
  if (name == "constant") return constant_mechanism<T>();
  throw ArgumentError("unknown mechanism '" + name + "'");
}

template <Scalar T>
nlohmann::json to_json(const T& x) {
  if constexpr (ScalarTraits<T>::exact) {
    return nlohmann::json{{"exact", format_scalar(x)}, {"value", to_double(x)}};
  } else {
    return x;
  }
}

template <Scalar T>
nlohmann::json to_json(const std::vector<T>& xs) {
  auto arr = nlohmann::json::array();
  for (const auto& x : xs) arr.push_back(format_scalar(x));
  return arr;
}

void register_mech(CLI::App& app, GlobalOptions& g);
void register_verify(CLI::App& app, GlobalOptions& g);
void register_amd(CLI::App& app, GlobalOptions& g);
void register_experiment(CLI::App& app, GlobalOptions& g);

}  // namespace sinkmech::cli
