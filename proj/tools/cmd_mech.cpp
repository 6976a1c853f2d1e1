#include <fstream>

#include "cli_common.hpp"
#include "sinkmech/grid.hpp"
#include "sinkmech/profile_io.hpp"

namespace sinkmech::cli {
namespace {

struct RunArgs {
  std::string mechanism = "nrs";
  std::size_t sink = 1;
  std::string profile = "-";
  std::optional<std::string> lambda;
};

template <Scalar T>
ValuationProfile<T> load_profile(const std::string& path) {
  if (path == "-") return read_profile<T>(std::cin);
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  return read_profile<T>(in);
}

template <Scalar T>
void run(const RunArgs& a, const GlobalOptions& g) {
  const auto profile = load_profile<T>(a.profile);
  const auto mech = make_mechanism<T>(a.mechanism, a.sink);
  const auto outcome = mech(profile);
  outcome.validate(profile.agents());
  const T loss = absolute_inefficiency(profile, outcome);
  const T sample = sample_inefficiency_normalize(loss, profile.agents(), profile.range());
  const auto alloc = outcome.allocation(profile.alternatives());
  const auto pay = outcome.expected_payments(profile.agents());
  T surplus(0);
  for (const T& p : pay) surplus += p;
  std::optional<T> spill;
  if (a.lambda) spill = spillover(profile, mech, parse_scalar<T>(*a.lambda));

  if (g.format == Format::JsonLines) {
    nlohmann::json j{{"mechanism", mech.name},
                     {"profile", describe_profile(profile)},
                     {"allocation", to_json(alloc)},
                     {"expected_payments", to_json(pay)},
                     {"absolute_inefficiency", to_json(loss)},
                     {"sample_inefficiency", to_json(sample)},
                     {"expected_surplus", to_json(surplus)}};
    auto support = nlohmann::json::array();
    for (const auto& e : outcome.support) {
      support.push_back({{"probability", format_scalar(e.probability)},
                         {"alternative", e.outcome.alternative.index + 1},
                         {"payments", to_json(e.outcome.payments)}});
    }
    j["support"] = support;
    if (spill) j["spillover"] = to_json(*spill);
    std::cout << j.dump() << '\n';
  } else if (g.format == Format::Csv) {
    std::cout << "probability,alternative";
    for (std::size_t i = 0; i < profile.agents(); ++i) std::cout << ",p" << i + 1;
    std::cout << '\n';
    for (const auto& e : outcome.support) {
      std::cout << format_scalar(e.probability) << ',' << e.outcome.alternative.index + 1;
      for (const T& p : e.outcome.payments) std::cout << ',' << format_scalar(p);
      std::cout << '\n';
    }
  } else {
    std::cout << "mechanism " << mech.name << " on " << describe_profile(profile) << '\n';
    for (const auto& e : outcome.support) {
      std::cout << "  with probability " << format_scalar(e.probability) << ": alternative "
                << e.outcome.alternative.index + 1 << ", payments (";
      for (std::size_t i = 0; i < e.outcome.payments.size(); ++i) {
        std::cout << (i ? "," : "") << format_scalar(e.outcome.payments[i]);
      }
      std::cout << ")\n";
    }
    std::cout << "allocation (";
    for (std::size_t x = 0; x < alloc.size(); ++x) std::cout << (x ? "," : "") << format_scalar(alloc[x]);
    std::cout << ")\nabsolute inefficiency " << format_with_decimal(loss) << "\nsample inefficiency "
              << format_with_decimal(sample) << "\nexpected surplus " << format_with_decimal(surplus) << '\n';
    if (spill) std::cout << "spillover " << format_with_decimal(*spill) << '\n';
  }
}

struct WorstArgs {
  std::string mechanism = "nrs";
  std::size_t sink = 1;
  GridArgs grid;
  std::string metric = "sample";
  std::optional<std::string> generator;
  std::string margin = "1/1000";
  std::string w_high = "2";
  std::string w_low = "1";
};

template <Scalar T>
void emit_worst(const GlobalOptions& g, const std::string& label, const T& value, const ValuationProfile<T>& argmax,
                std::optional<std::uint64_t> index) {
  if (g.format == Format::JsonLines) {
    nlohmann::json j{{"source", label}, {"value", to_json(value)}, {"argmax", describe_profile(argmax)}};
    if (index) j["argmax_index"] = *index;
    std::cout << j.dump() << '\n';
  } else if (g.format == Format::Csv) {
    std::cout << "source,value,argmax_index,argmax\n"
              << label << ',' << format_scalar(value) << ',' << (index ? std::to_string(*index) : "") << ",\""
              << describe_profile(argmax) << "\"\n";
  } else {
    std::cout << label << ": " << format_with_decimal(value) << " at " << describe_profile(argmax);
    if (index) std::cout << " (profile " << *index << ")";
    std::cout << '\n';
  }
}

template <Scalar T>
void worstcase(const WorstArgs& a, const GlobalOptions& g) {
  const T range = parse_scalar<T>(a.grid.range);
  auto metric_of = [&](const ValuationProfile<T>& v, const RandomizedOutcome<T>& o) {
    const T loss = absolute_inefficiency(v, o);
    return a.metric == "sample" ? sample_inefficiency_normalize(loss, v.agents(), v.range()) : loss;
  };
  if (a.generator) {
    const T margin = parse_scalar<T>(a.margin);
    const std::string& gen = *a.generator;
    std::optional<ValuationProfile<T>> profile;
    Mechanism<T> mech = make_mechanism<T>(a.mechanism, a.sink);
    if (gen == "single-sink") {
      profile = worst_case_profile_single_sink(a.grid.n, a.grid.m, range, margin, a.sink - 1);
      mech = single_sink_mechanism<T>(a.sink - 1);
    } else if (gen == "nrs") {
      profile = nrs_worst_profile(a.grid.n, a.grid.m, range, margin);
      mech = nrs_mechanism<T>();
    } else if (gen == "m-gt-n") {
      profile = gen_sink_worst_profile_m_gt_n(a.grid.n, a.grid.m, range, margin);
    } else if (gen == "unequal-weights") {
      const T hi = parse_scalar<T>(a.w_high);
      const T lo = parse_scalar<T>(a.w_low);
      profile = unequal_weights_counterexample(a.grid.n, a.grid.m, range, hi, lo, margin);
      const auto am = sink_affine_maximizer(a.grid.n, a.grid.m, hi, lo);
      mech = deterministic_mechanism<T>("weighted-sink", [am](const ValuationProfile<T>& v) {
        return Outcome<T>{affine_maximizer_choose(am, v), std::vector<T>(v.agents(), T(0))};
      });
    } else {
      throw ArgumentError("unknown generator '" + gen + "'");
    }
    emit_worst(g, gen + " generator, " + mech.name + ", " + a.metric, metric_of(*profile, mech(*profile)), *profile,
               std::nullopt);
    return;
  }
  const Grid<T> grid(a.grid.n, a.grid.m, a.grid.k, range);
  const auto mech = make_mechanism<T>(a.mechanism, a.sink);
  const auto sup = grid_supremum<T>(grid, mech, metric_of, EnumerationOptions{g.workers});
  emit_worst(g, "grid supremum, " + mech.name + ", " + a.metric, sup.value, sup.argmax, sup.argmax_index);
}

}  // namespace

void register_mech(CLI::App& app, GlobalOptions& g) {
  auto* mech = app.add_subcommand("mech", "evaluate mechanisms");
  mech->require_subcommand(1);

  static RunArgs run_args;
  auto* run_cmd = mech->add_subcommand("run", "evaluate a mechanism on a profile file");
  run_cmd->add_option("--mechanism", run_args.mechanism, "mechanism name")
      ->check(CLI::IsMember(mechanism_names()))
      ->capture_default_str();
  run_cmd->add_option("--sink", run_args.sink, "sink agent for single-sink (1-based)")->capture_default_str();
  run_cmd->add_option("--profile", run_args.profile, "profile file ('-' for stdin)")->capture_default_str();
  run_cmd->add_option("--lambda", run_args.lambda, "also report the spillover with this weight");
  add_global_options(run_cmd, g);
  run_cmd->callback([&g] {
    log_config("mech run", g, {{"mechanism", run_args.mechanism}, {"sink", std::to_string(run_args.sink)},
                               {"profile", run_args.profile}, {"lambda", run_args.lambda.value_or("none")}});
    g.numeric == Numeric::Exact ? run<Rational>(run_args, g) : run<double>(run_args, g);
  });

  static WorstArgs worst_args;
  auto* worst = mech->add_subcommand("worstcase", "grid supremum of inefficiency, or an adversarial generator");
  worst->add_option("--mechanism", worst_args.mechanism, "mechanism name")
      ->check(CLI::IsMember(mechanism_names()))
      ->capture_default_str();
  worst->add_option("--sink", worst_args.sink, "sink agent for single-sink (1-based)")->capture_default_str();
  worst_args.grid.add_to(worst);
  worst->add_option("--metric", worst_args.metric, "sample or absolute")
      ->check(CLI::IsMember({"sample", "absolute"}))
      ->capture_default_str();
  worst->add_option("--generator", worst_args.generator,
                    "evaluate an analytic profile instead: single-sink, nrs, m-gt-n, unequal-weights")
      ->check(CLI::IsMember({"single-sink", "nrs", "m-gt-n", "unequal-weights"}));
  worst->add_option("--margin", worst_args.margin, "generator margin")->capture_default_str();
  worst->add_option("--w-high", worst_args.w_high, "unequal-weights: larger weight")->capture_default_str();
  worst->add_option("--w-low", worst_args.w_low, "unequal-weights: smaller weight")->capture_default_str();
  add_global_options(worst, g);
  worst->callback([&g] {
    const auto& a = worst_args;
    log_config("mech worstcase", g,
               {{"mechanism", a.mechanism}, {"n", std::to_string(a.grid.n)}, {"m", std::to_string(a.grid.m)},
                {"k", std::to_string(a.grid.k)}, {"M", a.grid.range}, {"metric", a.metric},
                {"generator", a.generator.value_or("none")}, {"margin", a.margin}});
    g.numeric == Numeric::Exact ? worstcase<Rational>(a, g) : worstcase<double>(a, g);
  });
}

}  // namespace sinkmech::cli
