#include <fstream>

#include "cli_common.hpp"
#include "sinkmech/experiments/experiment.hpp"

namespace sinkmech::cli {
namespace {

struct ExperimentArgs {
  std::vector<std::string> datasets{"movielens"};
  std::optional<std::string> ratings;
  std::optional<std::string> movies;
  std::optional<std::string> jester;
  std::optional<std::string> genre;
  std::vector<std::size_t> sizes{10, 60, 110, 160, 210};
  std::size_t trials = 50;
  std::size_t alternatives = 2;
  std::uint64_t seed = 1;
  std::size_t min_ratings = 10;
  std::optional<double> range;
  std::string out_dir = ".";
};

std::string or_default(const std::optional<std::string>& v, const std::filesystem::path& fallback) {
  return v ? *v : fallback.string();
}

void run(const ExperimentArgs& a, const GlobalOptions& g) {
  using namespace experiments;
  std::vector<ExperimentResult> results;
  for (const auto& name : a.datasets) {
    RatingMatrix raw;
    if (name == "movielens") {
      raw = load_movielens(or_default(a.ratings, data_dir() / "movielens" / "ratings.csv"),
                           or_default(a.movies, data_dir() / "movielens" / "movies.csv"), a.genre);
    } else {
      raw = load_jester(or_default(a.jester, data_dir() / "jester" / "jester-data-1.csv"));
    }
    const auto matrix = impute(raw, a.min_ratings, a.seed, g.workers);
    std::cerr << "# " << name << ": " << raw.user_count() << " users, " << raw.item_count() << " items, "
              << matrix.item_count() << " kept after the " << a.min_ratings << "-rating threshold\n";
    ExperimentConfig config;
    config.dataset = name;
    config.sizes = a.sizes;
    config.trials = a.trials;
    config.alternatives = a.alternatives;
    config.seed = a.seed;
    config.range = RangeRule{a.range};
    config.workers = g.workers;
    results.push_back(run_experiment(matrix, config));
  }
  const std::filesystem::path dir = a.out_dir;
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw ArgumentError("cannot write " + (dir / "results.csv").string());
    write_results_csv(csv, results);
    std::ofstream svg(dir / "results.svg");
    if (!svg) throw ArgumentError("cannot write " + (dir / "results.svg").string());
    write_results_svg(svg, results);
  }
  if (g.format == Format::JsonLines) {
    for (const auto& r : results) {
      for (const auto& s : r.sizes) {
        std::cout << nlohmann::json{{"dataset", r.dataset},          {"n", s.n},
                                    {"trials", s.trials},            {"mean_exp_ineff", s.mean_expected},
                                    {"std_exp_ineff", s.std_expected}, {"mean_worst_ineff", s.mean_worst},
                                    {"std_worst_ineff", s.std_worst}, {"theory_line", s.theory_line}}
                         .dump()
                  << '\n';
      }
    }
  } else {
    write_results_csv(std::cout, results);
  }
}

struct PlotArgs {
  std::string results = "results.csv";
  std::string out = "results.svg";
};

void plot(const PlotArgs& a) {
  std::ifstream in(a.results);
  if (!in) throw ArgumentError("cannot open " + a.results);
  const auto results = experiments::read_results_csv(in);
  std::ofstream out(a.out);
  if (!out) throw ArgumentError("cannot write " + a.out);
  experiments::write_results_svg(out, results);
  std::cout << "wrote " << a.out << '\n';
}

}  // namespace

void register_experiment(CLI::App& app, GlobalOptions& g) {
  auto* exp = app.add_subcommand("experiment", "naive randomized sink mechanism on rating datasets");
  exp->require_subcommand(1);

  static ExperimentArgs args;
  auto* run_cmd = exp->add_subcommand("run", "sample groups, write results.csv and results.svg");
  run_cmd->add_option("--dataset", args.datasets, "movielens and/or jester")
      ->check(CLI::IsMember({"movielens", "jester"}))
      ->capture_default_str();
  run_cmd->add_option("--ratings", args.ratings, "MovieLens ratings.csv (default: data dir)");
  run_cmd->add_option("--movies", args.movies, "MovieLens movies.csv (default: data dir)");
  run_cmd->add_option("--jester", args.jester, "Jester rating matrix (default: data dir)");
  run_cmd->add_option("--genre", args.genre, "MovieLens genre filter");
  run_cmd->add_option("--sizes", args.sizes, "group sizes")->capture_default_str();
  run_cmd->add_option("--trials", args.trials, "groups per size")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--alternatives", args.alternatives, "items per group")->check(CLI::Range(2, 1000))
      ->capture_default_str();
  run_cmd->add_option("--seed", args.seed, "random seed")->capture_default_str();
  run_cmd->add_option("--min-ratings", args.min_ratings, "drop items with fewer ratings")->capture_default_str();
  run_cmd->add_option("--range", args.range, "valuation range M (default: rating scale width)");
  run_cmd->add_option("--out-dir", args.out_dir, "output directory")->capture_default_str();
  add_global_options(run_cmd, g);
  run_cmd->callback([&g] {
    std::string sizes, datasets;
    for (auto n : args.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(n);
    for (const auto& d : args.datasets) datasets += (datasets.empty() ? "" : ",") + d;
    log_config("experiment run", g,
               {{"datasets", datasets}, {"data_dir", data_dir().string()}, {"genre", args.genre.value_or("all")},
                {"sizes", sizes}, {"trials", std::to_string(args.trials)},
                {"alternatives", std::to_string(args.alternatives)}, {"seed", std::to_string(args.seed)},
                {"min_ratings", std::to_string(args.min_ratings)},
                {"M", args.range ? decimal(*args.range) : "scale width"}, {"out_dir", args.out_dir}});
    run(args, g);
  });

  static PlotArgs plot_args;
  auto* plot_cmd = exp->add_subcommand("plot", "redraw the chart from a results table");
  plot_cmd->add_option("--results", plot_args.results, "results.csv to read")->capture_default_str();
  plot_cmd->add_option("--out", plot_args.out, "SVG to write")->capture_default_str();
  add_global_options(plot_cmd, g);
  plot_cmd->callback([&g] {
    log_config("experiment plot", g, {{"results", plot_args.results}, {"out", plot_args.out}});
    plot(plot_args);
  });
}

}  // namespace sinkmech::cli
