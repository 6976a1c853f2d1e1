#include <fstream>

#include "cli_common.hpp"
#include "sinkmech/amd/build.hpp"
#include "sinkmech/amd/certificate.hpp"
#include "sinkmech/amd/deterministic.hpp"
#include "sinkmech/amd/sweep.hpp"
#include "sinkmech/lp/simplex.hpp"

namespace sinkmech::cli {
namespace {

struct SolveArgs {
  GridArgs grid;
  std::string mechanism_class = "randomized";
  bool symmetry = false;
  std::optional<std::string> export_lp;
};

template <Scalar T>
void solve(const SolveArgs& a, const GlobalOptions& g) {
  const Grid<T> grid(a.grid.n, a.grid.m, a.grid.k, parse_scalar<T>(a.grid.range));
  const auto prog = amd::build_lp(amd::parse_class(a.mechanism_class), grid, amd::BuildOptions{a.symmetry, g.workers});
  if (a.export_lp) {
    std::ofstream out(*a.export_lp);
    if (!out) throw ArgumentError("cannot write " + *a.export_lp);
    prog.lp.write_lp(out);
  }
  const auto sol = lp::solve_lp(prog.lp);
  if (sol.status != lp::Status::Optimal) {
    throw ContractError(std::string("inefficiency LP is ") + lp::status_name(sol.status));
  }
  const T violation = prog.lp.max_violation(sol.x);
  if (g.format == Format::JsonLines) {
    std::cout << nlohmann::json{{"class", a.mechanism_class}, {"k", a.grid.k}, {"optimum", to_json(sol.objective)},
                                {"columns", prog.lp.column_count()}, {"rows", prog.lp.row_count()},
                                {"iterations", sol.iterations}, {"max_violation", to_json(violation)}}
                     .dump()
              << '\n';
  } else if (g.format == Format::Csv) {
    std::cout << "class,k,optimum,columns,rows,iterations\n"
              << a.mechanism_class << ',' << a.grid.k << ',' << format_scalar(sol.objective) << ','
              << prog.lp.column_count() << ',' << prog.lp.row_count() << ',' << sol.iterations << '\n';
  } else {
    std::cout << format_with_decimal(sol.objective) << '\n';
    std::cerr << "# " << prog.lp.column_count() << " columns, " << prog.lp.row_count() << " rows, "
              << sol.iterations << " pivots, max row violation " << format_scalar(violation) << '\n';
  }
}

struct SweepArgs {
  std::string mechanism_class = "randomized";
  std::size_t k_min = 2;
  std::size_t k_max = 5;
  std::size_t exact_max_k = 4;
  bool no_symmetry = false;
  std::uint64_t max_tableau_cells = amd::SweepOptions{}.max_tableau_cells;
  std::optional<std::string> out;
};

void sweep(const SweepArgs& a, const GlobalOptions& g) {
  amd::SweepOptions options;
  options.use_symmetry = !a.no_symmetry;
  options.workers = g.workers;
  options.exact_max_k = g.numeric == Numeric::Float ? 1 : a.exact_max_k;
  options.max_tableau_cells = a.max_tableau_cells;
  const auto result = amd::sweep_levels(amd::parse_class(a.mechanism_class), a.k_min, a.k_max, options);
  if (a.out) {
    std::ofstream out(*a.out);
    if (!out) throw ArgumentError("cannot write " + *a.out);
    amd::write_sweep_csv(out, result);
  }
  if (g.format == Format::JsonLines) {
    for (const auto& p : result.points) {
      std::cout << nlohmann::json{{"class", a.mechanism_class}, {"k", p.k}, {"mode", amd::mode_name(p.mode)},
                                  {"value", p.value}, {"exact", p.exact}}
                       .dump()
                << '\n';
    }
    if (result.truncated) std::cout << nlohmann::json{{"truncated", result.truncation_reason}}.dump() << '\n';
  } else if (g.format == Format::Csv) {
    amd::write_sweep_csv(std::cout, result);
  } else {
    for (const auto& p : result.points) {
      std::cout << "k=" << p.k << ' ' << (p.exact.empty() ? format_scalar(p.value) : p.exact) << " ("
                << decimal(p.value) << ", " << amd::mode_name(p.mode) << ")\n";
    }
    if (result.truncated) std::cout << "truncated: " << result.truncation_reason << '\n';
  }
}

struct CertArgs {
  std::size_t k = 3;
  std::string cert = "bundled";
  bool full = false;
  bool compare = false;
};

void cert_verify(const CertArgs& a, const GlobalOptions& g) {
  if (a.k != 3) throw ArgumentError("the certificate is stated for k = 3 (n = m = 2, M = 1)");
  const std::filesystem::path path = a.cert == "bundled" ? data_dir() / "appendix_certificate.txt" : std::filesystem::path(a.cert);
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open certificate " + path.string());
  const auto cert = amd::read_certificate<Rational>(in);
  const Grid<Rational> grid(2, 2, a.k, Rational(1));
  const auto prog = amd::build_lp(amd::MechanismClass::Randomized, grid, amd::BuildOptions{!a.full, g.workers});
  const auto check = amd::verify_dual_certificate(prog, cert);
  std::optional<Rational> primal;
  if (a.compare) {
    const auto sol = lp::solve_lp(prog.lp);
    if (sol.status != lp::Status::Optimal) throw ContractError("inefficiency LP did not solve");
    primal = sol.objective;
  }
  if (g.format == Format::JsonLines) {
    nlohmann::json j{{"feasible", check.feasible}, {"objective", to_json(check.objective)},
                     {"violated_columns", check.violated_columns.size()}, {"sign_errors", check.sign_errors.size()}};
    if (primal) j["primal_optimum"] = to_json(*primal);
    std::cout << j.dump() << '\n';
  } else {
    amd::write_certificate_report(std::cout, check);
    if (primal) {
      std::cout << "primal optimum " << format_scalar(*primal) << "; weak duality "
                << (check.objective <= *primal ? "holds" : "FAILS") << '\n';
    }
  }
  if (!check.feasible) throw DataError("certificate is not dual feasible");
}

struct DetArgs {
  GridArgs grid{2, 2, 2, "1"};
};

void det_search(const DetArgs& a, const GlobalOptions& g) {
  const auto r = amd::deterministic_exhaustive(a.grid.n, a.grid.m, a.grid.k, parse_scalar<Rational>(a.grid.range));
  if (g.format == Format::JsonLines) {
    std::cout << nlohmann::json{{"optimum", to_json(r.value)}, {"allocation_code", r.allocation_code},
                                {"candidates", r.candidates}, {"feasibility_checks", r.feasibility_checks}}
                     .dump()
              << '\n';
  } else if (g.format == Format::Csv) {
    std::cout << "optimum,allocation_code,candidates,feasibility_checks\n"
              << format_scalar(r.value) << ',' << r.allocation_code << ',' << r.candidates << ','
              << r.feasibility_checks << '\n';
  } else {
    std::cout << format_with_decimal(r.value) << '\n';
    std::cerr << "# allocation code " << r.allocation_code << " after " << r.feasibility_checks << " of "
              << r.candidates << " candidates\n";
  }
}

}  // namespace

void register_amd(CLI::App& app, GlobalOptions& g) {
  auto* amd_cmd = app.add_subcommand("amd", "automated mechanism design on a valuation grid");
  amd_cmd->require_subcommand(1);
  const std::vector<std::string> classes{"randomized", "unrestricted", "generalized-sink", "gen-sink"};

  static SolveArgs solve_args;
  auto* solve_cmd = amd_cmd->add_subcommand("solve", "solve the inefficiency LP for one grid");
  solve_args.grid.add_to(solve_cmd);
  solve_cmd->add_option("--class", solve_args.mechanism_class, "mechanism class")
      ->check(CLI::IsMember(classes))
      ->capture_default_str();
  solve_cmd->add_flag("--symmetry", solve_args.symmetry, "merge variables within symmetry orbits");
  solve_cmd->add_option("--export-lp", solve_args.export_lp, "also write the program in LP text format");
  add_global_options(solve_cmd, g);
  solve_cmd->callback([&g] {
    const auto& a = solve_args;
    log_config("amd solve", g,
               {{"n", std::to_string(a.grid.n)}, {"m", std::to_string(a.grid.m)}, {"k", std::to_string(a.grid.k)},
                {"M", a.grid.range}, {"class", a.mechanism_class}, {"symmetry", a.symmetry ? "on" : "off"}});
    g.numeric == Numeric::Exact ? solve<Rational>(a, g) : solve<double>(a, g);
  });

  static SweepArgs sweep_args;
  auto* sweep_cmd = amd_cmd->add_subcommand("sweep", "optimal value for each k in a range (n = m = 2, M = 1)");
  sweep_cmd->add_option("--class", sweep_args.mechanism_class, "randomized, generalized-sink, or deterministic")
      ->check(CLI::IsMember({"randomized", "unrestricted", "generalized-sink", "gen-sink", "deterministic"}))
      ->capture_default_str();
  sweep_cmd->add_option("--k-min", sweep_args.k_min, "smallest k")->check(CLI::Range(2, 1000))->capture_default_str();
  sweep_cmd->add_option("--k-max", sweep_args.k_max, "largest k")->check(CLI::Range(2, 1000))->capture_default_str();
  sweep_cmd->add_option("--exact-max-k", sweep_args.exact_max_k, "levels above this are solved in floating point")
      ->capture_default_str();
  sweep_cmd->add_flag("--no-symmetry", sweep_args.no_symmetry, "solve the full, unreduced programs");
  sweep_cmd->add_option("--max-tableau-cells", sweep_args.max_tableau_cells, "per-level solver size limit")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out, "also write the table as CSV to this file");
  add_global_options(sweep_cmd, g);
  sweep_cmd->callback([&g] {
    const auto& a = sweep_args;
    log_config("amd sweep", g,
               {{"class", a.mechanism_class}, {"k_min", std::to_string(a.k_min)}, {"k_max", std::to_string(a.k_max)},
                {"exact_max_k", std::to_string(a.exact_max_k)}, {"symmetry", a.no_symmetry ? "off" : "on"},
                {"max_tableau_cells", std::to_string(a.max_tableau_cells)}});
    sweep(a, g);
  });

  static CertArgs cert_args;
  auto* cert_cmd = amd_cmd->add_subcommand("cert-verify", "check a dual certificate by weak duality");
  cert_cmd->add_option("--k", cert_args.k, "valuation levels (certificates exist for k = 3)")->capture_default_str();
  cert_cmd->add_option("--cert", cert_args.cert, "'bundled' or a certificate file")->capture_default_str();
  cert_cmd->add_flag("--full", cert_args.full, "check against the unreduced program");
  cert_cmd->add_flag("--compare", cert_args.compare, "also solve the primal and compare");
  add_global_options(cert_cmd, g);
  cert_cmd->callback([&g] {
    const auto& a = cert_args;
    log_config("amd cert-verify", g,
               {{"k", std::to_string(a.k)}, {"cert", a.cert}, {"data_dir", data_dir().string()},
                {"program", a.full ? "full" : "reduced"}});
    cert_verify(a, g);
  });

  static DetArgs det_args;
  auto* det_cmd = amd_cmd->add_subcommand("det-search", "exhaustive search over deterministic allocations");
  det_args.grid.add_to(det_cmd);
  add_global_options(det_cmd, g);
  det_cmd->callback([&g] {
    const auto& a = det_args;
    log_config("amd det-search", g,
               {{"n", std::to_string(a.grid.n)}, {"m", std::to_string(a.grid.m)}, {"k", std::to_string(a.grid.k)},
                {"M", a.grid.range}});
    det_search(a, g);
  });
}

}  // namespace sinkmech::cli
