#include "cli_common.hpp"
#include "sinkmech/verify.hpp"

namespace sinkmech::cli {
namespace {

struct VerifyArgs {
  std::string mechanism = "vcg";
  std::size_t sink = 1;
  GridArgs grid;
  std::size_t max_reports = 20;
};

template <Scalar T>
void emit_violations(const std::string& check, const std::vector<ViolationReport<T>>& reports,
                     const VerifyArgs& a, const GlobalOptions& g) {
  if (g.format == Format::Csv) {
    write_violations_csv(std::cout, reports);
  } else if (g.format == Format::JsonLines) {
    for (const auto& r : reports) {
      std::cout << nlohmann::json{{"check", check},
                                  {"agent", r.agent + 1},
                                  {"profile_index", r.profile_index},
                                  {"profile", describe_profile(r.profile)},
                                  {"misreport", to_json(r.misreport)},
                                  {"misreport_profile_index", r.misreport_profile_index},
                                  {"gain", to_json(r.gain)}}
                       .dump()
                << '\n';
    }
  } else {
    std::cout << reports.size() << " violation" << (reports.size() == 1 ? "" : "s") << '\n';
    const std::vector<ViolationReport<T>> shown(
        reports.begin(), reports.begin() + static_cast<std::ptrdiff_t>(std::min(reports.size(), a.max_reports)));
    write_violations_text(std::cout, shown);
    if (shown.size() < reports.size()) std::cout << "... " << reports.size() - shown.size() << " more\n";
  }
}

void emit_symmetry(const std::string& check, const std::vector<SymmetryViolation>& found, const VerifyArgs& a,
                   const GlobalOptions& g) {
  auto perm = [](const std::vector<std::size_t>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i] + 1);
    return s + ")";
  };
  if (g.format == Format::Csv) {
    std::cout << "profile_index,permutation\n";
    for (const auto& v : found) std::cout << v.profile_index << ",\"" << perm(v.permutation) << "\"\n";
  } else if (g.format == Format::JsonLines) {
    for (const auto& v : found) {
      std::cout << nlohmann::json{{"check", check}, {"profile_index", v.profile_index}, {"permutation", perm(v.permutation)}}
                       .dump()
                << '\n';
    }
  } else {
    std::cout << found.size() << " violation" << (found.size() == 1 ? "" : "s") << '\n';
    for (std::size_t i = 0; i < std::min(found.size(), a.max_reports); ++i) {
      std::cout << "profile " << found[i].profile_index << " under permutation " << perm(found[i].permutation) << '\n';
    }
    if (found.size() > a.max_reports) std::cout << "... " << found.size() - a.max_reports << " more\n";
  }
}

template <Scalar T>
void verify(const std::string& check, const VerifyArgs& a, const GlobalOptions& g) {
  const Grid<T> grid(a.grid.n, a.grid.m, a.grid.k, parse_scalar<T>(a.grid.range));
  const auto mech = make_mechanism<T>(a.mechanism, a.sink);
  const EnumerationOptions options{g.workers};
  const auto table = tabulate(mech, grid, options);
  if (check == "sp") {
    emit_violations(check, check_strategyproof(table, grid, options), a, g);
  } else if (check == "wmon") {
    emit_violations(check, check_weak_monotonicity(table, grid, options), a, g);
  } else if (check == "bb") {
    const auto r = check_budget_balance(table, grid);
    if (g.format == Format::JsonLines) {
      std::cout << nlohmann::json{{"check", check}, {"worst_surplus", to_json(r.worst_surplus)},
                                  {"argmax_index", r.argmax_index}, {"argmax", describe_profile(r.argmax)}}
                       .dump()
                << '\n';
    } else if (g.format == Format::Csv) {
      std::cout << "worst_surplus,argmax_index,argmax\n"
                << format_scalar(r.worst_surplus) << ',' << r.argmax_index << ",\"" << describe_profile(r.argmax)
                << "\"\n";
    } else {
      std::cout << "worst |surplus| " << format_with_decimal(r.worst_surplus) << " at profile " << r.argmax_index
                << ' ' << describe_profile(r.argmax) << '\n';
    }
  } else if (check == "neutral") {
    emit_symmetry(check, check_neutrality(table, grid), a, g);
  } else {
    emit_symmetry(check, check_anonymity(table, grid), a, g);
  }
}

}  // namespace

void register_verify(CLI::App& app, GlobalOptions& g) {
  auto* verify_cmd = app.add_subcommand("verify", "brute-force property checks over a valuation grid");
  verify_cmd->require_subcommand(1);
  static VerifyArgs args;
  const std::vector<std::pair<std::string, std::string>> checks{
      {"sp", "strategyproofness"},
      {"wmon", "weak monotonicity"},
      {"bb", "budget balance (worst |sum of payments|)"},
      {"neutral", "neutrality on unique-argmax profiles"},
      {"anon", "anonymity"}};
  for (const auto& [name, help] : checks) {
    auto* sub = verify_cmd->add_subcommand(name, help);
    sub->add_option("--mechanism", args.mechanism, "mechanism name")
        ->check(CLI::IsMember(mechanism_names()))
        ->capture_default_str();
    sub->add_option("--sink", args.sink, "sink agent for single-sink (1-based)")->capture_default_str();
    args.grid.add_to(sub);
    sub->add_option("--max-reports", args.max_reports, "reports listed in text output")->capture_default_str();
    add_global_options(sub, g);
    sub->callback([&g, check = name] {
      log_config("verify " + check, g,
                 {{"mechanism", args.mechanism}, {"sink", std::to_string(args.sink)},
                  {"n", std::to_string(args.grid.n)}, {"m", std::to_string(args.grid.m)},
                  {"k", std::to_string(args.grid.k)}, {"M", args.grid.range}});
      g.numeric == Numeric::Exact ? verify<Rational>(check, args, g) : verify<double>(check, args, g);
    });
  }
}

}  // namespace sinkmech::cli
