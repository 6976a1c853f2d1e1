#include "cli_common.hpp"

int main(int argc, char** argv) {
  using namespace sinkmech;
  CLI::App app{"sinkmech: budget-balanced mechanisms, verification, and automated design"};
  app.require_subcommand(1);
  cli::GlobalOptions global;
  cli::register_mech(app, global);
  cli::register_verify(app, global);
  cli::register_amd(app, global);
  cli::register_experiment(app, global);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
