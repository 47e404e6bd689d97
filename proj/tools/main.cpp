#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/error.hpp"
#include "logitrank/learner.hpp"

int main(int argc, char** argv) {
  using namespace logitrank;
  CLI::App app{"logitrank: logit-matrix analysis, LinGen and ISAN learning"};
  app.set_version_flag("--version", std::string(LOGITRANK_VERSION_STRING));
  app.require_subcommand(1);
  app.fallthrough();
  cli::GlobalOptions g;
  app.add_option("--out-dir", g.out_dir,
                 "Directory for relative output paths (default $LOGITRANK_OUT_DIR or .)");
  app.add_option("--workers", g.workers, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  int verify_status = 0;
  cli::register_make_model(app, g);
  cli::register_build_matrix(app, g);
  cli::register_analyze(app, g);
  cli::register_lingen(app, g);
  cli::register_steal(app, g);
  cli::register_verify(app, g, verify_status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation [" << e.invariant() << "]: " << e.what() << "\n";
    return 3;
  } catch (const RankCapExceeded& e) {
    std::cerr << "invariant violation [rank-cap]: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const EnumerationInfeasible& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return verify_status;
}
