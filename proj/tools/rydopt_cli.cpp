// Command-line front end; links only the shared C API.

#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "rydopt.h"

namespace {

struct SessionDeleter {
  void operator()(rydopt_session* s) const { rydopt_session_free(s); }
};

int run(const std::string& command, const std::string& config_path, const std::string& out,
        int workers, const std::string& seed, int budget, const std::string& pulse) {
  std::unique_ptr<rydopt_session, SessionDeleter> session(rydopt_session_new());
  if (!session) {
    std::fprintf(stderr, "error: cannot create session\n");
    return RYDOPT_ERROR_USAGE;
  }
  auto check = [&](rydopt_status status) {
    if (status != RYDOPT_OK) {
      std::fprintf(stderr, "error: %s\n", rydopt_last_error(session.get()));
      std::exit(status);
    }
  };
  check(rydopt_load_config_file(session.get(), config_path.c_str()));
  if (!out.empty()) check(rydopt_set_option(session.get(), "out", out.c_str()));
  if (workers > 0) {
    check(rydopt_set_option(session.get(), "workers", std::to_string(workers).c_str()));
  }
  if (!seed.empty()) check(rydopt_set_option(session.get(), "seed", seed.c_str()));
  if (budget >= 0) {
    check(rydopt_set_option(session.get(), "budget", std::to_string(budget).c_str()));
  }
  check(rydopt_run(session.get(), command.c_str(), pulse.empty() ? nullptr : pulse.c_str()));
  const char* summary = rydopt_summary_json(session.get());
  if (summary) std::printf("%s\n", summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-control toolkit for Rydberg lattice gases"};
  app.require_subcommand(1);

  std::string config_path, out, seed, pulse;
  int workers = 0;
  int budget = -1;

  app.add_option("--config", config_path, "run-config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--workers", workers, "worker threads (overrides the config)");
  app.add_option("--seed-override", seed, "replace all seeds deterministically");
  app.add_option("--budget-override", budget, "evaluation budget per super-iteration");

  const struct {
    const char* name;
    const char* help;
    bool needs_pulse;
  } commands[] = {
      {"spectrum", "classical energy spectrum over a detuning sweep", false},
      {"crystal", "optimize crystalline ground-state preparation", false},
      {"staircase", "apply a pulse across chain lengths", true},
      {"ghz", "optimize GHZ preparation and run the detection protocol", false},
      {"arbitrary", "optimize an arbitrary symmetric superposition", false},
      {"simulate", "replay a pulse and report observables", true},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    if (c.needs_pulse) {
      sub->add_option("--pulse", pulse, "pulse CSV file")->required()->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : RYDOPT_ERROR_CONFIG;
  }

  return run(app.get_subcommands().front()->get_name(), config_path, out, workers, seed,
             budget, pulse);
}
