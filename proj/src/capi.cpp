#include "rydopt.h"

#include <cstdlib>
#include <functional>
#include <new>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rydopt/config.hpp"
#include "rydopt/errors.hpp"
#include "rydopt/rng.hpp"
#include "rydopt/runner.hpp"

struct rydopt_session {
  std::optional<rydopt::RunConfig> config;
  std::string summary;
  std::string error;
};

namespace {

rydopt_status guard(rydopt_session* session, const std::function<void()>& body) {
  if (!session) return RYDOPT_ERROR_USAGE;
  session->error.clear();
  try {
    body();
    return RYDOPT_OK;
  } catch (const rydopt::ConfigError& e) {
    session->error = e.what();
    return RYDOPT_ERROR_CONFIG;
  } catch (const rydopt::ConstraintError& e) {
    session->error = e.what();
    return RYDOPT_ERROR_CONSTRAINT;
  } catch (const rydopt::NumericalError& e) {
    session->error = e.what();
    return RYDOPT_ERROR_NUMERIC;
  } catch (const rydopt::UsageError& e) {
    session->error = e.what();
    return RYDOPT_ERROR_USAGE;
  } catch (const std::exception& e) {
    session->error = e.what();
    return RYDOPT_ERROR_NUMERIC;
  }
}

}  // namespace

extern "C" {

rydopt_session* rydopt_session_new(void) { return new (std::nothrow) rydopt_session(); }

void rydopt_session_free(rydopt_session* session) { delete session; }

rydopt_status rydopt_load_config_file(rydopt_session* session, const char* path) {
  return guard(session, [&] {
    if (!path) throw rydopt::UsageError("null config path");
    session->config = rydopt::parse_config_file(path);
  });
}

rydopt_status rydopt_load_config_json(rydopt_session* session, const char* json_text) {
  return guard(session, [&] {
    if (!json_text) throw rydopt::UsageError("null config text");
    session->config = rydopt::parse_config_text(json_text);
  });
}

rydopt_status rydopt_set_option(rydopt_session* session, const char* key,
                                const char* value) {
  return guard(session, [&] {
    if (!key || !value) throw rydopt::UsageError("null option key or value");
    if (!session->config) throw rydopt::UsageError("load a config before setting options");
    rydopt::RunConfig& cfg = *session->config;
    const std::string k = key;
    if (k == "out") {
      cfg.output_dir = value;
    } else if (k == "workers") {
      const int w = std::atoi(value);
      if (w < 1) throw rydopt::ConfigError("workers must be >= 1");
      cfg.workers = w;
    } else if (k == "seed") {
      char* end = nullptr;
      const unsigned long long s = std::strtoull(value, &end, 10);
      if (!end || *end != '\0') throw rydopt::ConfigError("seed must be an integer");
      cfg.seed_ensemble = s;
      cfg.seed_basis = rydopt::mix_seed(s, 1);
      cfg.seed_measure = rydopt::mix_seed(s, 2);
    } else if (k == "budget") {
      const int b = std::atoi(value);
      if (b < 0) throw rydopt::ConfigError("budget must be >= 0");
      cfg.optimizer.budget_per_super = b;
    } else {
      throw rydopt::UsageError("unknown option '" + k + "'");
    }
  });
}

rydopt_status rydopt_run(rydopt_session* session, const char* command,
                         const char* pulse_csv) {
  return guard(session, [&] {
    if (!command) throw rydopt::UsageError("null command");
    if (!session->config) throw rydopt::UsageError("load a config before running");
    const nlohmann::json summary = rydopt::run_command(
        *session->config, command, pulse_csv ? std::string(pulse_csv) : std::string());
    session->summary = summary.dump(2);
  });
}

const char* rydopt_summary_json(const rydopt_session* session) {
  if (!session || session->summary.empty()) return nullptr;
  return session->summary.c_str();
}

const char* rydopt_last_error(const rydopt_session* session) {
  if (!session) return "";
  return session->error.c_str();
}

const char* rydopt_version(void) { return rydopt::kVersion; }

}  // extern "C"
