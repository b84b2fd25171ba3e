#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rydopt/config.hpp"

namespace rydopt {

// Command drivers behind the CLI. Every command writes manifest.json and
// summary.json (plus its own CSV/JSON reports) into config.output_dir and
// returns the summary.
nlohmann::json run_spectrum(const RunConfig& config);
nlohmann::json run_crystal(const RunConfig& config);
nlohmann::json run_staircase(const RunConfig& config, const std::string& pulse_csv);
nlohmann::json run_ghz(const RunConfig& config);
nlohmann::json run_arbitrary(const RunConfig& config);
nlohmann::json run_simulate(const RunConfig& config, const std::string& pulse_csv);

nlohmann::json run_command(const RunConfig& config, const std::string& command,
                           const std::string& pulse_csv = {});

constexpr const char* kVersion = "0.1.0";

}  // namespace rydopt
