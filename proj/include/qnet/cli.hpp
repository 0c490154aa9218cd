#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qnet/types.hpp"

namespace qnet::cli {

/// Everything a `run` invocation needs. Flags and environment variables
/// override values loaded from a config file.
struct RunConfig {
    std::string demo;
    std::size_t ensemble = 250;    // teleportation ensemble per angle
    std::size_t bits = 10000;      // generated payload size for bitstream demos
    std::string message;           // overrides `bits` when nonempty
    std::uint64_t seed = 0;
    double length_km = 1.0;
    double alpha_db_per_km = 0.16;
    double signal_speed_km_per_s = kDefaultSignalSpeedKmPerS;
    double pulse_ns = kDefaultPulseNs;
    std::optional<std::size_t> capacity;
    Precision precision = Precision::Double;
    bool progress = false;
    std::string out;              // empty = table to stdout, no report file
    std::string format = "csv";   // csv | json
};

/// Parses the JSON config document; unknown keys are rejected.
RunConfig load_config_file(const std::string& path);

/// Executes the configured demo, writes the results table to config.out (or
/// stdout) and a JSON report to config.out + ".report.json".
void cmd_run(const RunConfig& config);

std::string demo_list_text();
std::string demo_list_json();

/// Entry point: `run <demo> [flags]` / `run --config file` / `list [--json]`.
/// Exit codes: 0 ok, 1 configuration error, 2 run failure.
int cli_main(int argc, char** argv);

}  // namespace qnet::cli
