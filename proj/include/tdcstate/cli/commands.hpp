#pragma once

#include <iosfwd>

#include "tdcstate/cli/run_config.hpp"

namespace tdcstate::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Stage outputs, relative to RunConfig::output_dir. Per-target files are
// "<prefix><label><suffix>" with the label from target_label().
namespace files {
inline constexpr const char* model = "model.txt";
inline constexpr const char* catalog = "catalog.txt";
inline constexpr const char* discovery = "discovery.csv";
inline constexpr const char* configurations = "configurations.txt";
inline constexpr const char* rse_sweep = "rse_sweep.csv";
inline constexpr const char* rse_per_n = "rse_per_n.csv";
inline constexpr const char* selected = "selected.txt";
inline constexpr const char* density_summary = "density_summary.json";
inline constexpr const char* interval_summary = "interval_summary.json";
inline constexpr const char* summary = "summary.json";
}  // namespace files

// Each stage reads what the earlier stages wrote into output_dir and throws
// ConfigError / InputError with a readable message when something is off.
// Progress notes go to `log`.

// Builds or loads the line model, collects states and writes the model,
// catalog and discovery curve.
void cmd_collect(const RunConfig& config, std::ostream& log);

// Sweeps the reference width, writes every distinct configuration, the
// rse tables and the chosen configuration and encoder for each lsb target.
void cmd_configure(const RunConfig& config, std::ostream& log);

// Code density runs over the short and long ranges for each target.
void cmd_density(const RunConfig& config, std::ostream& log);

// Fixed-step delay sweeps for each target.
void cmd_interval(const RunConfig& config, std::ostream& log);

// Merges the stage outputs into summary.json and plot-ready CSVs. Missing
// inputs are reported together in one error.
void cmd_report(const RunConfig& config, std::ostream& log);

}  // namespace tdcstate::cli
