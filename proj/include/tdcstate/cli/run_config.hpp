#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tdcstate/timebase.hpp"

namespace tdcstate::cli {

struct ModelSpec {
  std::string tap_file;  // empty: generate from the parameters below
  std::size_t n_clb = 4;
  TimeFs nominal_tap{14'000};
  TimeFs mismatch_sigma{3'000};
  TimeFs skew_sigma{2'000};
  std::uint64_t seed = 1;
};

// Everything a pipeline run depends on. Stage RNG streams are derived from
// master_seed; the model seed is kept separate so one line model can be
// measured under several master seeds.
struct RunConfig {
  ClockConfig clock;
  ModelSpec model;
  std::uint64_t master_seed = 1;

  std::uint64_t collect_events = 10'000'000;
  std::uint64_t discovery_block = 100'000;

  TimeFs ref_min{2'000};
  TimeFs ref_max{100'000};
  TimeFs ref_step{5};
  bool second_pass_fixed_point = false;
  std::size_t oracle_max_states = 12;
  std::vector<TimeFs> lsb_targets{TimeFs{5'000},  TimeFs{10'040}, TimeFs{21'650},
                                  TimeFs{43'870}, TimeFs{64'110}, TimeFs{87'730}};

  std::uint64_t density_events = 10'000'000;
  std::uint64_t events_per_window = 1'000'000;
  TimeFs density_event_interval{100'000'000};
  TimeFs short_range{1'667'000};
  TimeFs long_range{8'000'000};
  // Used when long_range would need more than the histogram's 1200 bins.
  TimeFs long_range_fallback{5'000'000};

  TimeFs interval_step{14'800};
  TimeFs interval_range{1'667'000};
  std::uint64_t interval_events_per_step = 1000;
  TimeFs interval_jitter{0};
  TimeFs interval_event_interval{100'000'000};

  bool nearest_seq_fallback = false;

  // Not part of the hash: the same config written to two directories must
  // produce identical trees.
  std::filesystem::path output_dir = "out";
  std::filesystem::path base_dir;  // relative tap_file paths resolve here

  std::filesystem::path tap_file_path() const;
  // Throws ConfigError on inconsistent values.
  void validate() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown or repeated keys are
// errors, so a typo cannot silently fall back to a default.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

// Every key with its effective value, in a fixed order. Parsing this text
// gives back the same configuration.
std::string canonical_text(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);
std::string hex64(std::uint64_t v);

// "5,10.04, 21.65" -> picosecond list.
std::vector<TimeFs> parse_lsb_list(std::string_view text);

// File-name label of an lsb target, e.g. "lsb_5.000".
std::string target_label(TimeFs target);

}  // namespace tdcstate::cli
