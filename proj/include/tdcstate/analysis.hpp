#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdcstate/bin_config.hpp"
#include "tdcstate/encoder.hpp"
#include "tdcstate/histogram.hpp"
#include "tdcstate/state_catalog.hpp"
#include "tdcstate/tdl_sim.hpp"

namespace tdcstate {

// ---------------------------------------------------------------------------
// Code density test

struct LinearityReport {
  std::vector<std::uint64_t> counts;
  std::vector<double> dnl;  // LSB
  std::vector<double> inl;  // LSB
  double empty_bin_fraction = 0.0;
  std::uint64_t n_events = 0;
  TimeFs lsb{0};
  std::vector<std::string> warnings;

  std::size_t n_groups() const { return counts.size(); }
};

// DNL_i = (C_i - C_avg) / C_avg, INL_i = sum_{j<=i} DNL_j. Both come from
// exact integer numerators, so sum(DNL) and INL_last are zero up to the final
// division. Throws InputError on zero events.
LinearityReport code_density(std::span<const std::uint64_t> counts, TimeFs lsb);

// Sums the snapshots bin by bin. Saturated bins produce a warning, since
// their counts are biased low. n_groups must match the snapshot size.
LinearityReport code_density(std::span<const Histogram> snapshots, std::size_t n_groups,
                             TimeFs lsb);

struct RseComparison {
  double predicted = 0.0;
  double measured = 0.0;
  double deviation = 0.0;   // |measured - predicted| / predicted
  double stat_error = 0.0;  // 1-sigma multinomial error of `deviation`
};

// Measured group widths are taken proportional to the counts; rse is scale
// free, so the counts go straight into the rse formula. Throws InputError if
// the group counts differ.
RseComparison compare_rse(const BinConfiguration& predicted, const LinearityReport& measured);

// ---------------------------------------------------------------------------
// Measurement pipeline: delay line -> encoder -> full timestamp

struct MeasureStats {
  std::uint64_t missing_codes = 0;
  std::uint64_t substituted = 0;
};

class TdcPipeline {
 public:
  TdcPipeline(const DelayLineModel& model, const StateEncoder& encoder,
              EncodeOptions options = {});

  // Timestamp for a Stop event `since_sync` after the Sync, or nullopt on a
  // missing code. Fallback substitutions are counted too.
  std::optional<FullTimestamp> measure(TimeFs since_sync, MeasureStats& stats) const;

  const DelayLineModel& model() const { return *model_; }
  const StateEncoder& encoder() const { return *encoder_; }
  const ClockConfig& clock() const { return model_->clock(); }

 private:
  const DelayLineModel* model_;
  const StateEncoder* encoder_;
  EncodeOptions options_;
};

struct DensityRunOptions {
  std::uint64_t events = 0;
  TimeFs range{0};  // 0 -> one Start period
  std::uint64_t events_per_window = 1'000'000;
  TimeFs event_interval{100'000'000};
  std::uint64_t seed = 0;
};

struct DensityRun {
  std::vector<Histogram> snapshots;
  HistogramSetup setup;
  MeasureStats stats;
  std::uint64_t accepted = 0;
  std::uint64_t saturated = 0;
  std::uint64_t out_of_range = 0;
};

// Uniform Stop offsets over whole Start cycles covering the range, recorded
// through an interleaved histogram pair. Offsets past the last bin land in
// the out-of-range counter, so every bin is fully covered.
DensityRun run_code_density(const TdcPipeline& pipeline, const DensityRunOptions& options);

// ---------------------------------------------------------------------------
// Time interval sweep

struct SweepOptions {
  TimeFs step{14'800};
  TimeFs range{0};  // 0 -> one Start period
  std::uint64_t events_per_step = 1000;
  TimeFs jitter_sigma{0};
  TimeFs event_interval{100'000'000};
  std::uint64_t seed = 0;
};

struct SweepStep {
  TimeFs input;
  std::optional<std::size_t> output;  // histogram mode; nullopt for a blank histogram
  double residual = 0.0;               // LSB; 0 for blanks
  std::uint64_t events = 0;
  std::size_t populated_bins = 0;
  std::size_t half_max_bins = 0;  // bins with count >= mode / 2
};

struct SweepReport {
  std::vector<SweepStep> steps;
  double slope = 0.0;  // bins per fs
  double intercept = 0.0;
  std::vector<std::size_t> blank_histograms;
  std::vector<std::size_t> order_violations;  // steps whose output drops below the previous one
  MeasureStats stats;
  TimeFs lsb{0};

  std::vector<double> residuals() const;
};

// Index of the largest count, lowest index on ties; nullopt when all zero.
std::optional<std::size_t> histogram_mode(std::span<const std::uint16_t> bins);

// Ordinary least squares y = slope * x + intercept.
std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y);

// Delays 0, step, 2*step, ... < range; each step is one integration window
// holding events_per_step events at that delay plus Gaussian jitter. Blank
// steps are listed and left out of the fit.
SweepReport time_interval_sweep(const TdcPipeline& pipeline, const SweepOptions& options);

// Exact (min, max) of the non-blank residuals. Throws InputError if none.
std::pair<double, double> residual_envelope(const SweepReport& report);

// Fraction of non-blank steps whose half-maximum width is at most two bins.
double fraction_within_two_bins(const SweepReport& report);

// ---------------------------------------------------------------------------
// Collection

struct CollectionResult {
  StateCatalog catalog;  // widths estimated from the same counts
  std::vector<std::uint64_t> discovery_curve;
};

// Step 1 of the workflow: uniform events through the bare line, counted into
// a catalog covering one Start period.
CollectionResult collect_states(const DelayLineModel& model, std::uint64_t events,
                                std::uint64_t seed, std::uint64_t discovery_block = 100'000);

}  // namespace tdcstate
