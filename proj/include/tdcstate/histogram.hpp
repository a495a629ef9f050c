#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tdcstate/timebase.hpp"

namespace tdcstate {

inline constexpr std::size_t kMaxHistogramBins = 1200;
inline constexpr std::uint16_t kBinCounterMax = 65535;

// Fixed-size histogram of saturating 16-bit counters.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::size_t n_bins, std::uint64_t window_id = 0);

  std::size_t n_bins() const { return bins_.size(); }
  std::uint64_t window_id() const { return window_id_; }
  std::span<const std::uint16_t> bins() const { return bins_; }
  std::uint16_t operator[](std::size_t i) const { return bins_[i]; }
  std::uint64_t total() const;

  // False, and no change, when the counter is already at kBinCounterMax.
  bool increment(std::size_t bin);
  void reset(std::uint64_t window_id);

  // Builds a histogram directly from counts (clamped); for analysis of
  // externally captured data.
  static Histogram from_counts(std::span<const std::uint64_t> counts, std::uint64_t window_id = 0);

 private:
  std::vector<std::uint16_t> bins_;
  std::uint64_t window_id_ = 0;
};

// Coarse code: Start cycles since the Sync.
struct FullTimestamp {
  std::int64_t coarse = 0;
  std::size_t fine = 0;
};

// Two Start-cycle counters running a quarter cycle before and after the
// Start edge, so neither changes near the fine-code wrap.
//   high_scale steps at k*P - P/4 (k >= 1)
//   low_scale  steps at k*P + P/4 (k >= 0)
struct CoarseCounters {
  std::int64_t low_scale = 0;
  std::int64_t high_scale = 0;
};

CoarseCounters sample_coarse_counters(TimeFs since_sync, const ClockConfig& clock);

// First half of the fine range reads high_scale; second half reads
// low_scale, which has already stepped once in that cycle.
FullTimestamp resolve_timestamp(const CoarseCounters& counters, std::size_t fine,
                                std::size_t n_fine_groups);

// coarse * start_period + fine * lsb + lsb / 2 (bin centre).
TimeFs reconstruct_time(const FullTimestamp& ts, TimeFs start_period, TimeFs lsb);

struct HistogramSetup {
  std::size_t n_fine_groups = 0;
  TimeFs lsb{0};
  TimeFs range{0};  // measurement range; one Start period for the fine code alone
  TimeFs integration_time{0};
  TimeFs start_period{1'667'000};
};

// ceil(range * n_fine_groups / start_period), i.e. range over the exact
// group width. Throws ConfigError above kMaxHistogramBins.
std::size_t bins_for_range(TimeFs range, std::size_t n_fine_groups, TimeFs start_period);

enum class RecordOutcome { accepted, saturated, out_of_range };

// Two interleaved histograms: one accumulates the current integration window
// [start, start + T) while the other holds the previous window for readout.
// Events at exactly start + T belong to the next window.
class HistogramPair {
 public:
  explicit HistogramPair(const HistogramSetup& setup);

  // Bin = coarse * n_fine_groups + fine. Throws ContractViolation when
  // sim_time is outside the current window.
  RecordOutcome record(const FullTimestamp& ts, TimeFs sim_time);

  // Must be called at exactly the current window end. Returns the window just
  // closed; the other histogram, already zeroed, takes over.
  Histogram swap_and_read(TimeFs sim_time);

  // swap_and_read at every boundary <= sim_time.
  std::vector<Histogram> advance_to(TimeFs sim_time);

  const Histogram& active() const { return active_is_a_ ? hist_a_ : hist_b_; }
  bool active_is_a() const { return active_is_a_; }
  TimeFs window_start() const { return window_start_; }
  TimeFs window_end() const { return window_start_ + setup_.integration_time; }
  std::size_t n_bins() const { return hist_a_.n_bins(); }
  const HistogramSetup& setup() const { return setup_; }

  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t saturated() const { return saturated_; }
  std::uint64_t out_of_range() const { return out_of_range_; }

 private:
  Histogram& active_mut() { return active_is_a_ ? hist_a_ : hist_b_; }

  HistogramSetup setup_;
  Histogram hist_a_;
  Histogram hist_b_;
  bool active_is_a_ = true;
  std::uint64_t window_id_ = 0;
  TimeFs window_start_{0};
  std::uint64_t accepted_ = 0;
  std::uint64_t saturated_ = 0;
  std::uint64_t out_of_range_ = 0;
};

// Snapshot CSV: "window_id,integration_time_fs,lsb_fs,n_bins" and its value
// row, then "bin_index,count" rows. Leading '#' lines carry provenance.
void write_snapshot_csv(std::ostream& out, const Histogram& snapshot, TimeFs integration_time,
                        TimeFs lsb, const std::vector<std::string>& provenance = {});
Histogram read_snapshot_csv(std::istream& in);

}  // namespace tdcstate
