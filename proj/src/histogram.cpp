#include "tdcstate/histogram.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tdcstate/error.hpp"

namespace tdcstate {

Histogram::Histogram(std::size_t n_bins, std::uint64_t window_id)
    : bins_(n_bins, 0), window_id_(window_id) {
  if (n_bins == 0 || n_bins > kMaxHistogramBins)
    throw ConfigError("histogram size " + std::to_string(n_bins) + " outside 1.." +
                      std::to_string(kMaxHistogramBins));
}

std::uint64_t Histogram::total() const {
  return std::accumulate(bins_.begin(), bins_.end(), std::uint64_t{0});
}

bool Histogram::increment(std::size_t bin) {
  auto& c = bins_.at(bin);
  if (c == kBinCounterMax) return false;
  ++c;
  return true;
}

void Histogram::reset(std::uint64_t window_id) {
  std::fill(bins_.begin(), bins_.end(), std::uint16_t{0});
  window_id_ = window_id;
}

Histogram Histogram::from_counts(std::span<const std::uint64_t> counts, std::uint64_t window_id) {
  Histogram h(counts.size(), window_id);
  for (std::size_t i = 0; i < counts.size(); ++i)
    h.bins_[i] = static_cast<std::uint16_t>(std::min<std::uint64_t>(counts[i], kBinCounterMax));
  return h;
}

CoarseCounters sample_coarse_counters(TimeFs since_sync, const ClockConfig& clock) {
  if (since_sync.value < 0) throw ContractViolation("coarse counters sampled before Sync");
  const std::int64_t p = clock.start_period.value;
  const std::int64_t quarter = p / 4;
  CoarseCounters c;
  c.high_scale = (since_sync.value + quarter) / p;
  c.low_scale = since_sync.value < quarter ? 0 : (since_sync.value - quarter) / p + 1;
  return c;
}

FullTimestamp resolve_timestamp(const CoarseCounters& counters, std::size_t fine,
                                std::size_t n_fine_groups) {
  if (2 * fine < n_fine_groups) return {counters.high_scale, fine};
  return {counters.low_scale - 1, fine};
}

TimeFs reconstruct_time(const FullTimestamp& ts, TimeFs start_period, TimeFs lsb) {
  return start_period * ts.coarse + lsb * static_cast<std::int64_t>(ts.fine) +
         TimeFs{lsb.value / 2};
}

std::size_t bins_for_range(TimeFs range, std::size_t n_fine_groups, TimeFs start_period) {
  if (range.value <= 0 || n_fine_groups == 0 || start_period.value <= 0)
    throw ConfigError("range, group count and start period must be positive");
  const auto num = static_cast<unsigned __int128>(range.value) * n_fine_groups;
  const auto den = static_cast<unsigned __int128>(start_period.value);
  const auto n = static_cast<std::uint64_t>((num + den - 1) / den);
  if (n > kMaxHistogramBins)
    throw ConfigError("measurement range " + format_ps(range) + " ps with " +
                      std::to_string(n_fine_groups) + " groups per cycle needs " +
                      std::to_string(n) + " bins, more than " + std::to_string(kMaxHistogramBins));
  return static_cast<std::size_t>(n);
}

HistogramPair::HistogramPair(const HistogramSetup& setup) : setup_(setup) {
  if (setup_.n_fine_groups == 0) throw ConfigError("histogram needs at least one fine group");
  if (setup_.integration_time.value <= 0) throw ConfigError("integration time must be positive");
  const std::size_t n = bins_for_range(setup_.range, setup_.n_fine_groups, setup_.start_period);
  hist_a_ = Histogram(n, 0);
  hist_b_ = Histogram(n, 1);
}

RecordOutcome HistogramPair::record(const FullTimestamp& ts, TimeFs sim_time) {
  if (sim_time < window_start_ || sim_time >= window_end())
    throw ContractViolation("event at " + format_ps(sim_time) + " ps outside window [" +
                            format_ps(window_start_) + ", " + format_ps(window_end()) + ") ps");
  if (ts.coarse < 0 || ts.fine >= setup_.n_fine_groups) {
    ++out_of_range_;
    return RecordOutcome::out_of_range;
  }
  const auto bin = static_cast<std::uint64_t>(ts.coarse) * setup_.n_fine_groups + ts.fine;
  if (bin >= n_bins()) {
    ++out_of_range_;
    return RecordOutcome::out_of_range;
  }
  if (!active_mut().increment(static_cast<std::size_t>(bin))) {
    ++saturated_;
    return RecordOutcome::saturated;
  }
  ++accepted_;
  return RecordOutcome::accepted;
}

Histogram HistogramPair::swap_and_read(TimeFs sim_time) {
  if (sim_time != window_end())
    throw ContractViolation("swap at " + format_ps(sim_time) + " ps is not the window boundary " +
                            format_ps(window_end()) + " ps");
  Histogram& closing = active_mut();
  active_is_a_ = !active_is_a_;
  ++window_id_;
  active_mut().reset(window_id_);
  window_start_ = sim_time;
  Histogram snapshot = closing;
  closing.reset(window_id_ + 1);
  return snapshot;
}

std::vector<Histogram> HistogramPair::advance_to(TimeFs sim_time) {
  std::vector<Histogram> out;
  while (window_end() <= sim_time) out.push_back(swap_and_read(window_end()));
  return out;
}

void write_snapshot_csv(std::ostream& out, const Histogram& snapshot, TimeFs integration_time,
                        TimeFs lsb, const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "window_id,integration_time_fs,lsb_fs,n_bins\n";
  out << snapshot.window_id() << ',' << integration_time.value << ',' << lsb.value << ','
      << snapshot.n_bins() << '\n';
  out << "bin_index,count\n";
  for (std::size_t i = 0; i < snapshot.n_bins(); ++i) out << i << ',' << snapshot[i] << '\n';
}

Histogram read_snapshot_csv(std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.front() != '#') return true;
    }
    return false;
  };
  if (!next_line() || line != "window_id,integration_time_fs,lsb_fs,n_bins")
    throw InputError("snapshot: expected window header");
  if (!next_line()) throw InputError("snapshot: missing window values");
  std::uint64_t window = 0;
  long long integration = 0, lsb = 0;
  std::size_t n_bins = 0;
  char c1, c2, c3;
  std::istringstream values(line);
  if (!(values >> window >> c1 >> integration >> c2 >> lsb >> c3 >> n_bins))
    throw InputError("snapshot: malformed window values");
  if (!next_line() || line != "bin_index,count") throw InputError("snapshot: expected bin header");
  std::vector<std::uint64_t> counts(n_bins, 0);
  std::size_t rows = 0;
  while (next_line()) {
    std::istringstream row(line);
    std::size_t index;
    std::uint64_t count;
    char comma;
    if (!(row >> index >> comma >> count) || index >= n_bins || count > kBinCounterMax)
      throw InputError("snapshot: bad bin row '" + line + "'");
    counts[index] = count;
    ++rows;
  }
  if (rows != n_bins) throw InputError("snapshot: expected " + std::to_string(n_bins) + " rows");
  return Histogram::from_counts(counts, window);
}

}  // namespace tdcstate
