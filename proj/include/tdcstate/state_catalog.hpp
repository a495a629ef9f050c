#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdcstate/raw_state.hpp"
#include "tdcstate/timebase.hpp"

namespace tdcstate {

// Ordering key of a state: the number of taps that latched the edge. States
// from the falling-edge half are offset by n_taps + 1 so that every
// second-half state sorts after every first-half state.
std::int64_t seq_value(const RawState& state);

struct StateRecord {
  RawState state;
  std::int64_t seq = 0;
  std::uint64_t count = 0;
  TimeFs width{0};
};

// Seq-ordered list of every distinct state seen during collection.
class StateCatalog {
 public:
  StateCatalog() = default;
  // Sorts the records; throws InputError on duplicate states or mixed tap
  // counts.
  StateCatalog(std::vector<StateRecord> records, std::uint64_t total_events, TimeFs covered_range);

  std::span<const StateRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t n_taps() const { return records_.empty() ? 0 : records_.front().state.size(); }
  std::uint64_t total_events() const { return total_events_; }
  TimeFs covered_range() const { return covered_range_; }

  bool has_widths() const;
  std::vector<TimeFs> widths() const;
  std::vector<std::uint64_t> counts() const;

  // Records whose seq is shared with at least one other record.
  std::size_t tie_count() const;

  std::optional<std::size_t> find(const RawState& state) const;

 private:
  std::vector<StateRecord> records_;
  std::unordered_map<RawState, std::size_t, RawStateHash> index_;
  std::uint64_t total_events_ = 0;
  TimeFs covered_range_{0};
};

// Strict weak order used by the catalog: seq, then bits (most significant
// tap first).
bool catalog_less(const StateRecord& a, const StateRecord& b);

// Streaming state counter for collection runs too large to keep in memory.
// Also tracks how many new states appear in each block of events.
class StateCounter {
 public:
  explicit StateCounter(std::uint64_t discovery_block = 100'000);

  void add(const RawState& state);
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }

  // New states first seen in each complete or partial block.
  std::vector<std::uint64_t> discovery_curve() const;

  // Throws InputError when nothing was added or covered_range <= 0.
  StateCatalog finish(TimeFs covered_range) const;

 private:
  std::unordered_map<RawState, std::uint64_t, RawStateHash> counts_;
  std::vector<std::uint64_t> discovery_;
  std::uint64_t block_;
  std::uint64_t total_ = 0;
};

StateCatalog build_catalog(std::span<const RawState> samples, TimeFs covered_range);

// width_i = covered_range * count_i / total, apportioned by largest remainder
// so the widths add up to covered_range exactly. Ties in the remainder go to
// the lower index.
StateCatalog estimate_widths(const StateCatalog& catalog, std::span<const std::uint64_t> counts);

// Same apportionment as a free function.
std::vector<std::int64_t> apportion(std::int64_t total, std::span<const std::uint64_t> weights);

// Catalog file: '#' provenance lines (covered_range_fs, total_events, n_taps
// and caller lines), a "seq,polarity,hex,count,width_fs" header, then one
// record per line in catalog order.
void write_catalog(std::ostream& out, const StateCatalog& catalog,
                   const std::vector<std::string>& provenance = {});
StateCatalog read_catalog(std::istream& in);

}  // namespace tdcstate
