#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdcstate/timebase.hpp"

namespace tdcstate {

// Contiguous grouping of Seq-ordered states. Group g holds states
// [boundaries[g], boundaries[g+1]); boundaries has n_groups()+1 entries and
// runs from 0 to the state count.
struct BinConfiguration {
  std::vector<std::size_t> boundaries;
  std::vector<TimeFs> group_widths;
  TimeFs covered_range{0};
  TimeFs lsb{0};  // covered_range / N, rounded half-even
  double rse = 0.0;
  TimeFs ref_used{0};

  std::size_t n_groups() const { return group_widths.size(); }
  std::size_t n_states() const { return boundaries.empty() ? 0 : boundaries.back(); }
  // Group that holds state `index`.
  std::size_t group_of(std::size_t index) const;
};

// Throws InputError unless boundaries describe a partition of n_states into
// non-empty contiguous groups.
void validate_boundaries(std::span<const std::size_t> boundaries, std::size_t n_states);

// Coarse pass: grow the current group while adding the next state does not
// move its width further from ref than it already is.
std::vector<std::size_t> first_pass(std::span<const TimeFs> widths, TimeFs ref);

struct SecondPassStats {
  std::size_t moves = 0;
  std::size_t sweeps = 0;
};

// Fine pass: for each interior boundary, left to right, hand the first state
// of the right group to the left group when that narrows the difference
// between the two group sums. Moves that would empty the right group are
// skipped. With fixed_point set, passes repeat until nothing moves.
std::vector<std::size_t> second_pass(std::span<const TimeFs> widths,
                                     std::span<const std::size_t> boundaries,
                                     bool fixed_point = false, SecondPassStats* stats = nullptr);

// Sample standard deviation over mean. Needs at least two widths.
double rse(std::span<const TimeFs> group_widths);

std::vector<TimeFs> group_widths(std::span<const TimeFs> widths,
                                 std::span<const std::size_t> boundaries);

// Builds the configuration record for a given partition. A single group has
// rse 0.
BinConfiguration make_configuration(std::span<const TimeFs> widths,
                                    std::vector<std::size_t> boundaries, TimeFs ref);

struct ConfigureOptions {
  bool second_pass_fixed_point = false;
};

// Both passes at one reference width.
BinConfiguration configure(std::span<const TimeFs> widths, TimeFs ref,
                           const ConfigureOptions& options = {});

struct SweepPoint {
  TimeFs ref;
  std::size_t config;  // index into SweepResult::configs
};

struct SweepResult {
  std::vector<SweepPoint> points;          // one per ref, ascending
  std::vector<BinConfiguration> configs;   // distinct partitions, first-seen order
  std::map<std::size_t, std::size_t> best_by_n;  // N -> config with least rse

  const BinConfiguration& config_at(std::size_t point) const { return configs[points[point].config]; }
};

// Runs configure() for ref = ref_min, ref_min + step, ... <= ref_max. Ties in
// rse for the same N keep the configuration reached at the smaller ref.
SweepResult sweep(std::span<const TimeFs> widths, TimeFs ref_min, TimeFs ref_max, TimeFs ref_step,
                  const ConfigureOptions& options = {});

// Least-rse configuration whose lsb is closest to `target` (ties go to the
// finer lsb).
const BinConfiguration& select_for_lsb(const SweepResult& result, TimeFs target);

// Least achievable rse for every group count N in [1, n_states], by dynamic
// programming over contiguous partitions (for a fixed N and total, rse only
// depends on the sum of squared group widths). Used for reporting how far the
// two-pass result is from optimal; O(N * n^2).
std::map<std::size_t, double> optimal_rse_by_n(std::span<const TimeFs> widths);

struct PredictedLinearity {
  std::vector<double> dnl;
  std::vector<double> inl;
};

// dnl_i = (W_i - mean)/mean, inl = running sum; computed from integer
// numerators so sum(dnl) and the last inl are exactly zero.
PredictedLinearity predict_linearity(const BinConfiguration& config);

// Configuration table: '#' provenance lines, a
// "label,ref_fs,n,lsb_fs,rse,boundaries,group_widths_fs" header, then one row
// per configuration with space-separated lists.
void write_configurations(std::ostream& out,
                          const std::vector<std::pair<std::string, const BinConfiguration*>>& rows,
                          const std::vector<std::string>& provenance = {});
std::vector<std::pair<std::string, BinConfiguration>> read_configurations(std::istream& in);

}  // namespace tdcstate
