#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tdcstate/raw_state.hpp"
#include "tdcstate/timebase.hpp"

namespace tdcstate {

inline constexpr std::size_t kTapsPerClb = 16;

// One tap of the carry chain.
//
// tap_delay is the chain delay the edge spends in this element before it
// reaches the next tap. sampler_skew is the effective offset of this tap's
// sampling instant: the sampler clock route minus the tap-to-flip-flop data
// route, so route mismatch on either side lands here.
struct DelayElement {
  TimeFs tap_delay;
  TimeFs sampler_skew;

  bool operator==(const DelayElement&) const = default;
};

// Immutable description of the simulated delay line.
class DelayLineModel {
 public:
  // Throws ConfigError if the elements are empty, not a whole number of
  // CLBs, have a negative tap delay, or do not cover clock.half_period.
  DelayLineModel(std::vector<DelayElement> elements, std::uint64_t seed = 0,
                 ClockConfig clock = {});

  std::span<const DelayElement> elements() const { return elements_; }
  std::size_t n_taps() const { return elements_.size(); }
  std::size_t n_clb() const { return elements_.size() / kTapsPerClb; }
  std::uint64_t seed() const { return seed_; }
  const ClockConfig& clock() const { return clock_; }

  // Sum of all tap delays.
  TimeFs total_delay() const { return total_delay_; }

  // Time after the edge launch at which tap i latches the new level:
  // (sum of tap delays before i) - sampler_skew_i.
  std::span<const std::int64_t> switch_times_fs() const { return switch_times_; }

  bool operator==(const DelayLineModel& o) const {
    return elements_ == o.elements_ && seed_ == o.seed_;
  }

 private:
  std::vector<DelayElement> elements_;
  std::vector<std::int64_t> switch_times_;
  TimeFs total_delay_;
  std::uint64_t seed_ = 0;
  ClockConfig clock_;
};

// 16*n_clb taps; delays ~ N(nominal, mismatch_sigma) clamped at 0, skews
// ~ N(0, skew_sigma), both rounded to whole femtoseconds. Same seed, same
// model.
DelayLineModel build_model(std::size_t n_clb, TimeFs nominal_tap_delay, TimeFs mismatch_sigma,
                           TimeFs skew_sigma, std::uint64_t seed, ClockConfig clock = {});

// State latched when the Stop edge samples the line at `arrival_phase`
// within the Start cycle. Phases in the second half are measured from the
// falling edge and flagged inverted. Throws ContractViolation when the phase
// is outside [0, start_period).
RawState propagate(const DelayLineModel& model, TimeFs arrival_phase);

enum class EventKind { uniform_phase, exponential_arrivals, fixed_phase_sweep };

// Random or swept Stop events.
//
// Each event has a simulation time and an offset since the last Sync; the
// offset lies in [0, span) and its remainder modulo the Start period is the
// arrival phase. span defaults to one Start period.
//  - uniform_phase: offset uniform over [0, span); events `interval` apart.
//  - exponential_arrivals: inter-arrival ~ Exp(mean = interval); offset is the
//    simulation time modulo span.
//  - fixed_phase_sweep: offset = k * step modulo span; events `interval` apart.
struct EventSource {
  EventKind kind = EventKind::uniform_phase;
  TimeFs interval{100'000'000};
  TimeFs step{14'800};
  std::uint64_t seed = 0;
  TimeFs span{0};
};

struct Event {
  TimeFs sim_time;
  TimeFs offset;
  TimeFs phase;
};

class EventGenerator {
 public:
  EventGenerator(const EventSource& source, const ClockConfig& clock);
  Event next();

 private:
  EventSource source_;
  ClockConfig clock_;
  TimeFs span_;
  std::mt19937_64 rng_;
  std::uint64_t index_ = 0;
  TimeFs now_{0};
};

struct SampledEvent {
  Event event;
  RawState state;
};

// Draws `count` events from `source` and propagates each through `model`.
std::vector<SampledEvent> sample_events(const DelayLineModel& model, const EventSource& source,
                                        std::size_t count);

// Tap file: '#' comment lines, a "index,tap_delay_fs,sampler_skew_fs" header,
// then one record per tap in index order.
void write_tap_file(std::ostream& out, const DelayLineModel& model,
                    const std::vector<std::string>& provenance = {});
DelayLineModel read_tap_file(std::istream& in, ClockConfig clock = {});

}  // namespace tdcstate
