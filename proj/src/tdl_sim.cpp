#include "tdcstate/tdl_sim.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/text_parse.hpp"

namespace tdcstate {

DelayLineModel::DelayLineModel(std::vector<DelayElement> elements, std::uint64_t seed,
                               ClockConfig clock)
    : elements_(std::move(elements)), seed_(seed), clock_(clock) {
  clock_.validate();
  if (elements_.empty()) throw ConfigError("delay line has no taps");
  if (elements_.size() % kTapsPerClb != 0)
    throw ConfigError("delay line has " + std::to_string(elements_.size()) +
                      " taps, not a multiple of " + std::to_string(kTapsPerClb));
  switch_times_.reserve(elements_.size());
  std::int64_t cumulative = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (e.tap_delay.value < 0)
      throw ConfigError("tap " + std::to_string(i) + " has a negative delay");
    switch_times_.push_back(cumulative - e.sampler_skew.value);
    cumulative += e.tap_delay.value;
  }
  total_delay_ = TimeFs{cumulative};
  if (total_delay_ < clock_.half_period)
    throw ConfigError("line shorter than " + std::to_string(clock_.half_period.value) +
                      " fs: cumulative delay " + std::to_string(cumulative) + " fs, short by " +
                      std::to_string(clock_.half_period.value - cumulative) + " fs");
}

DelayLineModel build_model(std::size_t n_clb, TimeFs nominal_tap_delay, TimeFs mismatch_sigma,
                           TimeFs skew_sigma, std::uint64_t seed, ClockConfig clock) {
  if (n_clb < 1) throw ConfigError("n_clb must be at least 1");
  if (nominal_tap_delay.value <= 0) throw ConfigError("nominal tap delay must be positive");
  if (mismatch_sigma.value < 0 || skew_sigma.value < 0)
    throw ConfigError("mismatch and skew sigmas must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> delay_dist(static_cast<double>(nominal_tap_delay.value),
                                              static_cast<double>(mismatch_sigma.value));
  std::normal_distribution<double> skew_dist(0.0, static_cast<double>(skew_sigma.value));

  std::vector<DelayElement> elements(n_clb * kTapsPerClb);
  for (auto& e : elements) {
    // Draw both values even when a sigma is zero so the stream layout does
    // not depend on which sigmas are set.
    const double d = delay_dist(rng);
    const double s = skew_dist(rng);
    e.tap_delay = mismatch_sigma.value == 0
                      ? nominal_tap_delay
                      : TimeFs{std::max<std::int64_t>(0, std::llround(d))};
    e.sampler_skew = skew_sigma.value == 0 ? TimeFs{0} : TimeFs{std::llround(s)};
  }
  return DelayLineModel(std::move(elements), seed, clock);
}

RawState propagate(const DelayLineModel& model, TimeFs arrival_phase) {
  const auto& clock = model.clock();
  if (arrival_phase.value < 0 || arrival_phase >= clock.start_period)
    throw ContractViolation("arrival phase " + format_ps(arrival_phase) +
                            " ps outside [0, start_period)");
  const bool inverted = arrival_phase >= clock.half_period;
  const std::int64_t since_edge =
      inverted ? (arrival_phase - clock.half_period).value : arrival_phase.value;

  const auto switch_times = model.switch_times_fs();
  RawState state(switch_times.size(), inverted);
  for (std::size_t i = 0; i < switch_times.size(); ++i) {
    if (switch_times[i] <= since_edge) state.set(i);
  }
  return state;
}

EventGenerator::EventGenerator(const EventSource& source, const ClockConfig& clock)
    : source_(source),
      clock_(clock),
      span_(source.span.value > 0 ? source.span : clock.start_period),
      rng_(source.seed) {
  clock_.validate();
  if (source_.interval.value <= 0) throw ConfigError("event interval must be positive");
  if (source_.kind == EventKind::fixed_phase_sweep && source_.step.value <= 0)
    throw ConfigError("sweep step must be positive");
}

Event EventGenerator::next() {
  Event ev;
  const auto mod = [](std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; };
  switch (source_.kind) {
    case EventKind::uniform_phase: {
      std::uniform_int_distribution<std::int64_t> dist(0, span_.value - 1);
      ev.sim_time = TimeFs{static_cast<std::int64_t>(index_) * source_.interval.value};
      ev.offset = TimeFs{dist(rng_)};
      break;
    }
    case EventKind::exponential_arrivals: {
      std::exponential_distribution<double> dist(1.0 / static_cast<double>(source_.interval.value));
      now_ += TimeFs{std::llround(dist(rng_))};
      ev.sim_time = now_;
      ev.offset = TimeFs{mod(now_.value, span_.value)};
      break;
    }
    case EventKind::fixed_phase_sweep: {
      ev.sim_time = TimeFs{static_cast<std::int64_t>(index_) * source_.interval.value};
      ev.offset = TimeFs{mod(static_cast<std::int64_t>(index_) * source_.step.value, span_.value)};
      break;
    }
  }
  ev.phase = TimeFs{mod(ev.offset.value, clock_.start_period.value)};
  ++index_;
  return ev;
}

std::vector<SampledEvent> sample_events(const DelayLineModel& model, const EventSource& source,
                                        std::size_t count) {
  EventGenerator gen(source, model.clock());
  std::vector<SampledEvent> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Event ev = gen.next();
    out.push_back({ev, propagate(model, ev.phase)});
  }
  return out;
}

void write_tap_file(std::ostream& out, const DelayLineModel& model,
                    const std::vector<std::string>& provenance) {
  out << "# tdl tap model\n";
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "# n_clb=" << model.n_clb() << " n_taps=" << model.n_taps() << " seed=" << model.seed()
      << '\n';
  out << "index,tap_delay_fs,sampler_skew_fs\n";
  const auto elements = model.elements();
  for (std::size_t i = 0; i < elements.size(); ++i)
    out << i << ',' << elements[i].tap_delay.value << ',' << elements[i].sampler_skew.value << '\n';
}

DelayLineModel read_tap_file(std::istream& in, ClockConfig clock) {
  std::vector<DelayElement> elements;
  std::uint64_t seed = 0;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      // Only the model line carries the seed; provenance lines may mention
      // other seeds.
      if (line.rfind("# n_clb=", 0) == 0)
        if (auto pos = line.find(" seed="); pos != std::string::npos)
          seed = parse_integer<std::uint64_t>(
              std::string_view(line).substr(pos + 6), "tap file seed");
      continue;
    }
    if (!header_seen) {
      if (line != "index,tap_delay_fs,sampler_skew_fs")
        throw InputError("tap file line " + std::to_string(line_no) + ": expected header");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    long long index, delay, skew;
    char c1, c2;
    if (!(fields >> index >> c1 >> delay >> c2 >> skew) || c1 != ',' || c2 != ',')
      throw InputError("tap file line " + std::to_string(line_no) + ": malformed record");
    if (index != static_cast<long long>(elements.size()))
      throw InputError("tap file line " + std::to_string(line_no) + ": index out of order");
    elements.push_back({TimeFs{delay}, TimeFs{skew}});
  }
  if (!header_seen) throw InputError("tap file has no header");
  return DelayLineModel(std::move(elements), seed, clock);
}

}  // namespace tdcstate
