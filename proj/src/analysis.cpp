#include "tdcstate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tdcstate/error.hpp"
#include "tdcstate/seeding.hpp"

namespace tdcstate {

namespace {

double rse_of_counts(std::span<const std::uint64_t> counts) {
  const std::size_t n = counts.size();
  if (n < 2) throw ContractViolation("rse needs at least two groups");
  __int128 sum = 0, sum_sq = 0;
  for (auto c : counts) {
    sum += c;
    sum_sq += static_cast<__int128>(c) * c;
  }
  if (sum == 0) throw InputError("rse of an all-zero histogram");
  const __int128 scaled = static_cast<__int128>(n) * sum_sq - sum * sum;
  const long double var = static_cast<long double>(scaled) / (static_cast<long double>(n) * (n - 1));
  return static_cast<double>(std::sqrt(var) / (static_cast<long double>(sum) / n));
}

}  // namespace

LinearityReport code_density(std::span<const std::uint64_t> counts, TimeFs lsb) {
  if (counts.empty()) throw InputError("code density: no groups");
  LinearityReport r;
  r.counts.assign(counts.begin(), counts.end());
  r.lsb = lsb;
  const auto n = static_cast<__int128>(counts.size());
  __int128 total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw InputError("code density: zero events");
  r.n_events = static_cast<std::uint64_t>(total);

  const auto denom = static_cast<double>(total);
  r.dnl.reserve(counts.size());
  r.inl.reserve(counts.size());
  __int128 prefix = 0;
  std::size_t empty = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    prefix += counts[i];
    if (counts[i] == 0) ++empty;
    r.dnl.push_back(static_cast<double>(n * counts[i] - total) / denom);
    r.inl.push_back(static_cast<double>(n * prefix - static_cast<__int128>(i + 1) * total) / denom);
  }
  r.empty_bin_fraction = static_cast<double>(empty) / static_cast<double>(counts.size());
  return r;
}

LinearityReport code_density(std::span<const Histogram> snapshots, std::size_t n_groups,
                             TimeFs lsb) {
  if (snapshots.empty()) throw InputError("code density: no snapshots");
  std::vector<std::uint64_t> counts(n_groups, 0);
  std::vector<std::string> warnings;
  for (const auto& h : snapshots) {
    if (h.n_bins() != n_groups)
      throw ContractViolation("code density: snapshot has " + std::to_string(h.n_bins()) +
                              " bins, expected " + std::to_string(n_groups));
    for (std::size_t i = 0; i < n_groups; ++i) {
      counts[i] += h[i];
      if (h[i] == kBinCounterMax)
        warnings.push_back("bin " + std::to_string(i) + " saturated in window " +
                           std::to_string(h.window_id()) + "; its count is biased low");
    }
  }
  auto report = code_density(counts, lsb);
  report.warnings = std::move(warnings);
  return report;
}

RseComparison compare_rse(const BinConfiguration& predicted, const LinearityReport& measured) {
  if (predicted.n_groups() != measured.n_groups())
    throw InputError("compare_rse: configuration has " + std::to_string(predicted.n_groups()) +
                     " groups, measurement has " + std::to_string(measured.n_groups()));
  RseComparison out;
  out.predicted = predicted.rse;
  out.measured = rse_of_counts(measured.counts);
  if (out.predicted == 0.0) {
    out.deviation = out.measured == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
  }
  out.deviation = std::abs(out.measured - out.predicted) / out.predicted;

  // Delta method under a multinomial with the observed proportions.
  const auto n = static_cast<double>(measured.n_groups());
  const auto total = static_cast<double>(measured.n_events);
  const double mean = total / n;
  const double sd = out.measured * mean;
  if (sd > 0.0) {
    double e_g = 0.0, e_g2 = 0.0;
    for (auto c : measured.counts) {
      const double p = static_cast<double>(c) / total;
      const double g = (static_cast<double>(c) - mean) / ((n - 1.0) * sd * mean);
      e_g += p * g;
      e_g2 += p * g * g;
    }
    const double var = total * (e_g2 - e_g * e_g);
    out.stat_error = std::sqrt(std::max(0.0, var)) / out.predicted;
  }
  return out;
}

TdcPipeline::TdcPipeline(const DelayLineModel& model, const StateEncoder& encoder,
                         EncodeOptions options)
    : model_(&model), encoder_(&encoder), options_(options) {
  if (model.n_taps() != encoder.n_taps())
    throw InputError("encoder expects " + std::to_string(encoder.n_taps()) +
                     " taps but the delay line has " + std::to_string(model.n_taps()));
}

std::optional<FullTimestamp> TdcPipeline::measure(TimeFs since_sync, MeasureStats& stats) const {
  if (since_sync.value < 0) throw ContractViolation("measure: event before Sync");
  const auto& clock = model_->clock();
  const TimeFs phase{since_sync.value % clock.start_period.value};
  const auto result = encoder_->encode(propagate(*model_, phase), options_);
  if (is_missing(result)) {
    ++stats.missing_codes;
    return std::nullopt;
  }
  const auto& fine = std::get<FineCode>(result);
  if (fine.substituted) {
    ++stats.missing_codes;
    ++stats.substituted;
  }
  return resolve_timestamp(sample_coarse_counters(since_sync, clock), fine.group,
                           encoder_->n_groups());
}

DensityRun run_code_density(const TdcPipeline& pipeline, const DensityRunOptions& options) {
  if (options.events == 0) throw InputError("empty input: density run needs events");
  if (options.events_per_window == 0) throw ConfigError("events per window must be positive");
  const auto& clock = pipeline.clock();
  const TimeFs range = options.range.value > 0 ? options.range : clock.start_period;
  const std::int64_t cycles =
      (range.value + clock.start_period.value - 1) / clock.start_period.value;

  DensityRun run;
  run.setup.n_fine_groups = pipeline.encoder().n_groups();
  run.setup.lsb = pipeline.encoder().lsb();
  run.setup.range = range;
  run.setup.integration_time = options.event_interval * static_cast<std::int64_t>(options.events_per_window);
  run.setup.start_period = clock.start_period;
  HistogramPair pair(run.setup);

  EventSource source;
  source.kind = EventKind::uniform_phase;
  source.interval = options.event_interval;
  source.seed = options.seed;
  source.span = clock.start_period * cycles;
  EventGenerator gen(source, clock);

  for (std::uint64_t i = 0; i < options.events; ++i) {
    const Event ev = gen.next();
    for (auto& h : pair.advance_to(ev.sim_time)) run.snapshots.push_back(std::move(h));
    if (auto ts = pipeline.measure(ev.offset, run.stats)) pair.record(*ts, ev.sim_time);
  }
  run.snapshots.push_back(pair.swap_and_read(pair.window_end()));
  run.accepted = pair.accepted();
  run.saturated = pair.saturated();
  run.out_of_range = pair.out_of_range();
  return run;
}

std::vector<double> SweepReport::residuals() const {
  std::vector<double> out;
  for (const auto& s : steps)
    if (s.output) out.push_back(s.residual);
  return out;
}

std::optional<std::size_t> histogram_mode(std::span<const std::uint16_t> bins) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < bins.size(); ++i)
    if (bins[i] > 0 && (!best || bins[i] > bins[*best])) best = i;
  return best;
}

std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw InputError("linear fit needs matching, non-empty data");
  const auto n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
  }
  const double slope = sxx == 0.0 ? 0.0 : sxy / sxx;
  return {slope, mean_y - slope * mean_x};
}

SweepReport time_interval_sweep(const TdcPipeline& pipeline, const SweepOptions& options) {
  if (options.step.value <= 0) throw ConfigError("sweep step must be positive");
  if (options.events_per_step == 0) throw ConfigError("events per step must be positive");
  const auto& clock = pipeline.clock();
  const TimeFs range = options.range.value > 0 ? options.range : clock.start_period;

  HistogramSetup setup;
  setup.n_fine_groups = pipeline.encoder().n_groups();
  setup.lsb = pipeline.encoder().lsb();
  setup.range = range;
  setup.integration_time = options.event_interval * static_cast<std::int64_t>(options.events_per_step);
  setup.start_period = clock.start_period;
  HistogramPair pair(setup);

  SweepReport report;
  report.lsb = setup.lsb;
  const std::int64_t n_steps = (range.value + options.step.value - 1) / options.step.value;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const TimeFs delay = options.step * k;
    std::mt19937_64 rng(derive_seed(options.seed, "interval-step", static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> jitter(0.0, static_cast<double>(options.jitter_sigma.value));
    SweepStep step;
    step.input = delay;
    for (std::uint64_t j = 0; j < options.events_per_step; ++j) {
      const TimeFs sim_time = pair.window_start() + options.event_interval * static_cast<std::int64_t>(j);
      TimeFs t = delay;
      if (options.jitter_sigma.value > 0) t += TimeFs{std::llround(jitter(rng))};
      if (t.value < 0) continue;
      if (auto ts = pipeline.measure(t, report.stats))
        if (pair.record(*ts, sim_time) == RecordOutcome::accepted) ++step.events;
    }
    const Histogram h = pair.swap_and_read(pair.window_end());
    step.output = histogram_mode(h.bins());
    if (step.output) {
      const std::uint16_t peak = h[*step.output];
      for (auto c : h.bins()) {
        if (c > 0) ++step.populated_bins;
        if (2U * c >= peak) ++step.half_max_bins;
      }
    }
    report.steps.push_back(step);
  }

  std::vector<double> xs, ys;
  std::optional<std::size_t> previous;
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    const auto& s = report.steps[k];
    if (!s.output) {
      report.blank_histograms.push_back(k);
      continue;
    }
    if (previous && *s.output < *previous) report.order_violations.push_back(k);
    previous = s.output;
    xs.push_back(static_cast<double>(s.input.value));
    ys.push_back(static_cast<double>(*s.output));
  }
  if (!xs.empty()) {
    std::tie(report.slope, report.intercept) = linear_fit(xs, ys);
    for (auto& s : report.steps)
      if (s.output)
        s.residual = static_cast<double>(*s.output) -
                     (report.slope * static_cast<double>(s.input.value) + report.intercept);
  }
  return report;
}

std::pair<double, double> residual_envelope(const SweepReport& report) {
  const auto r = report.residuals();
  if (r.empty()) throw InputError("residual envelope: no non-blank steps");
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  return {*lo, *hi};
}

double fraction_within_two_bins(const SweepReport& report) {
  std::size_t filled = 0, narrow = 0;
  for (const auto& s : report.steps) {
    if (!s.output) continue;
    ++filled;
    if (s.half_max_bins <= 2) ++narrow;
  }
  return filled == 0 ? 0.0 : static_cast<double>(narrow) / static_cast<double>(filled);
}

CollectionResult collect_states(const DelayLineModel& model, std::uint64_t events,
                                std::uint64_t seed, std::uint64_t discovery_block) {
  if (events == 0) throw InputError("empty input: collection needs events");
  EventSource source;
  source.kind = EventKind::uniform_phase;
  source.seed = seed;
  EventGenerator gen(source, model.clock());
  StateCounter counter(discovery_block);
  for (std::uint64_t i = 0; i < events; ++i) counter.add(propagate(model, gen.next().phase));
  auto catalog = counter.finish(model.clock().start_period);
  const auto counts = catalog.counts();
  return {estimate_widths(catalog, counts), counter.discovery_curve()};
}

}  // namespace tdcstate
