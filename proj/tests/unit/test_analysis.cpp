#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "tdcstate/analysis.hpp"
#include "tdcstate/error.hpp"

using namespace tdcstate;
using namespace tdcstate::literals;

namespace {

// Start period of exactly 120 taps of 14 ps, so every state of the ideal
// line is one tap wide.
ClockConfig even_clock() {
  ClockConfig c;
  c.start_period = TimeFs{1'680'000};
  c.half_period = TimeFs{840'000};
  return c;
}

// Catalog with the exact state widths of `model`.
StateCatalog exact_catalog(const DelayLineModel& model) {
  std::vector<StateRecord> recs;
  for (const auto& [key, width] : oracle::true_state_widths(model)) {
    RawState s(key.second.size(), key.first);
    for (std::size_t i = 0; i < key.second.size(); ++i) s.set(i, key.second[i]);
    recs.push_back({s, seq_value(s), 1, TimeFs{width}});
  }
  return StateCatalog(recs, recs.size(), model.clock().start_period);
}

struct Reference {
  DelayLineModel model = build_model(4, 14_ps, 3_ps, 2_ps, 1);
  CollectionResult col = collect_states(model, 2'000'000, 21);
  SweepResult sweep_result = sweep(col.catalog.widths(), 2_ps, 100_ps, TimeFs{5});
};

const Reference& reference() {
  static const Reference r;
  return r;
}

}  // namespace

TEST(CodeDensity, Examples) {
  const std::vector<std::uint64_t> flat{100, 100, 100, 100};
  const auto r = code_density(flat, 10_ps);
  for (double d : r.dnl) EXPECT_EQ(d, 0.0);
  for (double v : r.inl) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.n_events, 400U);
  EXPECT_EQ(r.empty_bin_fraction, 0.0);

  const std::vector<std::uint64_t> skewed{150, 50};
  const auto s = code_density(skewed, 10_ps);
  EXPECT_EQ(s.dnl, (std::vector<double>{0.5, -0.5}));
  EXPECT_EQ(s.inl, (std::vector<double>{0.5, 0.0}));
}

TEST(CodeDensity, Errors) {
  const std::vector<std::uint64_t> zeros{0, 0};
  EXPECT_THROW(code_density(zeros, 1_ps), InputError);
  EXPECT_THROW(code_density(std::vector<std::uint64_t>{}, 1_ps), InputError);
  const std::vector<Histogram> snaps{Histogram(3)};
  EXPECT_THROW(code_density(snaps, 4, 1_ps), ContractViolation);
}

TEST(CodeDensity, EmptyBinsAndSaturationWarnings) {
  const std::vector<std::uint64_t> a{65'535, 0, 10, 10};
  const std::vector<std::uint64_t> b{5, 0, 10, 10};
  const std::vector<Histogram> snaps{Histogram::from_counts(a, 0), Histogram::from_counts(b, 1)};
  const auto r = code_density(snaps, 4, 1_ps);
  EXPECT_EQ(r.counts, (std::vector<std::uint64_t>{65'540, 0, 20, 20}));
  EXPECT_EQ(r.empty_bin_fraction, 0.25);
  ASSERT_EQ(r.warnings.size(), 1U);
  EXPECT_NE(r.warnings[0].find("bin 0"), std::string::npos);
}

TEST(CodeDensity, LinearitySumsVanish) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::uint64_t> count(0, 5'000'000);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::uint64_t> c(1 + trial % 1200);
    for (auto& x : c) x = count(rng);
    c[0] += 1;
    const auto r = code_density(c, 1_ps);
    double s = 0.0;
    for (double d : r.dnl) s += d;
    ASSERT_NEAR(s, 0.0, 1e-9);
    ASSERT_EQ(r.inl.back(), 0.0);
  }
}

TEST(CodeDensity, NoEmptyBinsAtFiftyEventsPerGroup) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, 5_ps);
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  DensityRunOptions opts;
  opts.events = 50 * cfg.n_groups();
  opts.seed = 4;
  const auto run = run_code_density(pipe, opts);
  EXPECT_EQ(code_density(run.snapshots, cfg.n_groups(), cfg.lsb).empty_bin_fraction, 0.0);
}

TEST(CompareRse, ProportionalCountsMatchExactly) {
  const std::vector<TimeFs> w{TimeFs{10}, TimeFs{30}, TimeFs{20}};
  const auto cfg = make_configuration(w, {0, 1, 2, 3}, TimeFs{20});
  const std::vector<std::uint64_t> counts{1000, 3000, 2000};
  const auto cmp = compare_rse(cfg, code_density(counts, cfg.lsb));
  EXPECT_NEAR(cmp.deviation, 0.0, 1e-12);
  EXPECT_NEAR(cmp.measured, cfg.rse, 1e-12);
  const std::vector<std::uint64_t> two{1, 1};
  EXPECT_THROW(compare_rse(cfg, code_density(two, cfg.lsb)), InputError);
}

TEST(CompareRse, SmallRunsCarryLargerErrorBars) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, TimeFs{87'730});
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  auto run_with = [&](std::uint64_t events) {
    DensityRunOptions opts;
    opts.events = events;
    opts.seed = 9;
    const auto run = run_code_density(pipe, opts);
    return compare_rse(cfg, code_density(run.snapshots, cfg.n_groups(), cfg.lsb));
  };
  const auto small = run_with(1'000);
  const auto large = run_with(1'000'000);
  EXPECT_GT(small.stat_error, 5 * large.stat_error);
  EXPECT_GT(small.deviation, large.deviation);
  EXPECT_LT(large.deviation, 0.15);
  // at 1000 events the multinomial noise is comparable to the signal
  EXPECT_GT(small.stat_error, 0.1);
}

TEST(Pipeline, RejectsTapMismatch) {
  const auto& ref = reference();
  const auto enc = build_encoder(ref.col.catalog, select_for_lsb(ref.sweep_result, 40_ps));
  const auto other = build_model(5, 14_ps, 0_fs, 0_fs, 0);
  EXPECT_THROW(TdcPipeline(other, enc), InputError);
}

TEST(Pipeline, TimestampsCountStartCycles) {
  const auto m = build_model(4, 14_ps, 0_fs, 0_fs, 0, even_clock());
  const auto cat = exact_catalog(m);
  const auto cfg = make_configuration(cat.widths(),
                                      [&] {
                                        std::vector<std::size_t> b;
                                        for (std::size_t i = 0; i <= cat.size(); i += 2) b.push_back(i);
                                        return b;
                                      }(),
                                      28_ps);
  const auto enc = build_encoder(cat, cfg);
  const TdcPipeline pipe(m, enc);
  MeasureStats stats;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> t_dist(0, 10 * 1'680'000);
  for (int i = 0; i < 10'000; ++i) {
    const std::int64_t t = t_dist(rng);
    const auto ts = pipe.measure(TimeFs{t}, stats);
    ASSERT_TRUE(ts);
    EXPECT_EQ(ts->coarse, t / 1'680'000);
    EXPECT_EQ(ts->fine, static_cast<std::size_t>((t % 1'680'000) / 28'000));
  }
  EXPECT_EQ(stats.missing_codes, 0U);
}

TEST(DensityRun, AccountsForEveryEvent) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, TimeFs{21'650});
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  DensityRunOptions opts;
  opts.events = 300'000;
  opts.range = TimeFs{8'000'000};
  opts.events_per_window = 70'000;
  opts.seed = 5;
  const auto run = run_code_density(pipe, opts);
  std::uint64_t total = 0;
  for (const auto& h : run.snapshots) total += h.total();
  EXPECT_EQ(total, run.accepted);
  EXPECT_EQ(run.accepted + run.saturated + run.out_of_range + run.stats.missing_codes, opts.events);
  EXPECT_GT(run.out_of_range, 0U);  // the last partial cycle lies past the range
  EXPECT_EQ(run.snapshots.size(), 5U);
  EXPECT_EQ(run.snapshots.front().n_bins(), bins_for_range(opts.range, cfg.n_groups(), TimeFs{1'667'000}));
  opts.events = 0;
  EXPECT_THROW(run_code_density(pipe, opts), InputError);
}

TEST(HistogramMode, LowestIndexWinsTies) {
  const std::vector<std::uint16_t> tie{0, 4, 2, 4};
  EXPECT_EQ(histogram_mode(tie), 1U);
  const std::vector<std::uint16_t> none{0, 0};
  EXPECT_FALSE(histogram_mode(none));
}

TEST(LinearFit, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const auto [slope, intercept] = linear_fit(x, y);
  EXPECT_NEAR(slope, 2.0, 1e-12);
  EXPECT_NEAR(intercept, 1.0, 1e-12);
  EXPECT_THROW(linear_fit(std::vector<double>{}, std::vector<double>{}), InputError);
}

TEST(IntervalSweep, IdealStaircase) {
  const auto m = build_model(4, 14_ps, 0_fs, 0_fs, 0, even_clock());
  const auto cat = exact_catalog(m);
  ASSERT_EQ(cat.size(), 120U);
  std::vector<std::size_t> b(121);
  for (std::size_t i = 0; i <= 120; ++i) b[i] = i;
  const auto cfg = make_configuration(cat.widths(), b, 14_ps);
  ASSERT_EQ(cfg.rse, 0.0);
  const auto enc = build_encoder(cat, cfg);
  const TdcPipeline pipe(m, enc);
  SweepOptions opts;
  opts.step = 14_ps;
  opts.events_per_step = 20;
  const auto report = time_interval_sweep(pipe, opts);
  ASSERT_EQ(report.steps.size(), 120U);
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    ASSERT_TRUE(report.steps[k].output);
    EXPECT_EQ(*report.steps[k].output, k);
    EXPECT_NEAR(report.steps[k].residual, 0.0, 1e-9);
    EXPECT_EQ(report.steps[k].events, 20U);
    EXPECT_EQ(report.steps[k].half_max_bins, 1U);
  }
  EXPECT_NEAR(report.slope * 14'000, 1.0, 1e-12);
  EXPECT_TRUE(report.blank_histograms.empty());
  EXPECT_TRUE(report.order_violations.empty());
  const auto [lo, hi] = residual_envelope(report);
  EXPECT_NEAR(lo, 0.0, 1e-9);
  EXPECT_NEAR(hi, 0.0, 1e-9);
}

TEST(IntervalSweep, CollectionModelHasNoBlanksAndSmallCoarseResiduals) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, TimeFs{87'730});
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  SweepOptions opts;
  opts.seed = 3;
  const auto report = time_interval_sweep(pipe, opts);
  EXPECT_EQ(report.steps.size(), 113U);
  EXPECT_TRUE(report.blank_histograms.empty());
  EXPECT_TRUE(report.order_violations.empty());
  EXPECT_EQ(report.stats.missing_codes, 0U);
  const auto [lo, hi] = residual_envelope(report);
  EXPECT_GT(lo, -1.0);
  EXPECT_LT(hi, 1.0);
}

TEST(IntervalSweep, JitteredStepsStayNarrow) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, TimeFs{43'870});
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  SweepOptions opts;
  opts.jitter_sigma = TimeFs{cfg.lsb.value / 2};
  opts.seed = 8;
  const auto report = time_interval_sweep(pipe, opts);
  EXPECT_GT(fraction_within_two_bins(report), 0.9);
}

TEST(IntervalSweep, Deterministic) {
  const auto& ref = reference();
  const auto& cfg = select_for_lsb(ref.sweep_result, TimeFs{21'650});
  const auto enc = build_encoder(ref.col.catalog, cfg);
  const TdcPipeline pipe(ref.model, enc);
  SweepOptions opts;
  opts.jitter_sigma = TimeFs{3'000};
  opts.seed = 12;
  const auto a = time_interval_sweep(pipe, opts);
  const auto b = time_interval_sweep(pipe, opts);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].output, b.steps[k].output);
    EXPECT_EQ(a.steps[k].residual, b.steps[k].residual);
  }
  EXPECT_EQ(a.slope, b.slope);
}

TEST(ResidualEnvelope, Examples) {
  SweepReport r;
  for (double v : {0.0, 0.0}) r.steps.push_back({TimeFs{0}, 1, v, 1, 1, 1});
  EXPECT_EQ(residual_envelope(r), (std::pair<double, double>{0.0, 0.0}));
  r.steps.clear();
  for (double v : {-0.3, 0.1, 0.4}) r.steps.push_back({TimeFs{0}, 1, v, 1, 1, 1});
  r.steps.push_back({TimeFs{0}, std::nullopt, 9.0, 0, 0, 0});  // blanks are ignored
  EXPECT_EQ(residual_envelope(r), (std::pair<double, double>{-0.3, 0.4}));
  EXPECT_THROW(residual_envelope(SweepReport{}), InputError);
}

TEST(CollectStates, EmptyInput) {
  const auto m = build_model(4, 14_ps, 0_fs, 0_fs, 0);
  EXPECT_THROW(collect_states(m, 0, 1), InputError);
}
