#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/state_catalog.hpp"
#include "tdcstate/tdl_sim.hpp"

using namespace tdcstate;
using namespace tdcstate::literals;

namespace {

DelayLineModel ideal_line() { return build_model(4, 14_ps, 0_fs, 0_fs, 0); }

bool is_thermometer(const RawState& s) {
  bool seen_zero = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.test(i)) seen_zero = true;
    else if (seen_zero) return false;
  }
  return true;
}

}  // namespace

TEST(RawState, HexRoundTrip) {
  RawState s(64);
  s.set(0);
  s.set(1);
  s.set(3);
  EXPECT_EQ(s.to_hex(), "000000000000000B");
  EXPECT_EQ(RawState::from_hex("000000000000000B", 64, false), s);
  RawState odd(18, true);
  odd.set(17);
  EXPECT_EQ(odd.to_hex(), "20000");
  EXPECT_EQ(RawState::from_hex("20000", 18, true), odd);
  EXPECT_NE(RawState::from_hex("20000", 18, false), odd);
  EXPECT_THROW(RawState::from_hex("40000", 18, false), InputError);
  EXPECT_THROW(RawState::from_hex("2000", 18, false), InputError);
  EXPECT_THROW(RawState::from_hex("2000G", 18, false), InputError);
}

TEST(RawState, BitsAndOrdering) {
  RawState a(8), b(8);
  a.set(7);
  b.set(0);
  b.set(1);
  EXPECT_EQ(a.to_bits(), "10000000");
  EXPECT_EQ(a.popcount(), 1U);
  EXPECT_EQ(RawState::compare_bits(b, a), std::strong_ordering::less);
  RawState c = a;
  c.set(7, false);
  EXPECT_EQ(c.popcount(), 0U);
}

TEST(BuildModel, TooShortLineNamesShortfall) {
  try {
    build_model(4, 13_ps, 0_fs, 0_fs, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line shorter than 833500 fs"), std::string::npos) << msg;
    EXPECT_NE(msg.find("832000"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1500"), std::string::npos) << msg;
  }
}

TEST(BuildModel, IdealLine) {
  const auto m = ideal_line();
  EXPECT_EQ(m.n_taps(), 64U);
  EXPECT_EQ(m.n_clb(), 4U);
  EXPECT_EQ(m.total_delay(), TimeFs{896'000});
  for (const auto& e : m.elements()) {
    EXPECT_EQ(e.tap_delay, 14_ps);
    EXPECT_EQ(e.sampler_skew, 0_fs);
  }
}

TEST(BuildModel, SeededGenerationIsDeterministic) {
  const auto a = build_model(4, 14_ps, 3_ps, 2_ps, 42);
  const auto b = build_model(4, 14_ps, 3_ps, 2_ps, 42);
  const auto c = build_model(4, 14_ps, 3_ps, 2_ps, 43);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(std::equal(a.elements().begin(), a.elements().end(), c.elements().begin()));
  for (const auto& e : a.elements()) EXPECT_GE(e.tap_delay.value, 0);
}

TEST(BuildModel, RejectsBadParameters) {
  EXPECT_THROW(build_model(0, 14_ps, 0_fs, 0_fs, 1), ConfigError);
  EXPECT_THROW(build_model(4, 0_ps, 0_fs, 0_fs, 1), ConfigError);
  EXPECT_THROW(build_model(4, 14_ps, TimeFs{-1}, 0_fs, 1), ConfigError);
  std::vector<DelayElement> fifteen(15, {100_ps, 0_fs});
  EXPECT_THROW(DelayLineModel{fifteen}, ConfigError);
  std::vector<DelayElement> negative(16, {100_ps, 0_fs});
  negative[3].tap_delay = TimeFs{-1};
  EXPECT_THROW(DelayLineModel{negative}, ConfigError);
  EXPECT_THROW(DelayLineModel{std::vector<DelayElement>{}}, ConfigError);
}

TEST(Propagate, DepthOneJustBelowOneTap) {
  const auto m = ideal_line();
  const RawState s = propagate(m, TimeFs{13'999});
  EXPECT_TRUE(s.test(0));
  EXPECT_EQ(s.popcount(), 1U);
  EXPECT_FALSE(s.inverted());
  // a tap exactly at its switch instant registers 1
  EXPECT_EQ(propagate(m, 14_ps).popcount(), 2U);
}

TEST(Propagate, PhaseOutOfRange) {
  const auto m = ideal_line();
  EXPECT_THROW(propagate(m, TimeFs{-1}), ContractViolation);
  EXPECT_THROW(propagate(m, TimeFs{1'667'000}), ContractViolation);
  EXPECT_NO_THROW(propagate(m, TimeFs{1'666'999}));
}

TEST(Propagate, RouteMismatchMakesBubble) {
  // Tap 2's data route is 20 ps slower than its neighbours', so it latches
  // after tap 3 even though the chain reaches it first.
  std::vector<DelayElement> e(64, {14_ps, 0_fs});
  e[2].sampler_skew = TimeFs{-20'000};
  const DelayLineModel m(e);
  const RawState s = propagate(m, 45_ps);
  EXPECT_TRUE(s.test(0));
  EXPECT_TRUE(s.test(1));
  EXPECT_FALSE(s.test(2));
  EXPECT_TRUE(s.test(3));
  EXPECT_EQ(s.popcount(), 3U);
  EXPECT_EQ(s.to_hex(), "000000000000000B");
  EXPECT_EQ(seq_value(s), 3);
}

TEST(Propagate, HalvesNeverCollide) {
  // One CLB of slow, mismatched taps: a small model the grid covers densely.
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto m = build_model(1, 60_ps, 10_ps, 5_ps, seed);
    for (std::int64_t p = 0; p < 833'500; p += 37) {
      const RawState a = propagate(m, TimeFs{p});
      const RawState b = propagate(m, TimeFs{p + 833'500});
      ASSERT_NE(a, b) << "phase " << p;
      ASSERT_NE(seq_value(a), seq_value(b)) << "phase " << p;
    }
  }
}

TEST(Propagate, IdealLineIsThermometerAndMonotone) {
  const auto m = ideal_line();
  std::size_t previous = 0;
  for (std::int64_t p = 0; p < 833'500; p += 97) {
    const RawState s = propagate(m, TimeFs{p});
    ASSERT_TRUE(is_thermometer(s)) << p;
    ASSERT_GE(s.popcount(), previous) << p;
    previous = s.popcount();
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> phase(0, 1'666'999);
  for (int i = 0; i < 5000; ++i) ASSERT_TRUE(is_thermometer(propagate(m, TimeFs{phase(rng)})));
}

TEST(Propagate, IdealLineSeparatesPhasesFurtherApartThanOneTap) {
  const auto m = ideal_line();
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::int64_t> phase(0, 833'499);
  for (int i = 0; i < 20'000; ++i) {
    const std::int64_t a = phase(rng), b = phase(rng);
    if (std::llabs(a - b) <= 14'000) continue;
    ASSERT_NE(propagate(m, TimeFs{a}), propagate(m, TimeFs{b}));
  }
}

TEST(SampleEvents, Deterministic) {
  const auto m = ideal_line();
  EventSource src;
  src.seed = 7;
  const auto a = sample_events(m, src, 10);
  const auto b = sample_events(m, src, 10);
  ASSERT_EQ(a.size(), 10U);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].event.phase, b[i].event.phase);
    EXPECT_EQ(a[i].state, b[i].state);
    EXPECT_EQ(a[i].state, propagate(m, a[i].event.phase));
  }
}

TEST(SampleEvents, FixedPhaseSweep) {
  const auto m = ideal_line();
  EventSource src;
  src.kind = EventKind::fixed_phase_sweep;
  src.step = TimeFs{14'800};
  const auto ev = sample_events(m, src, 200);
  for (std::size_t k = 0; k < ev.size(); ++k)
    EXPECT_EQ(ev[k].event.phase.value, static_cast<std::int64_t>(k) * 14'800 % 1'667'000);
}

TEST(SampleEvents, SpanWiderThanOnePeriod) {
  EventSource src;
  src.span = TimeFs{5'001'000};
  src.seed = 3;
  EventGenerator gen(src, ClockConfig{});
  std::int64_t max_offset = 0;
  for (int i = 0; i < 10'000; ++i) {
    const Event e = gen.next();
    ASSERT_LT(e.offset.value, 5'001'000);
    ASSERT_EQ(e.phase.value, e.offset.value % 1'667'000);
    max_offset = std::max(max_offset, e.offset.value);
  }
  EXPECT_GT(max_offset, 3'334'000);
}

TEST(SampleEvents, ExponentialArrivalsGiveUniformPhases) {
  EventSource src;
  src.kind = EventKind::exponential_arrivals;
  src.interval = TimeFs{100'000'000};
  src.seed = 11;
  EventGenerator gen(src, ClockConfig{});
  constexpr int kBins = 100;
  constexpr int kEvents = 1'000'000;
  std::vector<int> counts(kBins, 0);
  for (int i = 0; i < kEvents; ++i) {
    const Event e = gen.next();
    ++counts[static_cast<std::size_t>(e.phase.value * kBins / 1'667'000)];
  }
  const double p = 1.0 / kBins;
  const double expected = kEvents * p;
  const double sigma = std::sqrt(kEvents * p * (1 - p));
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_LT(std::abs(c - expected), 4 * sigma);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // chi-square with 99 degrees of freedom: mean 99, sd sqrt(198)
  EXPECT_LT(chi2, 99 + 4 * std::sqrt(198.0));
}

TEST(TapFile, RoundTrip) {
  const auto m = build_model(4, 14_ps, 3_ps, 2_ps, 9);
  std::stringstream buf;
  write_tap_file(buf, m, {"master_seed=77 model_seed=9"});
  const auto back = read_tap_file(buf);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.seed(), 9U);
}

TEST(TapFile, RejectsMalformedInput) {
  std::istringstream no_header("0,14000,0\n");
  EXPECT_THROW(read_tap_file(no_header), InputError);
  std::istringstream bad_index("index,tap_delay_fs,sampler_skew_fs\n1,14000,0\n");
  EXPECT_THROW(read_tap_file(bad_index), InputError);
  std::istringstream bad_record("index,tap_delay_fs,sampler_skew_fs\n0;14000;0\n");
  EXPECT_THROW(read_tap_file(bad_record), InputError);
  std::stringstream short_line;
  short_line << "index,tap_delay_fs,sampler_skew_fs\n";
  for (int i = 0; i < 16; ++i) short_line << i << ",1000,0\n";
  EXPECT_THROW(read_tap_file(short_line), ConfigError);
}
