#include "blockdisc/thresholds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "blockdisc/errors.hpp"
#include "support/oracles.hpp"

namespace blockdisc {
namespace {

TEST(LogTerms, ExactnessFlags) {
  EXPECT_TRUE(log_terms(256).lg_exact);
  EXPECT_TRUE(log_terms(256).lglg_exact);
  EXPECT_EQ(log_terms(256).lglg, 3.0L);
  EXPECT_TRUE(log_terms(1024).lg_exact);
  EXPECT_FALSE(log_terms(1024).lglg_exact);
  EXPECT_FALSE(log_terms(1000).lg_exact);
  EXPECT_EQ(log_terms(2).lglg, 0.0L);
}

TEST(Phi, ExactPowerTowerCases) {
  EXPECT_EQ(phi(ThresholdFn::constant(2), 256), (ThresholdSample{3, false}));
  EXPECT_EQ(phi(ThresholdFn::constant(5), 256), (ThresholdSample{0, false}));
  EXPECT_EQ(phi(ThresholdFn::constant(0), 65536), (ThresholdSample{12, false}));
  EXPECT_EQ(phi(ThresholdFn::constant(0), 2), (ThresholdSample{1, false}));
}

TEST(Phi, HighPrecisionOracle) {
  EXPECT_EQ(oracle::phi50(1000, 0), 6);
  EXPECT_EQ(phi(ThresholdFn::constant(0), 1000), (ThresholdSample{6, false}));
  const auto s = ThresholdFn::constant(1);
  for (std::uint64_t n = 2; n <= 20000; ++n) {
    const auto v = phi(s, n);
    if (!v.hazard) ASSERT_EQ(v.value, oracle::phi50(n, 1)) << "n " << n;
  }
}

TEST(Phi, RejectsSmallN) {
  EXPECT_THROW(phi(ThresholdFn::constant(0), 1), PreconditionError);
  EXPECT_THROW(phi(ThresholdFn::constant(0), 0), PreconditionError);
}

TEST(Phi, HazardWindowFlagsNearIntegerMargins) {
  // Inner table value engineered so the margin lands almost exactly on an integer.
  const auto n = 1000u;
  const long double margin = log_terms(n).lg - log_terms(n).lglg;
  EXPECT_GT(std::fabs(margin - std::nearbyint(margin)), kFloorHazardWindow);
  std::vector<std::int64_t> values(n - 1, 0);
  std::vector<bool> hazards(n - 1, false);
  hazards[n - 2] = true;
  const auto s = ThresholdFn::tabulated(values, hazards);
  EXPECT_TRUE(phi(s, n).hazard);
  EXPECT_FALSE(phi(s, n - 1).hazard);
}

TEST(PhiFn, InvolutionOnConstantSchedule) {
  const auto s = ThresholdFn::constant(2);
  const auto twice = phi_fn(phi_fn(s));
  std::size_t hazards = 0;
  for (std::uint64_t n = 2; n <= (1u << 16); ++n) {
    const auto v = twice.at(n);
    if (v.hazard) {
      ++hazards;
      continue;
    }
    ASSERT_EQ(v.value, 2) << "n " << n;
  }
  EXPECT_EQ(hazards, 0u);
}

TEST(PhiFn, OfZeroIsFloorOfMargin) {
  const auto s = phi_fn(ThresholdFn::constant(0));
  for (std::uint64_t n = 2; n <= 5000; ++n) {
    const auto v = s.at(n);
    if (!v.hazard) ASSERT_EQ(v.value, static_cast<std::int64_t>(boost::multiprecision::floor(oracle::margin50(n))));
  }
}

TEST(PhiFn, TabulatedInputIsPointwise) {
  const auto s = ThresholdFn::tabulated({3, -1, 4, 1, 5, 9, 2, 6, 5});  // n = 2..10
  const auto p = phi_fn(s);
  EXPECT_EQ(p.horizon(), 10u);
  EXPECT_EQ(p.first_n(), 2u);
  for (std::uint64_t n = 2; n <= 10; ++n) EXPECT_EQ(p.at(n), phi(s, n));
  const auto table = tabulate(p, 10);
  ASSERT_TRUE(table.is_tabulated());
  for (std::uint64_t n = 2; n <= 10; ++n) EXPECT_EQ(table.at(n), p.at(n));
  EXPECT_THROW(p.at(11), PreconditionError);
}

TEST(ThresholdFn, ClosedFormClampAndDomain) {
  const auto s = ThresholdFn::closed_form(1, -1, 0, 1);  // floor(L) clamped at 1
  EXPECT_EQ(s(256), 5);
  EXPECT_EQ(s(3), 1);
  EXPECT_THROW(s.at(1), PreconditionError);
  const auto lg = ThresholdFn::closed_form(1, 0, 0, std::nullopt);
  EXPECT_EQ(lg(1), 0);
  EXPECT_EQ(lg(1023), 9);
  EXPECT_EQ(lg(1024), 10);
  EXPECT_FALSE(lg.at(1024).hazard);
  EXPECT_EQ(ThresholdFn::constant(-4)(0), -4);
}

TEST(ParseSchedule, MiniLanguage) {
  EXPECT_EQ(parse_schedule("const:2")(256), 2);
  EXPECT_EQ(parse_schedule("form:1,-2,0")(256), 2);
  EXPECT_EQ(parse_schedule("form:0,0,-5")(256), 1);  // clamped
  EXPECT_EQ(parse_schedule("phi-of:const:3")(256), 2);
  EXPECT_EQ(parse_schedule("phi-of:phi-of:const:3")(1000), 3);
  EXPECT_EQ(parse_schedule("phi-of:const:3").label(), "phi-of:const:3");
  for (const char* bad : {"const", "const:x", "form:1,2", "form:1,2,3,4", "form:a,b,c", "ramp:1",
                          "table:/nonexistent/file.csv", "form:1,2,"}) {
    EXPECT_THROW(parse_schedule(bad), DataError) << bad;
  }
}

TEST(ScheduleCsv, ReadsConsecutiveTable) {
  std::istringstream in("n,s\n2,1\n3,1\n4,2\r\n");
  const auto s = read_schedule_csv(in);
  EXPECT_EQ(s.horizon(), 4u);
  EXPECT_EQ(s(4), 2);

  std::istringstream gap("n,s\n2,1\n4,1\n");
  EXPECT_THROW(read_schedule_csv(gap), DataError);
  std::istringstream header("x,y\n2,1\n");
  EXPECT_THROW(read_schedule_csv(header), DataError);
  std::istringstream empty("n,s\n");
  EXPECT_THROW(read_schedule_csv(empty), DataError);
}

TEST(ScheduleCsv, TableFileThroughMiniLanguage) {
  const auto dir = std::filesystem::temp_directory_path() / "blockdisc_sched_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "ramp.csv");
    write_schedule_csv(out, ThresholdFn::closed_form(0.5, 0, 0, 1), 100);
  }
  const auto s = parse_schedule("table:ramp.csv", dir);
  EXPECT_EQ(s.horizon(), 100u);
  EXPECT_EQ(s(64), 3);
  EXPECT_EQ(s.label(), "table:ramp.csv");
  std::filesystem::remove_all(dir);
}

TEST(Admissible, PhiOfLogLogIsNonnegativeAndDiverging) {
  const auto y = ThresholdFn::closed_form(0, 1, 0, std::nullopt);  // floor(log2 log2 n)
  const auto r = admissible(phi_fn(y), 1u << 20);
  EXPECT_TRUE(r.nonnegative);
  EXPECT_EQ(r.min_phi, 0);
  EXPECT_EQ(r.final_tail_min, 4);
  ASSERT_FALSE(r.tail_min_steps.empty());
  EXPECT_EQ(r.tail_min_steps.back(), (std::pair<std::int64_t, std::uint64_t>{4, 65536}));
  EXPECT_TRUE(r.diverging_up_to_horizon);
  EXPECT_TRUE(r.heuristic);
}

TEST(Admissible, FloorOfMarginIsBounded) {
  const auto r = admissible(ThresholdFn::closed_form(1, -1, 0, std::nullopt), 1u << 16);
  EXPECT_TRUE(r.nonnegative);
  EXPECT_EQ(r.min_phi, 0);
  EXPECT_EQ(r.final_tail_min, 0);
  EXPECT_EQ(r.tail_min_steps.size(), 1u);
  EXPECT_FALSE(r.diverging_up_to_horizon);
}

TEST(Admissible, FloorOfMarginPlusOneFails) {
  const auto r = admissible(ThresholdFn::closed_form(1, -1, 1, std::nullopt), 1u << 12);
  EXPECT_FALSE(r.nonnegative);
  EXPECT_EQ(r.min_phi, -1);
  EXPECT_FALSE(r.diverging_up_to_horizon);
}

TEST(Admissible, EarlyBoundIsNotDivergence) {
  // phi rises once near the start and then stays flat.
  std::vector<std::int64_t> s(9999);
  for (std::uint64_t n = 2; n <= 10000; ++n) {
    const auto margin = log_terms(n).lg - log_terms(n).lglg;
    s[n - 2] = static_cast<std::int64_t>(std::floor(margin)) - (n < 20 ? 0 : 1);
  }
  const auto r = admissible(ThresholdFn::tabulated(s), 10000);
  EXPECT_FALSE(r.diverging_up_to_horizon);
  EXPECT_THROW(admissible(ThresholdFn::tabulated(s), 10001), PreconditionError);
  EXPECT_THROW(admissible(ThresholdFn::constant(0), 1), PreconditionError);
}

FinitePrefixSeq seq(std::vector<std::uint64_t> v) { return FinitePrefixSeq{std::move(v)}; }

TEST(Invert, Examples) {
  std::vector<std::uint64_t> id(10);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_EQ(invert(seq(id)), seq(id));

  std::vector<std::uint64_t> twice(10);
  for (std::size_t m = 0; m < 10; ++m) twice[m] = 2 * m;
  const auto inv = invert(seq(twice));
  ASSERT_EQ(inv.horizon(), 19u);
  EXPECT_EQ(inv[3], 2u);
  for (std::uint64_t n = 0; n < 19; ++n) EXPECT_EQ(inv[n], (n + 1) / 2);

  EXPECT_EQ(invert(seq({0, 0, 0})), seq({0}));
  EXPECT_EQ(invert(seq({})), seq({}));
}

TEST(Dominate, Examples) {
  std::vector<std::uint64_t> shifted(10);
  for (std::size_t k = 0; k < 10; ++k) shifted[k] = k + 1;
  const auto x = dominate(seq(shifted));
  ASSERT_EQ(x.horizon(), 11u);
  for (std::uint64_t m = 1; m <= 10; ++m) EXPECT_EQ(x[m], m - 1);

  const auto flat = dominate(seq(std::vector<std::uint64_t>(7, 0)));
  EXPECT_EQ(flat, seq({6}));
}

std::vector<std::uint64_t> random_prefix(std::mt19937_64& rng, std::size_t h, std::uint64_t cap) {
  std::uniform_int_distribution<std::uint64_t> dist(0, cap);
  std::vector<std::uint64_t> v(h);
  for (auto& x : v) x = dist(rng);
  return v;
}

TEST(Invert, MatchesMinimumSearchOnShortPrefixes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto h = 1 + static_cast<std::size_t>(rng() % 50);
    const auto x = random_prefix(rng, h, 60);
    const auto inv = invert(seq(x));
    for (std::uint64_t n = 0;; ++n) {
      const auto expected = oracle::naive_inverse_at(x, n);
      if (!expected) {
        ASSERT_EQ(inv.horizon(), n);
        break;
      }
      ASSERT_LT(n, inv.horizon());
      ASSERT_EQ(inv[n], *expected);
      if (n > 0) ASSERT_GE(inv[n], inv[n - 1]);
    }
  }
}

TEST(Dominate, MatchesMaximumSearchAndBoundsInverse) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto h = 1 + static_cast<std::size_t>(rng() % 50);
    const auto y = random_prefix(rng, h, 40);
    const auto x = dominate(seq(y));
    const auto top = *std::max_element(y.begin(), y.end());
    ASSERT_EQ(x.horizon(), top + 1);
    for (std::uint64_t m = 0; m <= top; ++m) ASSERT_EQ(x[m], oracle::naive_dominate_at(y, m));
    const auto inv = invert(x);
    for (std::size_t n = 0; n < std::min(inv.horizon(), y.size()); ++n) ASSERT_LE(inv[n], y[n]);
  }
}

TEST(Compare, Examples) {
  EXPECT_EQ(compare(seq({1, 2}), seq({1, 2})), PointwiseOrder::equal);
  EXPECT_EQ(compare(seq({1, 1, 1}), seq({2, 2, 2})), PointwiseOrder::less_equal);
  EXPECT_EQ(compare(seq({2, 2, 2}), seq({1, 2, 1})), PointwiseOrder::greater_equal);
  EXPECT_EQ(compare(seq({1, 3}), seq({2, 2})), PointwiseOrder::incomparable);
  EXPECT_THROW(compare(seq({1}), seq({1, 2})), PreconditionError);
  EXPECT_EQ(to_string(PointwiseOrder::less_equal), "<=");
}

TEST(Compare, PartialOrderLaws) {
  std::mt19937_64 rng(5);
  auto leq = [](const FinitePrefixSeq& a, const FinitePrefixSeq& b) {
    const auto o = compare(a, b);
    return o == PointwiseOrder::equal || o == PointwiseOrder::less_equal;
  };
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = seq(random_prefix(rng, 4, 2));
    const auto b = seq(random_prefix(rng, 4, 2));
    const auto c = seq(random_prefix(rng, 4, 2));
    ASSERT_TRUE(leq(a, a));
    if (leq(a, b) && leq(b, a)) ASSERT_EQ(a, b);
    if (leq(a, b) && leq(b, c)) ASSERT_TRUE(leq(a, c));
  }
}

TEST(Invert, AntitoneUnderPointwiseOrder) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto lower = random_prefix(rng, 30, 40);
    auto upper = lower;
    for (auto& v : upper) v += rng() % 5;
    ASSERT_NE(compare(seq(lower), seq(upper)), PointwiseOrder::greater_equal);
    const auto a = invert(seq(lower));
    const auto b = invert(seq(upper));
    for (std::size_t n = 0; n < std::min(a.horizon(), b.horizon()); ++n) ASSERT_GE(a[n], b[n]);
  }
}

}  // namespace
}  // namespace blockdisc
