#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "blockdisc/discrepancy.hpp"
#include "blockdisc/thresholds.hpp"

namespace blockdisc {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct NamedSchedule {
  std::string name;
  ThresholdFn schedule;
};

/// Seeded Monte Carlo configuration. Trial i draws stream i of `seed`.
///
/// Each trial sequence carries `length` + (largest block length used) - 1
/// bits, so every checkpoint n <= length has complete windows.
struct ExperimentSpec {
  std::uint64_t seed = 1;
  std::uint64_t trials = 1;
  std::uint64_t length = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<NamedSchedule> schedules;
  /// A trial passes a schedule when max_{checkpoints n >= n0} D_{s(n)}(t, n) <= epsilon.
  double epsilon = 0.1;
  std::uint64_t n0 = 4096;
  unsigned k_max = kDefaultMaxBlockLength;
};

struct RunOptions {
  unsigned threads = 1;
};

/// Quantiles of D_{s(n)}(t, n) across trials at one checkpoint (nearest rank).
struct CheckpointStats {
  std::uint64_t n = 0;
  unsigned k = 0;
  DiscrepancyValue q10;
  DiscrepancyValue median;
  DiscrepancyValue q90;
};

struct ScheduleResult {
  std::string name;
  std::string label;
  std::vector<CheckpointStats> checkpoints;
  std::uint64_t pass_count = 0;
  /// One '0'/'1' per trial, in trial order.
  std::string pass_mask;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::uint64_t sequence_bits = 0;
  std::vector<ScheduleResult> schedules;
  std::uint64_t family_pass_count = 0;
  std::string family_pass_mask;

  double pass_fraction(std::size_t schedule) const;
  double family_pass_fraction() const;
};

/// Checks every spec invariant without running trials. Throws
/// PreconditionError (infeasible horizon, bad counts) or ResourceError (k_max).
/// Returns the per-trial sequence length.
std::uint64_t validate(const ExperimentSpec& spec);

/// Runs all trials. Output is a pure function of `spec`; `options.threads`
/// only changes wall time.
ExperimentResult run(const ExperimentSpec& spec, RunOptions options = {});

/// Nearest-rank quantile: the ceil(percent * size / 100)-th smallest value.
DiscrepancyValue nearest_rank(std::vector<DiscrepancyValue> values, unsigned percent);

struct D1Atom {
  std::uint64_t value_numerator = 0;  // |2z - n|
  std::uint64_t value_denominator = 0;  // n
  BigRational probability;
};

/// Exact law of D(t, n) under fair coin flips, ascending by value.
/// Requires 1 <= n <= 64.
std::vector<D1Atom> exact_d1_distribution(std::uint64_t n);

struct D1Calibration {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  /// counts[v] = trials with |2 zeros - n| = v.
  std::vector<std::uint64_t> counts;
  double total_variation = 0;
};

/// Empirical D(t, n) over `trials` streams of `master_seed`, compared with
/// exact_d1_distribution(n) in total-variation distance.
D1Calibration calibrate_d1(std::uint64_t master_seed, std::uint64_t trials, std::uint64_t n,
                           RunOptions options = {});

struct TrendReport {
  std::string name;
  std::vector<std::uint64_t> checkpoints;  // those with n >= n0
  std::vector<DiscrepancyValue> medians;
  /// Medians strictly decrease across checkpoints n >= n0.
  bool strictly_decreasing = false;
  /// No median falls below half the first one.
  bool bounded_below_by_half_first = false;
  /// min median / first median.
  double floor_ratio = 0;
};

TrendReport trend(const ExperimentResult& result, std::size_t schedule);

struct RegimeComparison {
  std::vector<TrendReport> regime_a;
  std::vector<TrendReport> regime_b;
};

/// Runs both specs and reports the median trend of every schedule.
/// Requires equal length, trials, and checkpoints.
RegimeComparison regime_compare(const ExperimentSpec& a, const ExperimentSpec& b,
                                RunOptions options = {});

}  // namespace blockdisc
