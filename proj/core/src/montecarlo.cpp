#include "blockdisc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "blockdisc/bitseq.hpp"
#include "blockdisc/errors.hpp"

namespace blockdisc {
namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; callers write results into slot i only.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

bool within(const DiscrepancyValue& d, double epsilon) {
  return static_cast<long double>(d.numerator) <=
         static_cast<long double>(epsilon) * static_cast<long double>(d.denominator);
}

}  // namespace

double ExperimentResult::pass_fraction(std::size_t schedule) const {
  return static_cast<double>(schedules.at(schedule).pass_count) /
         static_cast<double>(spec.trials);
}

double ExperimentResult::family_pass_fraction() const {
  return static_cast<double>(family_pass_count) / static_cast<double>(spec.trials);
}

std::uint64_t validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw PreconditionError("experiment needs at least one trial");
  if (spec.schedules.empty()) throw PreconditionError("experiment needs at least one schedule");
  if (spec.checkpoints.empty()) throw PreconditionError("experiment needs checkpoints");
  if (!(spec.epsilon >= 0) || !std::isfinite(spec.epsilon)) {
    throw PreconditionError("pass tolerance epsilon must be a finite value >= 0");
  }
  for (std::size_t i = 1; i < spec.checkpoints.size(); ++i) {
    if (spec.checkpoints[i] <= spec.checkpoints[i - 1]) {
      throw PreconditionError("checkpoints must be strictly ascending");
    }
  }
  if (spec.checkpoints.front() < 1) throw PreconditionError("checkpoints must be >= 1");
  if (spec.checkpoints.back() > spec.length) {
    throw PreconditionError("checkpoint " + std::to_string(spec.checkpoints.back()) +
                            " exceeds sequence length N = " + std::to_string(spec.length));
  }
  if (spec.n0 > spec.checkpoints.back()) {
    throw PreconditionError("no checkpoint reaches n0 = " + std::to_string(spec.n0));
  }

  const DiscrepancyOptions options{spec.k_max};
  // Large enough for any admissible k; block_length_at checks the real bound.
  const std::uint64_t probe_length = spec.length + spec.k_max;
  unsigned widest = 1;
  for (const auto& named : spec.schedules) {
    for (const auto n : spec.checkpoints) {
      try {
        widest = std::max(widest, block_length_at(named.schedule, n, probe_length, options));
      } catch (const PreconditionError& e) {
        throw PreconditionError("schedule '" + named.name + "': " + e.what());
      } catch (const ResourceError& e) {
        throw ResourceError("schedule '" + named.name + "': " + e.what());
      }
    }
  }
  return spec.length + widest - 1;
}

DiscrepancyValue nearest_rank(std::vector<DiscrepancyValue> values, unsigned percent) {
  if (values.empty()) throw PreconditionError("quantile of an empty sample");
  if (percent == 0 || percent > 100) throw PreconditionError("percent must be in (0, 100]");
  const std::size_t size = values.size();
  const std::size_t rank = std::max<std::size_t>(1, (percent * size + 99) / 100);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

ExperimentResult run(const ExperimentSpec& spec, RunOptions options) {
  const std::uint64_t bits = validate(spec);
  const DiscrepancyOptions disc_options{spec.k_max};
  const std::size_t schedules = spec.schedules.size();
  const std::size_t checkpoints = spec.checkpoints.size();
  const std::size_t per_trial = schedules * checkpoints;

  // values[trial * per_trial + schedule * checkpoints + c]
  std::vector<DiscrepancyValue> values(spec.trials * per_trial);
  parallel_for(spec.trials, options.threads, [&](std::uint64_t trial) {
    const BitSequence t = generate(Seed{spec.seed, trial}, bits);
    for (std::size_t s = 0; s < schedules; ++s) {
      const auto points = profile(t, spec.schedules[s].schedule, spec.checkpoints, disc_options);
      auto* out = values.data() + trial * per_trial + s * checkpoints;
      for (std::size_t c = 0; c < checkpoints; ++c) out[c] = points[c].d;
    }
  });

  ExperimentResult result;
  result.spec = spec;
  result.sequence_bits = bits;
  result.family_pass_mask.assign(spec.trials, '1');
  std::vector<DiscrepancyValue> column(spec.trials);
  for (std::size_t s = 0; s < schedules; ++s) {
    ScheduleResult sr;
    sr.name = spec.schedules[s].name;
    sr.label = spec.schedules[s].schedule.label();
    for (std::size_t c = 0; c < checkpoints; ++c) {
      for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
        column[trial] = values[trial * per_trial + s * checkpoints + c];
      }
      CheckpointStats stats;
      stats.n = spec.checkpoints[c];
      stats.k = static_cast<unsigned>(spec.schedules[s].schedule(stats.n));
      stats.q10 = nearest_rank(column, 10);
      stats.median = nearest_rank(column, 50);
      stats.q90 = nearest_rank(column, 90);
      sr.checkpoints.push_back(stats);
    }
    sr.pass_mask.assign(spec.trials, '0');
    for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
      bool pass = true;
      for (std::size_t c = 0; c < checkpoints && pass; ++c) {
        if (spec.checkpoints[c] < spec.n0) continue;
        pass = within(values[trial * per_trial + s * checkpoints + c], spec.epsilon);
      }
      if (pass) {
        sr.pass_mask[trial] = '1';
        ++sr.pass_count;
      } else {
        result.family_pass_mask[trial] = '0';
      }
    }
    result.schedules.push_back(std::move(sr));
  }
  result.family_pass_count = static_cast<std::uint64_t>(
      std::count(result.family_pass_mask.begin(), result.family_pass_mask.end(), '1'));
  return result;
}

std::vector<D1Atom> exact_d1_distribution(std::uint64_t n) {
  if (n < 1 || n > 64) {
    throw PreconditionError("exact D(t, n) distribution supports 1 <= n <= 64, got " +
                            std::to_string(n));
  }
  // C(n, z) for z = 0..n by the multiplicative recurrence.
  std::vector<BigInt> binom(n + 1);
  binom[0] = 1;
  for (std::uint64_t z = 1; z <= n; ++z) binom[z] = binom[z - 1] * (n - z + 1) / z;
  const BigInt total = BigInt(1) << static_cast<unsigned>(n);

  std::vector<D1Atom> atoms;
  // |2z - n| ascending: z from floor(n/2) down to 0, mirrored by n - z.
  for (std::uint64_t z = n / 2 + 1; z-- > 0;) {
    const std::uint64_t mirror = n - z;
    BigInt ways = binom[z];
    if (mirror != z) ways += binom[mirror];
    atoms.push_back({mirror - z, n, BigRational(ways, total)});
  }
  return atoms;
}

D1Calibration calibrate_d1(std::uint64_t master_seed, std::uint64_t trials, std::uint64_t n,
                           RunOptions options) {
  const auto exact = exact_d1_distribution(n);
  if (trials < 1) throw PreconditionError("calibration needs at least one trial");

  std::vector<std::uint32_t> numerators(trials);
  parallel_for(trials, options.threads, [&](std::uint64_t trial) {
    const BitSequence t = generate(Seed{master_seed, trial}, n);
    numerators[trial] = static_cast<std::uint32_t>(d1(t, n).numerator);
  });

  D1Calibration out;
  out.n = n;
  out.trials = trials;
  out.counts.assign(n + 1, 0);
  for (const auto v : numerators) ++out.counts[v];

  double tv = 0;
  std::vector<bool> seen(n + 1, false);
  for (const auto& atom : exact) {
    const double p = atom.probability.convert_to<double>();
    const double q = static_cast<double>(out.counts[atom.value_numerator]) /
                     static_cast<double>(trials);
    tv += std::fabs(p - q);
    seen[atom.value_numerator] = true;
  }
  for (std::uint64_t v = 0; v <= n; ++v) {
    if (!seen[v]) tv += static_cast<double>(out.counts[v]) / static_cast<double>(trials);
  }
  out.total_variation = tv / 2;
  return out;
}

TrendReport trend(const ExperimentResult& result, std::size_t schedule) {
  const auto& sr = result.schedules.at(schedule);
  TrendReport report;
  report.name = sr.name;
  for (const auto& stats : sr.checkpoints) {
    if (stats.n < result.spec.n0) continue;
    report.checkpoints.push_back(stats.n);
    report.medians.push_back(stats.median);
  }
  if (report.medians.empty()) return report;

  report.strictly_decreasing = true;
  for (std::size_t i = 1; i < report.medians.size(); ++i) {
    if (!(report.medians[i] < report.medians[i - 1])) report.strictly_decreasing = false;
  }
  const DiscrepancyValue first = report.medians.front();
  const DiscrepancyValue half_first{first.numerator, 2 * first.denominator};
  report.bounded_below_by_half_first = std::all_of(
      report.medians.begin(), report.medians.end(),
      [&](const DiscrepancyValue& m) { return m >= half_first; });
  const auto lowest = *std::min_element(report.medians.begin(), report.medians.end());
  report.floor_ratio = first.numerator == 0 ? 0.0 : lowest.to_double() / first.to_double();
  return report;
}

RegimeComparison regime_compare(const ExperimentSpec& a, const ExperimentSpec& b,
                                RunOptions options) {
  if (a.length != b.length || a.trials != b.trials || a.checkpoints != b.checkpoints) {
    throw PreconditionError("regime comparison needs equal N, M, and checkpoints");
  }
  const auto ra = run(a, options);
  const auto rb = run(b, options);
  RegimeComparison out;
  for (std::size_t s = 0; s < ra.schedules.size(); ++s) out.regime_a.push_back(trend(ra, s));
  for (std::size_t s = 0; s < rb.schedules.size(); ++s) out.regime_b.push_back(trend(rb, s));
  return out;
}

}  // namespace blockdisc
