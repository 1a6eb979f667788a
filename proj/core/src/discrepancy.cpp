#include "blockdisc/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <string>

#include "blockdisc/errors.hpp"

namespace blockdisc {
namespace {

void check_block_length(unsigned k, const DiscrepancyOptions& options) {
  if (k == 0) throw PreconditionError("block length k must be >= 1");
  if (k > options.k_max || k > 40) {
    throw ResourceError("block length " + std::to_string(k) + " exceeds k_max = " +
                        std::to_string(options.k_max));
  }
}

void check_horizon(std::size_t length, unsigned k, std::uint64_t n) {
  if (n == 0) throw PreconditionError("discrepancy needs n >= 1");
  const std::uint64_t required = n + k - 1;
  if (length < required) {
    throw PreconditionError("D_" + std::to_string(k) + "(t, " + std::to_string(n) +
                            ") needs a sequence of length >= " + std::to_string(required) +
                            ", have " + std::to_string(length));
  }
}

}  // namespace

BlockCountTable::BlockCountTable(unsigned k, DiscrepancyOptions options)
    : k_(k), options_(options) {
  check_block_length(k, options_);
  try {
    counts_.assign(std::size_t{1} << k_, 0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot allocate 2^" + std::to_string(k_) + " block counters");
  }
}

void BlockCountTable::advance(const BitSequence& t, std::uint64_t n) {
  if (n < n_) throw PreconditionError("count table cannot move backwards");
  if (n == n_) return;
  check_horizon(t.size(), k_, n);

  const std::uint64_t mask = (std::uint64_t{1} << k_) - 1;
  const std::uint64_t keep = mask >> 1;
  std::uint64_t reg = register_;
  if (n_ == 0) {
    reg = 0;
    for (unsigned j = 0; j + 1 < k_; ++j) reg = (reg << 1) | t[j];
  }
  std::uint64_t* counts = counts_.data();
  for (std::uint64_t i = n_; i < n; ++i) {
    const std::uint64_t w = ((reg << 1) | t[i + k_ - 1]) & mask;
    ++counts[w];
    reg = w & keep;
  }
  register_ = reg;
  n_ = n;
}

void BlockCountTable::rebuild(const BitSequence& t, unsigned k) {
  check_block_length(k, options_);
  const std::uint64_t n = n_;
  if (n != 0) check_horizon(t.size(), k, n);
  try {
    counts_.assign(std::size_t{1} << k, 0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot allocate 2^" + std::to_string(k) + " block counters");
  }
  k_ = k;
  n_ = 0;
  register_ = 0;
  advance(t, n);
}

DiscrepancyValue BlockCountTable::discrepancy() const {
  if (n_ == 0) throw PreconditionError("discrepancy needs n >= 1");
  const auto [lo, hi] = std::minmax_element(counts_.begin(), counts_.end());
  const auto scaled_hi = static_cast<unsigned __int128>(*hi) << k_;
  const auto scaled_lo = static_cast<unsigned __int128>(*lo) << k_;
  const unsigned __int128 n = n_;
  const unsigned __int128 above = scaled_hi > n ? scaled_hi - n : 0;
  const unsigned __int128 below = scaled_lo < n ? n - scaled_lo : 0;
  const unsigned __int128 worst = std::max(above, below);
  if (worst > std::numeric_limits<std::uint64_t>::max()) {
    throw ResourceError("discrepancy numerator overflows 64 bits");
  }
  return {static_cast<std::uint64_t>(worst), n_};
}

DiscrepancyValue d1(const BitSequence& t, std::uint64_t n) {
  if (n == 0) throw PreconditionError("D(t, n) needs n >= 1");
  const auto zeros = static_cast<std::uint64_t>(zeros_in_prefix(t, n));
  const std::uint64_t twice = 2 * zeros;
  return {twice > n ? twice - n : n - twice, n};
}

DiscrepancyValue dk(const BitSequence& t, unsigned k, std::uint64_t n,
                    DiscrepancyOptions options) {
  check_block_length(k, options);
  check_horizon(t.size(), k, n);
  BlockCountTable table(k, options);
  table.advance(t, n);
  return table.discrepancy();
}

unsigned block_length_at(const ThresholdFn& s, std::uint64_t n, std::size_t length,
                         DiscrepancyOptions options) {
  if (n == 0) throw PreconditionError("checkpoint n must be >= 1");
  const std::int64_t k = s(n);
  if (k < 1) {
    throw PreconditionError("schedule gives block length " + std::to_string(k) +
                            " < 1 at n = " + std::to_string(n));
  }
  if (k > static_cast<std::int64_t>(options.k_max)) {
    throw ResourceError("schedule gives block length " + std::to_string(k) + " > k_max = " +
                        std::to_string(options.k_max) + " at n = " + std::to_string(n));
  }
  const auto kk = static_cast<unsigned>(k);
  check_horizon(length, kk, n);
  return kk;
}

std::vector<ProfilePoint> profile(const BitSequence& t, const ThresholdFn& s,
                                  std::span<const std::uint64_t> checkpoints,
                                  DiscrepancyOptions options) {
  std::vector<unsigned> ks;
  ks.reserve(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw PreconditionError("checkpoints must be strictly ascending (position " +
                              std::to_string(i) + ")");
    }
    ks.push_back(block_length_at(s, checkpoints[i], t.size(), options));
  }

  std::vector<ProfilePoint> out;
  out.reserve(checkpoints.size());
  if (checkpoints.empty()) return out;

  BlockCountTable table(ks.front(), options);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (ks[i] != table.k()) table.rebuild(t, ks[i]);
    table.advance(t, checkpoints[i]);
    out.push_back({checkpoints[i], ks[i], table.discrepancy()});
  }
  return out;
}

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t lo, std::uint64_t hi,
                                                 std::size_t count) {
  if (lo == 0 || hi < lo) throw PreconditionError("geometric checkpoints need 1 <= lo <= hi");
  if (count == 0) return {};
  if (count == 1 || lo == hi) return {hi};
  std::vector<std::uint64_t> out;
  out.reserve(count);
  const long double a = std::log2(static_cast<long double>(lo));
  const long double b = std::log2(static_cast<long double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t n;
    if (i == 0) {
      n = lo;
    } else if (i + 1 == count) {
      n = hi;
    } else {
      const long double e = a + (b - a) * static_cast<long double>(i) /
                                    static_cast<long double>(count - 1);
      n = static_cast<std::uint64_t>(std::llround(std::exp2(e)));
      n = std::clamp(n, lo, hi);
    }
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

std::vector<std::uint64_t> dyadic_checkpoints(unsigned first_exp, unsigned last_exp) {
  if (last_exp < first_exp || last_exp > 62) {
    throw PreconditionError("dyadic checkpoints need first_exp <= last_exp <= 62");
  }
  std::vector<std::uint64_t> out;
  for (unsigned j = first_exp; j <= last_exp; ++j) out.push_back(std::uint64_t{1} << j);
  return out;
}

}  // namespace blockdisc
