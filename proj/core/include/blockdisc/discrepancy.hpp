#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockdisc/bitseq.hpp"
#include "blockdisc/thresholds.hpp"

namespace blockdisc {

inline constexpr unsigned kDefaultMaxBlockLength = 28;

struct DiscrepancyOptions {
  /// Largest block length a count table may use (2^k_max counters).
  unsigned k_max = kDefaultMaxBlockLength;
};

/// Exact D_k(t, n) = max_w |2^k c_w - n| / n held as integers.
struct DiscrepancyValue {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double to_double() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }

  /// Rational comparison (cross-multiplied, no rounding).
  friend std::strong_ordering operator<=>(const DiscrepancyValue& a, const DiscrepancyValue& b) {
    const auto lhs = static_cast<unsigned __int128>(a.numerator) * b.denominator;
    const auto rhs = static_cast<unsigned __int128>(b.numerator) * a.denominator;
    return lhs <=> rhs;
  }
  friend bool operator==(const DiscrepancyValue& a, const DiscrepancyValue& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }
};

/// Overlapping k-window counts over t(0..n+k-2).
///
/// counts()[w] = |{i < n : (t(i), ..., t(i+k-1)) = w}| with w read most
/// significant bit first. The table remembers the last k-1 bits of the scan
/// so it can be extended to a longer prefix without rescanning.
class BlockCountTable {
 public:
  /// Throws ResourceError if k > options.k_max or the table cannot be allocated.
  explicit BlockCountTable(unsigned k, DiscrepancyOptions options = {});

  unsigned k() const noexcept { return k_; }
  std::uint64_t windows() const noexcept { return n_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  /// Counts windows n_, ..., n-1. Requires n >= windows() and t.size() >= n + k - 1.
  void advance(const BitSequence& t, std::uint64_t n);

  /// Switches to block length k and recounts the current prefix from scratch.
  void rebuild(const BitSequence& t, unsigned k);

  /// Current D_k over the counted windows; requires windows() >= 1.
  DiscrepancyValue discrepancy() const;

 private:
  unsigned k_;
  DiscrepancyOptions options_;
  std::uint64_t n_ = 0;
  std::uint64_t register_ = 0;  // bits t(n_), ..., t(n_+k-2), oldest highest
  std::vector<std::uint64_t> counts_;
};

/// D(t, n) = |2 * zeros(n) - n| / n. Requires 1 <= n <= t.size().
DiscrepancyValue d1(const BitSequence& t, std::uint64_t n);

/// D_k(t, n). Requires k >= 1, n >= 1, t.size() >= n + k - 1.
/// Throws ResourceError if k > options.k_max.
DiscrepancyValue dk(const BitSequence& t, unsigned k, std::uint64_t n,
                    DiscrepancyOptions options = {});

struct ProfilePoint {
  std::uint64_t n = 0;
  unsigned k = 0;
  DiscrepancyValue d;

  friend bool operator==(const ProfilePoint& a, const ProfilePoint& b) {
    return a.n == b.n && a.k == b.k && a.d.numerator == b.d.numerator &&
           a.d.denominator == b.d.denominator;
  }
};

/// Block length s(n) required at checkpoint n, validated against t's length
/// and options.k_max. Throws PreconditionError / ResourceError.
unsigned block_length_at(const ThresholdFn& s, std::uint64_t n, std::size_t length,
                         DiscrepancyOptions options = {});

/// D_{s(n)}(t, n) at every checkpoint in one left-to-right pass. The count
/// table is rebuilt whenever s(n) changes between checkpoints.
/// Checkpoints must be strictly ascending; all preconditions are checked
/// before any counting starts.
std::vector<ProfilePoint> profile(const BitSequence& t, const ThresholdFn& s,
                                  std::span<const std::uint64_t> checkpoints,
                                  DiscrepancyOptions options = {});

/// Distinct values round(2^(lo + i*(hi-lo)/(count-1))), ascending, both
/// endpoints included.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t lo, std::uint64_t hi,
                                                 std::size_t count);

/// 2^j for j = first_exp .. last_exp.
std::vector<std::uint64_t> dyadic_checkpoints(unsigned first_exp, unsigned last_exp);

}  // namespace blockdisc
