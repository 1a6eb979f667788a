#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace blockdisc {

/// An integer evaluation that may sit on a floor boundary the long double
/// arithmetic cannot resolve. Hazard-flagged values are best-effort.
struct ThresholdSample {
  std::int64_t value = 0;
  bool hazard = false;

  friend bool operator==(const ThresholdSample&, const ThresholdSample&) = default;
};

/// Distance to the nearest integer below which a non-exact evaluation is flagged.
inline constexpr long double kFloorHazardWindow = 1e-9L;

inline constexpr std::uint64_t kUnboundedHorizon = std::numeric_limits<std::uint64_t>::max();

/// log2 n and log2 log2 n in long double, with flags for the cases where the
/// value is exact (n a power of two; log2 n a power of two).
struct LogTerms {
  long double lg = 0;
  long double lglg = 0;
  bool lg_exact = false;
  bool lglg_exact = false;
};
LogTerms log_terms(std::uint64_t n);

/// Integer schedule n -> s(n).
///
/// Three representations share one interface:
///   closed form  floor(a*log2 n + b*log2 log2 n + c), optionally clamped below;
///   tabulated    explicit values for n = 2..horizon;
///   phi-of       n -> phi(inner, n), evaluated on demand over inner's domain.
class ThresholdFn {
 public:
  struct ClosedForm {
    long double a = 0;
    long double b = 0;
    long double c = 0;
    std::optional<std::int64_t> floor;
    std::uint64_t horizon = kUnboundedHorizon;
  };
  struct Table {
    std::vector<std::int64_t> values;  // values[i] = s(i + 2)
    std::vector<bool> hazards;         // empty or same size as values
  };
  struct PhiOf {
    std::shared_ptr<const ThresholdFn> inner;
  };

  /// s(n) = v for every n >= 0, no clamp.
  static ThresholdFn constant(std::int64_t v);
  /// floor(a*log2 n + b*log2 log2 n + c), then max with `floor` when set.
  static ThresholdFn closed_form(long double a, long double b, long double c,
                                 std::optional<std::int64_t> floor = 1,
                                 std::uint64_t horizon = kUnboundedHorizon);
  /// values[i] is s(i + 2). `hazards` may be empty.
  static ThresholdFn tabulated(std::vector<std::int64_t> values, std::vector<bool> hazards = {});
  static ThresholdFn phi_of(ThresholdFn inner);

  /// Throws PreconditionError outside [first_n(), horizon()].
  ThresholdSample at(std::uint64_t n) const;
  std::int64_t operator()(std::uint64_t n) const { return at(n).value; }

  std::uint64_t first_n() const;
  std::uint64_t horizon() const;

  bool is_tabulated() const { return std::holds_alternative<Table>(rep_); }
  const std::variant<ClosedForm, Table, PhiOf>& representation() const { return rep_; }

  /// Source text in the schedule mini-language, when known.
  const std::string& label() const { return label_; }
  ThresholdFn& with_label(std::string label) &;
  ThresholdFn&& with_label(std::string label) &&;

 private:
  explicit ThresholdFn(std::variant<ClosedForm, Table, PhiOf> rep) : rep_(std::move(rep)) {}

  std::variant<ClosedForm, Table, PhiOf> rep_;
  std::string label_;
};

/// phi_s(n) = floor(log2 n - log2 log2 n - s(n)) for n >= 2.
/// Exact when n = 2^(2^j); otherwise flagged when within kFloorHazardWindow
/// of an integer. Inherits s's hazard flag.
ThresholdSample phi(const ThresholdFn& s, std::uint64_t n);

/// n -> phi(s, n) over s's domain (restricted to n >= 2).
ThresholdFn phi_fn(const ThresholdFn& s);

/// Materializes s on [2, horizon] as a table, keeping hazard flags.
ThresholdFn tabulate(const ThresholdFn& s, std::uint64_t horizon);

/// Parses the schedule mini-language:
///   const:<v> | form:<a>,<b>,<c> | table:<path> | phi-of:<spec>
/// `form` is clamped below at 1. Relative table paths resolve against `base_dir`.
/// Throws DataError on malformed text or unreadable tables.
ThresholdFn parse_schedule(const std::string& text, const std::filesystem::path& base_dir = {});

/// Tabulated schedule CSV: header `n,s`, then consecutive n from 2.
ThresholdFn read_schedule_csv(std::istream& in);
void write_schedule_csv(std::ostream& out, const ThresholdFn& s, std::uint64_t horizon);

struct AdmissibilityReport {
  std::uint64_t horizon = 0;
  /// min phi_s over non-hazard n in [2, horizon].
  std::int64_t min_phi = 0;
  std::uint64_t min_phi_at = 0;
  bool nonnegative = false;
  /// Tail minimum min_{m >= n} phi_s(m) at n = horizon (equals phi_s(horizon)).
  std::int64_t final_tail_min = 0;
  /// (value, first n at which the tail minimum reaches it), ascending.
  std::vector<std::pair<std::int64_t, std::uint64_t>> tail_min_steps;
  /// Prefix surrogate for phi_s -> infinity; never a proof.
  bool diverging_up_to_horizon = false;
  bool heuristic = true;
  std::vector<std::uint64_t> hazard_points;
};

/// Finite-prefix check of "phi_s >= 0 and phi_s -> infinity".
///
/// The tail minimum is nondecreasing by construction. We call the prefix
/// diverging when the tail minimum rises at least once and its last rise
/// happens past sqrt(horizon), so a bound reached early is not mistaken for
/// growth.
AdmissibilityReport admissible(const ThresholdFn& s, std::uint64_t horizon);

/// Prefix x(0..H-1) of a sequence of naturals.
struct FinitePrefixSeq {
  std::vector<std::uint64_t> values;

  std::size_t horizon() const noexcept { return values.size(); }
  std::uint64_t operator[](std::size_t i) const noexcept { return values[i]; }
  friend bool operator==(const FinitePrefixSeq&, const FinitePrefixSeq&) = default;
};

/// x*(n) = min{m < H : x(m) >= n} for n = 0, 1, ... up to the first n with
/// no witness in the prefix. Output is nondecreasing.
FinitePrefixSeq invert(const FinitePrefixSeq& x);

/// x(m) = max{k < H : y(k) <= m} for m = 0 .. max_k y(k); an empty max is 0.
/// Then x*(n) <= y(n) wherever both are defined.
FinitePrefixSeq dominate(const FinitePrefixSeq& y);

enum class PointwiseOrder { equal, less_equal, greater_equal, incomparable };

/// Pointwise order; throws PreconditionError if the horizons differ.
PointwiseOrder compare(const FinitePrefixSeq& x, const FinitePrefixSeq& other);

std::string to_string(PointwiseOrder order);

}  // namespace blockdisc
