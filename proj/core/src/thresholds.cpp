#include "blockdisc/thresholds.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "blockdisc/errors.hpp"

namespace blockdisc {
namespace {

bool near_integer(long double v) {
  return std::fabs(v - std::nearbyint(v)) < kFloorHazardWindow;
}

std::int64_t floor_to_int(long double v) { return static_cast<std::int64_t>(std::floor(v)); }

// Floor of v when the floor may be off by one: if v is within the hazard
// window of an integer r, the true floor is r-1 or r.
ThresholdSample floor_sample(long double v, bool exact) {
  ThresholdSample out{floor_to_int(v), false};
  out.hazard = !exact && near_integer(v);
  return out;
}

ThresholdSample eval_closed(const ThresholdFn::ClosedForm& f, std::uint64_t n) {
  long double v = f.c;
  bool exact = true;
  if (f.a != 0 || f.b != 0) {
    const LogTerms t = log_terms(n);
    if (f.a != 0) {
      v += f.a * t.lg;
      exact = exact && t.lg_exact;
    }
    if (f.b != 0) {
      v += f.b * t.lglg;
      exact = exact && t.lglg_exact;
    }
  }
  ThresholdSample out = floor_sample(v, exact);
  if (f.floor) {
    if (out.hazard) {
      // Candidates r-1 and r; the flag survives only if the clamp keeps them apart.
      const auto r = static_cast<std::int64_t>(std::nearbyint(v));
      out.hazard = std::max(r - 1, *f.floor) != std::max(r, *f.floor);
    }
    out.value = std::max(out.value, *f.floor);
  }
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

template <typename Int>
Int parse_int(const std::string& text, const char* what) {
  Int v{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw DataError(std::string("invalid ") + what + ": '" + text + "'");
  }
  return v;
}

long double parse_real(const std::string& text) {
  if (text.empty()) throw DataError("empty coefficient in form: schedule");
  char* end = nullptr;
  const long double v = std::strtold(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw DataError("invalid coefficient '" + text + "' in form: schedule");
  }
  return v;
}

}  // namespace

LogTerms log_terms(std::uint64_t n) {
  if (n == 0) throw PreconditionError("log2 undefined at n = 0");
  LogTerms t;
  if (std::has_single_bit(n)) {
    const auto e = static_cast<std::uint64_t>(std::countr_zero(n));
    t.lg = static_cast<long double>(e);
    t.lg_exact = true;
    if (e == 0) {
      t.lglg = -std::numeric_limits<long double>::infinity();
    } else if (std::has_single_bit(e)) {
      t.lglg = static_cast<long double>(std::countr_zero(e));
      t.lglg_exact = true;
    } else {
      t.lglg = std::log2(t.lg);
    }
  } else {
    t.lg = std::log2(static_cast<long double>(n));
    t.lglg = std::log2(t.lg);
  }
  return t;
}

ThresholdFn ThresholdFn::constant(std::int64_t v) {
  return ThresholdFn(ClosedForm{0, 0, static_cast<long double>(v), std::nullopt, kUnboundedHorizon})
      .with_label("const:" + std::to_string(v));
}

ThresholdFn ThresholdFn::closed_form(long double a, long double b, long double c,
                                     std::optional<std::int64_t> floor, std::uint64_t horizon) {
  return ThresholdFn(ClosedForm{a, b, c, floor, horizon});
}

ThresholdFn ThresholdFn::tabulated(std::vector<std::int64_t> values, std::vector<bool> hazards) {
  if (!hazards.empty() && hazards.size() != values.size()) {
    throw PreconditionError("hazard flags must match tabulated values");
  }
  if (values.empty()) throw PreconditionError("tabulated schedule needs at least one value");
  return ThresholdFn(Table{std::move(values), std::move(hazards)});
}

ThresholdFn ThresholdFn::phi_of(ThresholdFn inner) {
  std::string label = inner.label().empty() ? std::string{} : "phi-of:" + inner.label();
  return ThresholdFn(PhiOf{std::make_shared<const ThresholdFn>(std::move(inner))})
      .with_label(std::move(label));
}

ThresholdFn& ThresholdFn::with_label(std::string label) & {
  label_ = std::move(label);
  return *this;
}

ThresholdFn&& ThresholdFn::with_label(std::string label) && {
  label_ = std::move(label);
  return std::move(*this);
}

std::uint64_t ThresholdFn::first_n() const {
  return std::visit(
      [](const auto& r) -> std::uint64_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          if (r.b != 0) return 2;
          if (r.a != 0) return 1;
          return 0;
        } else if constexpr (std::is_same_v<T, Table>) {
          return 2;
        } else {
          return std::max<std::uint64_t>(2, r.inner->first_n());
        }
      },
      rep_);
}

std::uint64_t ThresholdFn::horizon() const {
  return std::visit(
      [](const auto& r) -> std::uint64_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          return r.horizon;
        } else if constexpr (std::is_same_v<T, Table>) {
          return r.values.size() + 1;
        } else {
          return r.inner->horizon();
        }
      },
      rep_);
}

ThresholdSample ThresholdFn::at(std::uint64_t n) const {
  if (n < first_n() || n > horizon()) {
    throw PreconditionError("schedule '" + label_ + "' undefined at n = " + std::to_string(n) +
                            " (domain [" + std::to_string(first_n()) + ", " +
                            std::to_string(horizon()) + "])");
  }
  return std::visit(
      [n](const auto& r) -> ThresholdSample {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          return eval_closed(r, n);
        } else if constexpr (std::is_same_v<T, Table>) {
          const auto i = static_cast<std::size_t>(n - 2);
          return {r.values[i], !r.hazards.empty() && r.hazards[i]};
        } else {
          return phi(*r.inner, n);
        }
      },
      rep_);
}

ThresholdSample phi(const ThresholdFn& s, std::uint64_t n) {
  if (n < 2) throw PreconditionError("phi requires n >= 2, got " + std::to_string(n));
  const ThresholdSample sn = s.at(n);
  const LogTerms t = log_terms(n);
  const long double margin = t.lg - t.lglg - static_cast<long double>(sn.value);
  ThresholdSample out = floor_sample(margin, t.lg_exact && t.lglg_exact);
  out.hazard = out.hazard || sn.hazard;
  return out;
}

ThresholdFn phi_fn(const ThresholdFn& s) { return ThresholdFn::phi_of(s); }

ThresholdFn tabulate(const ThresholdFn& s, std::uint64_t horizon) {
  if (horizon < 2) throw PreconditionError("tabulation horizon must be >= 2");
  if (s.first_n() > 2 || horizon > s.horizon()) {
    throw PreconditionError("schedule does not cover [2, " + std::to_string(horizon) + "]");
  }
  std::vector<std::int64_t> values;
  std::vector<bool> hazards;
  values.reserve(horizon - 1);
  hazards.reserve(horizon - 1);
  bool any_hazard = false;
  for (std::uint64_t n = 2; n <= horizon; ++n) {
    const auto v = s.at(n);
    values.push_back(v.value);
    hazards.push_back(v.hazard);
    any_hazard = any_hazard || v.hazard;
  }
  if (!any_hazard) hazards.clear();
  return ThresholdFn::tabulated(std::move(values), std::move(hazards)).with_label(s.label());
}

ThresholdFn parse_schedule(const std::string& text, const std::filesystem::path& base_dir) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DataError("schedule '" + text + "' lacks a kind prefix (const:, form:, table:, phi-of:)");
  }
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);

  if (kind == "const") {
    return ThresholdFn::constant(parse_int<std::int64_t>(body, "const: value"));
  }
  if (kind == "form") {
    std::vector<long double> coeffs;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) coeffs.push_back(parse_real(trim(part)));
    if (coeffs.size() != 3 || body.empty() || body.back() == ',') {
      throw DataError("form: schedule needs exactly three coefficients a,b,c; got '" + body + "'");
    }
    return ThresholdFn::closed_form(coeffs[0], coeffs[1], coeffs[2], 1).with_label(text);
  }
  if (kind == "table") {
    std::filesystem::path path(body);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schedule table '" + path.string() + "'");
    return read_schedule_csv(in).with_label(text);
  }
  if (kind == "phi-of") {
    return ThresholdFn::phi_of(parse_schedule(body, base_dir)).with_label(text);
  }
  throw DataError("unknown schedule kind '" + kind + "'");
}

ThresholdFn read_schedule_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "n,s") {
    throw DataError("schedule table must start with header 'n,s'");
  }
  std::vector<std::int64_t> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("schedule table line " + std::to_string(line_no) + " lacks a comma");
    }
    const auto n = parse_int<std::uint64_t>(trim(line.substr(0, comma)), "table n");
    const auto s = parse_int<std::int64_t>(trim(line.substr(comma + 1)), "table s");
    if (n != values.size() + 2) {
      throw DataError("schedule table line " + std::to_string(line_no) + ": expected n = " +
                      std::to_string(values.size() + 2) + ", got " + std::to_string(n));
    }
    values.push_back(s);
  }
  if (values.empty()) throw DataError("schedule table has no rows");
  return ThresholdFn::tabulated(std::move(values));
}

void write_schedule_csv(std::ostream& out, const ThresholdFn& s, std::uint64_t horizon) {
  out << "n,s\n";
  for (std::uint64_t n = 2; n <= horizon; ++n) out << n << ',' << s(n) << '\n';
}

AdmissibilityReport admissible(const ThresholdFn& s, std::uint64_t horizon) {
  if (horizon < 2) throw PreconditionError("admissibility horizon must be >= 2");
  if (horizon > s.horizon()) {
    throw PreconditionError("schedule horizon " + std::to_string(s.horizon()) +
                            " is shorter than requested " + std::to_string(horizon));
  }
  constexpr auto kNone = std::numeric_limits<std::int64_t>::max();

  AdmissibilityReport report;
  report.horizon = horizon;
  const std::size_t count = horizon - 1;
  std::vector<std::int64_t> values(count);
  std::vector<bool> hazard(count, false);
  report.min_phi = kNone;
  for (std::uint64_t n = 2; n <= horizon; ++n) {
    const auto v = phi(s, n);
    const std::size_t i = n - 2;
    values[i] = v.value;
    hazard[i] = v.hazard;
    if (v.hazard) {
      report.hazard_points.push_back(n);
    } else if (v.value < report.min_phi) {
      report.min_phi = v.value;
      report.min_phi_at = n;
    }
  }
  if (report.min_phi == kNone) {
    // Every point hazard-flagged: nothing to report.
    report.min_phi = 0;
    return report;
  }
  report.nonnegative = report.min_phi >= 0;

  std::vector<std::int64_t> tail(count);
  std::int64_t running = kNone;
  for (std::size_t i = count; i-- > 0;) {
    if (!hazard[i]) running = std::min(running, values[i]);
    tail[i] = running;
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (tail[i] == kNone) break;
    if (report.tail_min_steps.empty() || report.tail_min_steps.back().first != tail[i]) {
      report.tail_min_steps.emplace_back(tail[i], i + 2);
    }
  }
  report.final_tail_min = report.tail_min_steps.back().first;
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(horizon)));
  report.diverging_up_to_horizon =
      report.tail_min_steps.size() >= 2 && report.tail_min_steps.back().second > root;
  return report;
}

FinitePrefixSeq invert(const FinitePrefixSeq& x) {
  FinitePrefixSeq out;
  if (x.values.empty()) return out;
  const auto top = *std::max_element(x.values.begin(), x.values.end());
  if (top >= (std::uint64_t{1} << 32)) {
    throw ResourceError("inverse of a prefix reaching " + std::to_string(top) + " is too long");
  }
  out.values.reserve(static_cast<std::size_t>(top) + 1);
  std::uint64_t next = 0;
  for (std::size_t m = 0; m < x.values.size(); ++m) {
    while (next <= x.values[m]) {
      out.values.push_back(m);
      ++next;
    }
  }
  return out;
}

FinitePrefixSeq dominate(const FinitePrefixSeq& y) {
  FinitePrefixSeq out;
  if (y.values.empty()) return out;
  const auto top = *std::max_element(y.values.begin(), y.values.end());
  if (top >= (std::uint64_t{1} << 32)) {
    throw ResourceError("dominating sequence for values up to " + std::to_string(top) +
                        " is too long");
  }
  // latest[v] = largest k with y(k) = v, plus one (0 = none).
  std::vector<std::uint64_t> latest(static_cast<std::size_t>(top) + 1, 0);
  for (std::size_t k = 0; k < y.values.size(); ++k) latest[y.values[k]] = k + 1;
  out.values.resize(latest.size());
  std::uint64_t best = 0;
  for (std::size_t m = 0; m < latest.size(); ++m) {
    best = std::max(best, latest[m]);
    out.values[m] = best == 0 ? 0 : best - 1;
  }
  return out;
}

PointwiseOrder compare(const FinitePrefixSeq& x, const FinitePrefixSeq& other) {
  if (x.horizon() != other.horizon()) {
    throw PreconditionError("cannot compare prefixes of horizons " + std::to_string(x.horizon()) +
                            " and " + std::to_string(other.horizon()));
  }
  bool some_less = false;
  bool some_greater = false;
  for (std::size_t i = 0; i < x.horizon(); ++i) {
    some_less = some_less || x[i] < other[i];
    some_greater = some_greater || x[i] > other[i];
  }
  if (some_less && some_greater) return PointwiseOrder::incomparable;
  if (some_less) return PointwiseOrder::less_equal;
  if (some_greater) return PointwiseOrder::greater_equal;
  return PointwiseOrder::equal;
}

std::string to_string(PointwiseOrder order) {
  switch (order) {
    case PointwiseOrder::equal: return "equal";
    case PointwiseOrder::less_equal: return "<=";
    case PointwiseOrder::greater_equal: return ">=";
    case PointwiseOrder::incomparable: return "incomparable";
  }
  return "?";
}

}  // namespace blockdisc
