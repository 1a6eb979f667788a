#include "blockdisc/report.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "blockdisc/errors.hpp"

namespace blockdisc::report {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line_no) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw DataError("line " + std::to_string(line_no) + ": expected an unsigned integer, got '" +
                    text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": integer out of range '" + text + "'");
  }
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing member '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("member '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_member(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("member '") + key + "': " + e.what());
  }
}

std::vector<std::uint64_t> checkpoints_from_json(const json& plan) {
  if (plan.is_array()) {
    try {
      return plan.get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
      throw DataError(std::string("checkpoints: ") + e.what());
    }
  }
  if (!plan.is_object()) throw DataError("checkpoints must be a list or a plan object");
  try {
    if (plan.contains("dyadic")) {
      const auto& d = plan.at("dyadic");
      return dyadic_checkpoints(required<unsigned>(d, "from"), required<unsigned>(d, "to"));
    }
    if (plan.contains("geometric")) {
      const auto& g = plan.at("geometric");
      return geometric_checkpoints(required<std::uint64_t>(g, "lo"),
                                   required<std::uint64_t>(g, "hi"),
                                   required<std::size_t>(g, "count"));
    }
  } catch (const PreconditionError& e) {
    throw DataError(std::string("checkpoints: ") + e.what());
  }
  throw DataError("checkpoint plan must contain 'dyadic' or 'geometric'");
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t length) {
  if (length < 1) throw DataError("length must be >= 1");
  const unsigned top = static_cast<unsigned>(std::bit_width(length) - 1);
  return dyadic_checkpoints(std::min(12u, top), top);
}

}  // namespace

std::string format_float17(double value) {
  if (!std::isfinite(value)) return value != value ? "nan" : (value > 0 ? "inf" : "-inf");
  char sci[64];
  std::snprintf(sci, sizeof sci, "%.16e", value);
  const char* e = std::strchr(sci, 'e');
  const int exponent = e ? std::atoi(e + 1) : 0;
  const int decimals = value == 0 ? 16 : std::max(0, 16 - exponent);
  char fixed[512];
  std::snprintf(fixed, sizeof fixed, "%.*f", decimals, value);
  return fixed;
}

void emit_profile_csv(std::ostream& out, std::span<const ProfilePoint> points) {
  out << kProfileHeader << '\n';
  for (const auto& p : points) {
    out << p.n << ',' << p.k << ',' << p.d.numerator << ',' << p.d.denominator << ','
        << format_float17(p.d.to_double()) << '\n';
  }
}

std::vector<ProfilePoint> parse_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("profile CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kProfileHeader) throw DataError("unexpected profile CSV header '" + line + "'");
  std::vector<ProfilePoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw DataError("line " + std::to_string(line_no) + ": expected 5 fields");
    }
    ProfilePoint p;
    p.n = parse_u64(fields[0], line_no);
    p.k = static_cast<unsigned>(parse_u64(fields[1], line_no));
    p.d.numerator = parse_u64(fields[2], line_no);
    p.d.denominator = parse_u64(fields[3], line_no);
    if (p.d.denominator == 0) {
      throw DataError("line " + std::to_string(line_no) + ": zero denominator");
    }
    points.push_back(p);
  }
  return points;
}

void emit_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  out << kExperimentHeader << '\n';
  const auto& checkpoints = result.spec.checkpoints;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    for (std::size_t s = 0; s < result.schedules.size(); ++s) {
      const auto& sr = result.schedules[s];
      const auto& stats = sr.checkpoints[c];
      out << stats.n << ',' << sr.name << ',' << format_float17(stats.median.to_double()) << ','
          << format_float17(stats.q10.to_double()) << ','
          << format_float17(stats.q90.to_double()) << ','
          << format_float17(result.pass_fraction(s)) << '\n';
    }
  }
}

void emit_distribution_csv(std::ostream& out, std::span<const D1Atom> atoms) {
  out << kDistributionHeader << '\n';
  for (const auto& a : atoms) {
    out << a.value_numerator << ',' << a.value_denominator << ','
        << boost::multiprecision::numerator(a.probability).str() << ','
        << boost::multiprecision::denominator(a.probability).str() << '\n';
  }
}

json to_json(const DiscrepancyValue& d) { return json{{"num", d.numerator}, {"den", d.denominator}}; }

DiscrepancyValue discrepancy_from_json(const json& j) {
  DiscrepancyValue d{required<std::uint64_t>(j, "num"), required<std::uint64_t>(j, "den")};
  if (d.denominator == 0) throw DataError("discrepancy with zero denominator");
  return d;
}

json spec_to_json(const ExperimentSpec& spec) {
  json schedules = json::array();
  for (const auto& s : spec.schedules) {
    if (s.schedule.label().empty()) {
      throw PreconditionError("schedule '" + s.name + "' has no mini-language label to echo");
    }
    schedules.push_back({{"name", s.name}, {"s", s.schedule.label()}});
  }
  return json{{"seed", spec.seed},
              {"trials", spec.trials},
              {"length", spec.length},
              {"checkpoints", spec.checkpoints},
              {"schedules", std::move(schedules)},
              {"epsilon", spec.epsilon},
              {"n0", spec.n0},
              {"k_max", spec.k_max}};
}

ExperimentSpec spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  spec.seed = required<std::uint64_t>(j, "seed");
  spec.trials = required<std::uint64_t>(j, "trials");
  spec.length = required<std::uint64_t>(j, "length");
  spec.checkpoints = j.contains("checkpoints") ? checkpoints_from_json(j.at("checkpoints"))
                                               : default_checkpoints(spec.length);
  spec.epsilon = optional_member<double>(j, "epsilon", spec.epsilon);
  spec.n0 = optional_member<std::uint64_t>(j, "n0", spec.n0);
  spec.k_max = optional_member<unsigned>(j, "k_max", spec.k_max);
  if (!j.contains("schedules") || !j.at("schedules").is_array()) {
    throw DataError("experiment spec needs a 'schedules' array");
  }
  for (const auto& entry : j.at("schedules")) {
    const auto text = required<std::string>(entry, "s");
    const auto name = optional_member<std::string>(entry, "name", text);
    spec.schedules.push_back({name, parse_schedule(text, base_dir)});
  }
  return spec;
}

json result_to_json(const ExperimentResult& result) {
  json schedules = json::array();
  json trends = json::array();
  for (std::size_t s = 0; s < result.schedules.size(); ++s) {
    const auto& sr = result.schedules[s];
    json points = json::array();
    for (const auto& c : sr.checkpoints) {
      points.push_back({{"n", c.n},
                        {"k", c.k},
                        {"q10", to_json(c.q10)},
                        {"median", to_json(c.median)},
                        {"q90", to_json(c.q90)}});
    }
    schedules.push_back({{"name", sr.name},
                         {"label", sr.label},
                         {"checkpoints", std::move(points)},
                         {"pass_count", sr.pass_count},
                         {"pass_fraction", result.pass_fraction(s)},
                         {"pass_mask", sr.pass_mask}});
    trends.push_back(to_json(trend(result, s)));
  }
  return json{{"sequence_bits", result.sequence_bits},
              {"trials", result.spec.trials},
              {"schedules", std::move(schedules)},
              {"family_pass_count", result.family_pass_count},
              {"family_pass_fraction", result.family_pass_fraction()},
              {"family_pass_mask", result.family_pass_mask},
              {"trends", std::move(trends)}};
}

ExperimentResult result_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentResult result;
  result.spec = spec_from_json(j.at("spec"), base_dir);
  const json& payload = j.at("result");
  result.sequence_bits = required<std::uint64_t>(payload, "sequence_bits");
  result.family_pass_count = required<std::uint64_t>(payload, "family_pass_count");
  result.family_pass_mask = required<std::string>(payload, "family_pass_mask");
  for (const auto& entry : payload.at("schedules")) {
    ScheduleResult sr;
    sr.name = required<std::string>(entry, "name");
    sr.label = required<std::string>(entry, "label");
    sr.pass_count = required<std::uint64_t>(entry, "pass_count");
    sr.pass_mask = required<std::string>(entry, "pass_mask");
    for (const auto& c : entry.at("checkpoints")) {
      CheckpointStats stats;
      stats.n = required<std::uint64_t>(c, "n");
      stats.k = required<unsigned>(c, "k");
      stats.q10 = discrepancy_from_json(c.at("q10"));
      stats.median = discrepancy_from_json(c.at("median"));
      stats.q90 = discrepancy_from_json(c.at("q90"));
      sr.checkpoints.push_back(stats);
    }
    result.schedules.push_back(std::move(sr));
  }
  return result;
}

json to_json(const TrendReport& t) {
  json medians = json::array();
  for (const auto& m : t.medians) medians.push_back(to_json(m));
  return json{{"name", t.name},
              {"checkpoints", t.checkpoints},
              {"medians", std::move(medians)},
              {"strictly_decreasing", t.strictly_decreasing},
              {"bounded_below_by_half_first", t.bounded_below_by_half_first},
              {"floor_ratio", t.floor_ratio}};
}

ResultDocument make_document(const ExperimentResult& result, std::string generated_at) {
  ResultDocument doc;
  doc.spec = spec_to_json(result.spec);
  doc.result = result_to_json(result);
  doc.generated_at = std::move(generated_at);
  return doc;
}

std::string emit_json(const ResultDocument& doc) {
  const json j{{"schema_version", doc.schema_version},
               {"spec", doc.spec},
               {"result", doc.result},
               {"generated_at", doc.generated_at}};
  return j.dump(2) + "\n";
}

ResultDocument parse_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("result document is not valid JSON: ") + e.what());
  }
  ResultDocument doc;
  doc.schema_version = required<int>(j, "schema_version");
  if (doc.schema_version != kSchemaVersion) {
    throw DataError("unsupported schema_version " + std::to_string(doc.schema_version));
  }
  doc.spec = j.at("spec");
  doc.result = j.at("result");
  doc.generated_at = optional_member<std::string>(j, "generated_at", "");
  return doc;
}

std::string canonical_digest(const ResultDocument& doc) {
  const json j{{"schema_version", doc.schema_version}, {"spec", doc.spec}, {"result", doc.result}};
  const std::string canonical = j.dump();

  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), hash, &size, EVP_sha256(), nullptr) != 1) {
    throw ResourceError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * size);
  for (unsigned i = 0; i < size; ++i) {
    hex.push_back(kHex[hash[i] >> 4]);
    hex.push_back(kHex[hash[i] & 15]);
  }
  return hex;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace blockdisc::report
