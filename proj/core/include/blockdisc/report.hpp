#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blockdisc/discrepancy.hpp"
#include "blockdisc/montecarlo.hpp"

namespace blockdisc::report {

/// Bumped on any column or member change in the CSV/JSON layouts below.
inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kProfileHeader = "n,k,d_num,d_den,d_float";
inline constexpr const char* kExperimentHeader = "n,schedule,median,q10,q90,pass_fraction";
inline constexpr const char* kDistributionHeader = "value_num,value_den,prob_num,prob_den";

/// Fixed notation with 17 significant digits ("1.0000000000000000").
std::string format_float17(double value);

void emit_profile_csv(std::ostream& out, std::span<const ProfilePoint> points);
/// Reads the exact columns back; d_float is ignored. Throws DataError.
std::vector<ProfilePoint> parse_profile_csv(std::istream& in);

/// One row per (checkpoint, schedule), ascending n, schedules in spec order.
void emit_experiment_csv(std::ostream& out, const ExperimentResult& result);

void emit_distribution_csv(std::ostream& out, std::span<const D1Atom> atoms);

nlohmann::json to_json(const DiscrepancyValue& d);
DiscrepancyValue discrepancy_from_json(const nlohmann::json& j);

/// Spec echo; checkpoints are always written as an explicit list.
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Accepts the echo layout plus shorthand checkpoint plans:
///   "checkpoints": [n, ...]
///   "checkpoints": {"dyadic": {"from": j0, "to": j1}}
///   "checkpoints": {"geometric": {"lo": a, "hi": b, "count": c}}
/// Missing checkpoints default to 2^j for j = 12 .. floor(log2 length).
/// Relative table: paths in schedules resolve against `base_dir`.
/// Throws DataError on malformed input.
ExperimentSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

nlohmann::json result_to_json(const ExperimentResult& result);
/// Rebuilds a result from a document object holding "spec" and "result";
/// derived members (fractions, trends) are recomputed, not read.
ExperimentResult result_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const TrendReport& trend);

struct ResultDocument {
  int schema_version = kSchemaVersion;
  nlohmann::json spec;
  nlohmann::json result;
  /// Excluded from the digest.
  std::string generated_at;

  friend bool operator==(const ResultDocument&, const ResultDocument&) = default;
};

ResultDocument make_document(const ExperimentResult& result, std::string generated_at);

/// Sorted keys, two-space indent, trailing newline.
std::string emit_json(const ResultDocument& doc);
ResultDocument parse_json(std::string_view text);

/// Hex SHA-256 over the canonical serialization of (schema_version, spec, result).
std::string canonical_digest(const ResultDocument& doc);

/// Current UTC time as ISO-8601 with a trailing Z.
std::string utc_timestamp();

}  // namespace blockdisc::report
