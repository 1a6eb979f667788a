#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "blockdisc/bitseq.hpp"
#include "blockdisc/discrepancy.hpp"
#include "blockdisc/errors.hpp"
#include "blockdisc/montecarlo.hpp"
#include "blockdisc/report.hpp"
#include "blockdisc/thresholds.hpp"

namespace blockdisc::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::string slurp(const std::string& path, std::istream& stdin_stream) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(stdin_stream), {});
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(file), {});
}

template <typename Writer>
void write_output(const std::string& path, std::ostream& stdout_stream, bool binary,
                  Writer&& writer) {
  if (path == "-") {
    writer(stdout_stream);
    stdout_stream.flush();
    if (!stdout_stream) throw IoError("write to standard output failed");
    return;
  }
  std::ofstream file(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  writer(file);
  file.close();
  if (!file) throw IoError("write to '" + path + "' failed");
}

// Packed when the 8-byte header matches the file size exactly, text otherwise.
bool looks_packed(const std::string& bytes) {
  if (bytes.size() < 8) return false;
  std::uint64_t length = 0;
  for (int i = 7; i >= 0; --i) {
    length = (length << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]);
  }
  if (length > (std::uint64_t{1} << 60)) return false;
  return bytes.size() == 8 + (length + 7) / 8;
}

BitSequence load_sequence(const std::string& path, const std::string& format, std::istream& in) {
  const std::string bytes = slurp(path, in);
  const bool packed = format == "packed" || (format == "auto" && looks_packed(bytes));
  std::istringstream stream(bytes);
  return packed ? read_packed(stream) : read_text(stream);
}

ThresholdFn schedule_flag(const std::string& text) {
  try {
    return parse_schedule(text, std::filesystem::current_path());
  } catch (const DataError& e) {
    throw UsageError(std::string("--s-spec: ") + e.what());
  }
}

std::vector<std::uint64_t> parse_list(const std::string& text, const char* flag) {
  std::vector<std::uint64_t> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError(std::string(flag) + ": expected comma-separated integers, got '" + text +
                       "'");
    }
    values.push_back(std::stoull(part));
  }
  return values;
}

int cmd_gen(const Streams& io, std::uint64_t seed, std::uint64_t stream, std::int64_t length,
            const std::string& out_path, const std::string& format) {
  const BitSequence t = generate(Seed{seed, stream}, static_cast<std::size_t>(length));
  write_output(out_path, io.out, format == "packed", [&](std::ostream& os) {
    if (format == "packed") {
      write_packed(os, t);
    } else {
      write_text(os, t);
    }
  });
  return kOk;
}

int cmd_disc(const Streams& io, const std::string& in_path, const std::string& format,
             unsigned k, std::uint64_t n, unsigned k_max) {
  const BitSequence t = load_sequence(in_path, format, io.in);
  const auto d = dk(t, k, n, DiscrepancyOptions{k_max});
  io.out << d.numerator << ' ' << d.denominator << '\n';
  return kOk;
}

int cmd_phi(const Streams& io, const std::string& spec, std::optional<std::uint64_t> single,
            const std::string& range) {
  const ThresholdFn s = schedule_flag(spec);
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  if (single) {
    lo = hi = *single;
  } else {
    const auto colon = range.find(':');
    if (colon == std::string::npos) throw UsageError("--range expects <from>:<to>");
    const auto from = parse_list(range.substr(0, colon), "--range");
    const auto to = parse_list(range.substr(colon + 1), "--range");
    if (from.size() != 1 || to.size() != 1 || to[0] < from[0]) {
      throw UsageError("--range expects <from>:<to> with from <= to");
    }
    lo = from[0];
    hi = to[0];
  }
  if (lo < 2) throw UsageError("phi is defined for n >= 2");
  if (hi > s.horizon()) {
    throw UsageError("n = " + std::to_string(hi) + " exceeds the schedule horizon " +
                     std::to_string(s.horizon()));
  }
  bool any_hazard = false;
  std::string buffer;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    const auto v = phi(s, n);
    any_hazard = any_hazard || v.hazard;
    buffer += std::to_string(n) + ' ' + std::to_string(v.value) + (v.hazard ? " hazard\n" : " ok\n");
    if (buffer.size() > (1 << 16)) {
      io.out << buffer;
      buffer.clear();
    }
  }
  io.out << buffer;
  if (any_hazard) io.err << "blockdisc: floor-boundary hazard in requested range\n";
  return any_hazard ? kHazard : kOk;
}

int cmd_admit(const Streams& io, const std::string& spec, std::uint64_t horizon) {
  const ThresholdFn s = schedule_flag(spec);
  if (horizon < 2) throw UsageError("--horizon must be >= 2");
  if (horizon > s.horizon()) throw UsageError("--horizon exceeds the schedule horizon");
  const auto r = admissible(s, horizon);
  io.out << "horizon " << r.horizon << '\n'
         << "min_phi " << r.min_phi << " at " << r.min_phi_at << '\n'
         << "nonnegative " << (r.nonnegative ? "yes" : "no") << '\n'
         << "final_tail_min " << r.final_tail_min << '\n';
  for (const auto& [value, n] : r.tail_min_steps) {
    io.out << "tail_min_reaches " << value << " at " << n << '\n';
  }
  io.out << "diverging_up_to_horizon " << (r.diverging_up_to_horizon ? "yes" : "no")
         << " (heuristic)\n"
         << "hazards " << r.hazard_points.size() << '\n';
  return r.hazard_points.empty() ? kOk : kHazard;
}

int cmd_profile(const Streams& io, const std::string& in_path, const std::string& format,
                const std::string& spec, const std::string& checkpoints,
                const std::string& geometric, const std::string& out_path, unsigned k_max) {
  const ThresholdFn s = schedule_flag(spec);
  std::vector<std::uint64_t> points;
  if (!checkpoints.empty()) {
    points = parse_list(checkpoints, "--checkpoints");
  } else {
    std::string g = geometric;
    for (auto& c : g) {
      if (c == ':') c = ',';
    }
    const auto parts = parse_list(g, "--geometric");
    if (parts.size() != 3) throw UsageError("--geometric expects <lo>:<hi>:<count>");
    try {
      points = geometric_checkpoints(parts[0], parts[1], parts[2]);
    } catch (const PreconditionError& e) {
      throw UsageError(std::string("--geometric: ") + e.what());
    }
  }
  const BitSequence t = load_sequence(in_path, format, io.in);
  const auto result = profile(t, s, points, DiscrepancyOptions{k_max});
  write_output(out_path, io.out, false,
               [&](std::ostream& os) { report::emit_profile_csv(os, result); });
  return kOk;
}

int cmd_exp(const Streams& io, const std::string& spec_path, unsigned threads,
            const std::string& out_path, const std::string& csv_path,
            const std::string& timestamp) {
  const std::string text = slurp(spec_path, io.in);
  ExperimentSpec spec;
  try {
    const auto base = spec_path == "-" ? std::filesystem::current_path()
                                       : std::filesystem::absolute(spec_path).parent_path();
    spec = report::spec_from_json(nlohmann::json::parse(text), base);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("spec file: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("spec file: ") + e.what());
  }
  validate(spec);
  io.err << "blockdisc: running " << spec.trials << " trials of N = " << spec.length << " on "
         << threads << " thread(s)\n";
  const auto result = run(spec, RunOptions{threads});
  const auto doc = report::make_document(result, timestamp.empty() ? report::utc_timestamp()
                                                                   : timestamp);
  write_output(out_path, io.out, false, [&](std::ostream& os) { os << report::emit_json(doc); });
  if (!csv_path.empty()) {
    write_output(csv_path, io.out, false,
                 [&](std::ostream& os) { report::emit_experiment_csv(os, result); });
  }
  io.err << "blockdisc: digest " << report::canonical_digest(doc) << '\n';
  return kOk;
}

int cmd_dist(const Streams& io, std::uint64_t n) {
  if (n < 1 || n > 64) throw UsageError("--n must be in [1, 64]");
  const auto atoms = exact_d1_distribution(n);
  report::emit_distribution_csv(io.out, atoms);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  const Streams io{in, out, err};
  CLI::App app{"Exact block discrepancies and threshold experiments for binary sequences",
               "blockdisc"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::int64_t length = 0;
  std::string out_path = "-";
  std::string format = "text";
  auto* gen = app.add_subcommand("gen", "Generate a seeded fair-coin bit sequence");
  gen->add_option("--seed", seed, "Master seed")->capture_default_str();
  gen->add_option("--stream", stream, "Stream index")->capture_default_str();
  gen->add_option("--length", length, "Number of bits")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--out", out_path, "Output path or -")->capture_default_str();
  gen->add_option("--format", format, "text or packed")
      ->check(CLI::IsMember({"text", "packed"}))
      ->capture_default_str();

  std::string in_path = "-";
  std::string in_format = "auto";
  unsigned k = 1;
  std::uint64_t n = 0;
  unsigned k_max = kDefaultMaxBlockLength;
  auto* disc = app.add_subcommand("disc", "Print D_k(t, n) as 'numerator denominator'");
  disc->add_option("--in", in_path, "Input path or -")->capture_default_str();
  disc->add_option("--format", in_format, "auto, text or packed")
      ->check(CLI::IsMember({"auto", "text", "packed"}))
      ->capture_default_str();
  disc->add_option("--k", k, "Block length")->check(CLI::PositiveNumber)->capture_default_str();
  disc->add_option("--n", n, "Number of windows")->required()->check(CLI::PositiveNumber);
  disc->add_option("--k-max", k_max, "Largest permitted block length")->capture_default_str();

  std::string s_spec;
  std::optional<std::uint64_t> phi_n;
  std::string range;
  auto* phi_cmd = app.add_subcommand("phi", "Print phi_s(n) with floor-boundary hazard flags");
  phi_cmd->add_option("--s-spec", s_spec, "const:<v> | form:<a>,<b>,<c> | table:<path> | phi-of:<spec>")
      ->required();
  auto* phi_single = phi_cmd->add_option("--n", phi_n, "Single n");
  auto* phi_range = phi_cmd->add_option("--range", range, "<from>:<to>");
  phi_single->excludes(phi_range);

  std::uint64_t horizon = 0;
  auto* admit = app.add_subcommand("admit", "Finite-prefix admissibility report for a schedule");
  admit->add_option("--s-spec", s_spec, "Schedule")->required();
  admit->add_option("--horizon", horizon, "Largest n")->required();

  std::string checkpoints;
  std::string geometric;
  auto* prof = app.add_subcommand("profile", "CSV of D_{s(n)}(t, n) at checkpoints");
  prof->add_option("--in", in_path, "Input path or -")->capture_default_str();
  prof->add_option("--format", in_format, "auto, text or packed")
      ->check(CLI::IsMember({"auto", "text", "packed"}))
      ->capture_default_str();
  prof->add_option("--s-spec", s_spec, "Schedule")->required();
  auto* prof_list = prof->add_option("--checkpoints", checkpoints, "Comma-separated n values");
  auto* prof_geo = prof->add_option("--geometric", geometric, "<lo>:<hi>:<count>");
  prof_list->excludes(prof_geo);
  prof->add_option("--out", out_path, "Output path or -")->capture_default_str();
  prof->add_option("--k-max", k_max, "Largest permitted block length")->capture_default_str();

  std::string spec_file;
  unsigned threads = 1;
  std::string csv_path;
  std::string timestamp;
  auto* exp = app.add_subcommand("exp", "Run a seeded Monte Carlo experiment");
  exp->add_option("--spec-file", spec_file, "Experiment spec JSON or -")->required();
  exp->add_option("--threads", threads, "Worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  exp->add_option("--out", out_path, "Result JSON path or -")->capture_default_str();
  exp->add_option("--csv", csv_path, "Also write the per-checkpoint CSV here");
  exp->add_option("--timestamp", timestamp, "Fixed generated_at value");

  std::uint64_t dist_n = 0;
  auto* dist = app.add_subcommand("dist", "Exact distribution of D(t, n) for 1 <= n <= 64");
  dist->add_option("--n", dist_n, "Prefix length")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out, cli_err;
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(io, seed, stream, length, out_path, format);
    if (disc->parsed()) return cmd_disc(io, in_path, in_format, k, n, k_max);
    if (phi_cmd->parsed()) {
      if (!phi_n && range.empty()) throw UsageError("phi needs --n or --range");
      return cmd_phi(io, s_spec, phi_n, range);
    }
    if (admit->parsed()) return cmd_admit(io, s_spec, horizon);
    if (prof->parsed()) {
      if (checkpoints.empty() && geometric.empty()) {
        throw UsageError("profile needs --checkpoints or --geometric");
      }
      return cmd_profile(io, in_path, in_format, s_spec, checkpoints, geometric, out_path, k_max);
    }
    if (exp->parsed()) return cmd_exp(io, spec_file, threads, out_path, csv_path, timestamp);
    if (dist->parsed()) return cmd_dist(io, dist_n);
  } catch (const UsageError& e) {
    err << "blockdisc: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "blockdisc: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    err << "blockdisc: data error: " << e.what() << '\n';
    return kData;
  } catch (const PreconditionError& e) {
    err << "blockdisc: infeasible: " << e.what() << '\n';
    return kData;
  } catch (const ResourceError& e) {
    err << "blockdisc: resource limit: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace blockdisc::cli
