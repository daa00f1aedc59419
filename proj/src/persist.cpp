#include "slln/persist.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace slln {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write failed: " + path.string());
}

Provenance parse_comment(const std::string& line, const std::filesystem::path& path) {
  Provenance p;
  std::istringstream is(line.substr(1));
  std::string token;
  bool hash = false;
  bool seed = false;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "config_hash") {
      p.config_hash = value;
      hash = true;
    } else if (key == "seed") {
      p.seed = std::stoull(value);
      seed = true;
    }
  }
  if (!hash || !seed) throw IoError(path.string() + ": missing provenance line");
  return p;
}

}  // namespace

std::string record_to_json_line(const TrialRecord& record, const Provenance& provenance) {
  ordered_json j;
  j["config_hash"] = provenance.config_hash;
  j["seed"] = provenance.seed;
  j["trial"] = record.trial;
  j["trial_seed"] = record.seed;
  j["n"] = record.n;
  j["sup_error_sot"] = record.sup_error_sot;
  if (record.sup_error_wot) j["sup_error_wot"] = *record.sup_error_wot;
  if (record.sup_error_form) j["sup_error_form"] = *record.sup_error_form;
  j["errors"] = record.errors;
  return j.dump();
}

TrialRecord record_from_json_line(const std::string& line, Provenance* provenance) {
  try {
    const auto j = ordered_json::parse(line);
    TrialRecord r;
    r.trial = j.at("trial").get<std::uint64_t>();
    r.seed = j.at("trial_seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::uint64_t>();
    r.sup_error_sot = j.at("sup_error_sot").get<double>();
    if (j.contains("sup_error_wot")) r.sup_error_wot = j.at("sup_error_wot").get<double>();
    if (j.contains("sup_error_form")) r.sup_error_form = j.at("sup_error_form").get<double>();
    r.errors = j.at("errors").get<std::vector<double>>();
    if (provenance) *provenance = {j.at("config_hash").get<std::string>(), j.at("seed").get<std::uint64_t>()};
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("malformed record: ") + ex.what());
  }
}

void append_records(const std::filesystem::path& path, const std::vector<TrialRecord>& records,
                    const Provenance& provenance) {
  auto out = open_out(path, std::ios::app | std::ios::binary);
  for (const auto& r : records) out << record_to_json_line(r, provenance) << '\n';
  out.flush();
  check_written(out, path);
}

RecordFile read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  RecordFile file;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Provenance p;
    file.records.push_back(record_from_json_line(line, &p));
    file.provenance.push_back(std::move(p));
  }
  return file;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const Provenance& provenance) {
  std::ostringstream os;
  os << "# config_hash=" << provenance.config_hash << " seed=" << provenance.seed
     << " schema=" << kOutputSchemaVersion << '\n';
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << fmt(r.median_error) << ',' << fmt(r.q10) << ',' << fmt(r.q90) << ','
       << fmt(r.tail_freq) << ',' << fmt(r.wilson_lo) << ',' << fmt(r.wilson_hi) << '\n';
  }
  return os.str();
}

void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                   const Provenance& provenance) {
  write_text(path, summary_csv(rows, provenance));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::trunc | std::ios::binary);
  out << text;
  out.flush();
  check_written(out, path);
}

std::vector<Provenance> read_provenance(const std::filesystem::path& path) {
  if (path.extension() == ".jsonl") return read_records(path).provenance;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw IoError(path.string() + ": missing provenance line");
  }
  return {parse_comment(line, path)};
}

std::string file_stem(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '-';
    out += keep ? c : '_';
  }
  return out;
}

}  // namespace slln
