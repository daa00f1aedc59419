#pragma once

// Output formats (schema version 1).
//
// JSONL: one object per trial, keys in this order:
//   config_hash, seed, trial, trial_seed, n, sup_error_sot,
//   [sup_error_wot], [sup_error_form], errors
// CSV: a provenance line "# config_hash=<hex> seed=<u64> schema=1", then
//   n,median_error,q10,q90,tail_freq,wilson_lo,wilson_hi
// Doubles are written with 17 significant digits so files round-trip.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "slln/convergence_lab.hpp"
#include "slln/trial_sweep.hpp"

namespace slln {

inline constexpr int kOutputSchemaVersion = 1;
inline constexpr const char* kSummaryHeader = "n,median_error,q10,q90,tail_freq,wilson_lo,wilson_hi";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const Provenance&) const = default;
};

std::string record_to_json_line(const TrialRecord& record, const Provenance& provenance);
TrialRecord record_from_json_line(const std::string& line, Provenance* provenance = nullptr);

/// Appends one line per record; IoError if the file cannot be opened.
void append_records(const std::filesystem::path& path, const std::vector<TrialRecord>& records,
                    const Provenance& provenance);

struct RecordFile {
  std::vector<Provenance> provenance;  // one per line
  std::vector<TrialRecord> records;
};
RecordFile read_records(const std::filesystem::path& path);

std::string summary_csv(const std::vector<SummaryRow>& rows, const Provenance& provenance);
/// Overwrites the file.
void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                   const Provenance& provenance);

/// Provenance of any output file (.jsonl or .csv); IoError if absent.
std::vector<Provenance> read_provenance(const std::filesystem::path& path);

/// Writes text to a file, replacing it; IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Filesystem-safe version of an ensemble label.
std::string file_stem(const std::string& label);

}  // namespace slln
