#pragma once

// JSON experiment documents (schema version 1).
//
//   {
//     "schema": 1,
//     "model": {"kind": "sequence_p" | "schatten_p" | "max_norm", "p": 2, "dim": 2,
//               "scalars": "real" | "complex"},
//     "ensemble": {"atoms": [M, ...], "probs": [...]}
//               | {"mean": M, "perturbations": [D, ...], "weights": [...]}
//               | {"standard": "deterministic" | "nilpotent" | "diagonal" | "random",
//                  "rho": 1, "seed": 7},
//     "suite": "standard",            // instead of "ensemble"; "dim" is then ignored
//     "x": v, "functional": v,
//     "form": {"kind": "identity" | "truncation" | "rank_one" | "gram", "n": 1,
//              "vector": v, "gram": G},
//     "T": 1, "grid_points": 65, "n_values": [16, 64, 256], "trials": 1000,
//     "seed": 0, "epsilon": 0.1, "p_s": 2, "r": 4
//   }
//
// Matrices are lists of rows; vectors are flat lists (sequence and max_norm
// models) or matrices (Schatten models). Entries are numbers or [re, im].

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slln/convergence_lab.hpp"
#include "slln/errors.hpp"

namespace slln {

inline constexpr int kConfigSchemaVersion = 1;

/// Every schema violation found in one document.
class ConfigError : public InputError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct LoadedConfig {
  ExperimentConfig config;
  nlohmann::json normalized;  // input with every default filled in
  std::string hash;           // SHA-256 of normalized.dump()
};

/// Validates a document and fills defaults; throws ConfigError listing every problem.
LoadedConfig validate_config(const nlohmann::json& document);

/// Reads and validates a file; unreadable or unparsable files are ConfigErrors too.
LoadedConfig load_config(const std::filesystem::path& path);

/// Replaces the seed, keeping the normalized document and hash consistent.
void override_seed(LoadedConfig& loaded, std::uint64_t seed);

std::string sha256_hex(const std::string& bytes);

}  // namespace slln
