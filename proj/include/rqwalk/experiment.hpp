#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rqwalk/coin.hpp"
#include "rqwalk/walk.hpp"

namespace rqwalk {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "RQWALK_OUT_ROOT";
inline constexpr int kConfigSchemaVersion = 1;

// How the bulk coin is produced.
struct CoinSpec {
  enum class Kind { Permutation, Perturbed, TR, Hadamard, Explicit };
  Kind kind = Kind::Permutation;
  double delta = 0.0;        // Perturbed
  std::uint64_t coin_seed = 1;
  double t = 0.0, r = 1.0;   // TR family
  Eigen::MatrixXcd matrix;   // Explicit

  CoinMatrix build(const CoinPermutation& pi) const;
  nlohmann::json to_json() const;
  static CoinSpec from_json(const nlohmann::json& j);
};

struct ZGridSpec {
  int angles = 8;
  double offset = 1e-3;  // radii are 1 +- offset
  std::vector<cd> points() const;
  nlohmann::json to_json() const;
  static ZGridSpec from_json(const nlohmann::json& j);
};

struct GapSpec {
  std::vector<double> etas;        // default: 1e-3 .. 1e-1, half-decade steps
  double z_angle = 0.0;
  double z_circle_gap = 1e-6;      // |z| = 1 - gap
  nlohmann::json to_json() const;
  static GapSpec from_json(const nlohmann::json& j);
};

struct AppendixSpec {
  std::vector<double> radii{0.9, 0.99, 0.999};
  int grid = 1 << 16;
  std::vector<int> unitary_dims{32, 48, 64};
  std::vector<Coord> graf_window_sizes{16, 32, 48};
  int graf_samples = 200;
  double graf_z_offset = 1e-2;     // graf z radius = 1 - offset
  int conditional_nodes = 64;
  nlohmann::json to_json() const;
  static AppendixSpec from_json(const nlohmann::json& j);
};

// Full experiment configuration; every field has a default, so {} is valid.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  int d = 1;
  Coord L = 16;
  CoinSpec coin;
  std::optional<std::vector<int>> pi_images;  // default: canonical full cycle
  PhaseDistribution phases = PhaseDistribution::uniform();
  std::vector<double> s_list{0.5};
  ZGridSpec z_grid;
  int horizon = 200;
  int moment_order = 1;
  int samples = 100;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string out_dir;  // empty: derive from env root + run name
  Coord dist_min = 2;
  Coord dist_max = 0;   // 0 = L/2
  GapSpec gap;
  AppendixSpec appendix;

  CoinPermutation permutation() const;
  CoinMatrix build_coin() const;
  DisorderModel model() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& file);
};

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string code_version;
  std::string timestamp_utc;
  nlohmann::json config;
  std::vector<std::uint64_t> task_seeds;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

// C = C_pi exp(i delta' H) with H a seeded unit-norm Hermitian matrix and
// delta' tuned by bisection until ||C - C_pi|| = delta to 1e-10.
CoinMatrix perturbed_coin(const CoinPermutation& pi, double delta, std::uint64_t seed);

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& eng);

// FNV-1a of the canonical config dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

inline const std::vector<std::string> kSubcommands{"spectrum", "transport", "green",
                                                   "correlator", "gap", "appendix"};

// Executes one subcommand, writing manifest.json, results/*.csv, summary.json
// into the run directory.  Returns the run directory used.  Throws
// ConfigError for bad input, SolverError for numerical failures.
std::filesystem::path run_subcommand(const std::string& name, const ExperimentConfig& cfg);

// Run directory resolution: explicit out_dir if set, else
// $RQWALK_OUT_ROOT/<name>-seed<seed>-<hash8> (default root "runs").
std::filesystem::path resolve_run_dir(const std::string& name, const ExperimentConfig& cfg);

}  // namespace rqwalk
