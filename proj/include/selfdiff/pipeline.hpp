#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfdiff/diffusion.hpp"
#include "selfdiff/lattice.hpp"

namespace selfdiff {

enum class Route { Min, KMC, Both };

/// Everything a run needs. Parsed from `key = value` text; see README for the keys.
struct RunConfig {
  int dim = 2;
  int M = 1;
  std::vector<int> torus;  ///< nonempty: rectangular torus sides instead of M
  std::vector<LatticeVector> directions;  ///< empty: nearest-neighbor model
  std::vector<double> probabilities;
  Route route = Route::Both;
  int rank = 3;
  double eps = 1e-12;
  int max_updates = 420;
  int ntilde = 50;
  /// Weight classes up to this size are enumerated instead of sampled.
  std::uint64_t exact_limit = 4'000'000;
  double T = 300.0;
  std::uint64_t nhat = 30000;
  std::vector<std::vector<double>> us;  ///< empty: e_i and e_i + e_j
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "selfdiff_out";
  int threads = 1;
  /// Exit with a numerical failure when one ALS run meets more indefinite systems (-1: never).
  int indefinite_abort = -1;
  int repeats = 1;

  JumpModel model() const;
  Grid grid() const;
  std::vector<std::vector<double>> drift_directions() const;
  /// Throws ConfigError for inconsistent settings (missing seed, M below the jump length, ...).
  void validate() const;
  /// `key = value` lines that parse back to this configuration.
  std::vector<std::string> to_lines() const;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);
/// Applies one `key = value` setting; `line` is used in error messages.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, int line = 0);

std::vector<std::vector<double>> parse_vector_list(const std::string& text);

/// Thrown when a run stops on a numerical failure (exit code 3).
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Each command writes into cfg.out and returns a one-paragraph summary.
std::string cmd_solve(const RunConfig& cfg);
std::string cmd_evaluate(const RunConfig& cfg);
std::string cmd_kmc(const RunConfig& cfg);
std::string cmd_compare(const RunConfig& cfg);
std::string cmd_oracle(const RunConfig& cfg);

/// Curve of the minimization route for one repeat, from checkpoints in cfg.out.
DiffusionCurve evaluate_curve(const RunConfig& cfg, std::uint64_t seed, double* wall_seconds = nullptr);
DiffusionCurve kmc_curve(const RunConfig& cfg, std::uint64_t seed, double* wall_seconds = nullptr);

}  // namespace selfdiff
