#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "selfdiff/lattice.hpp"
#include "selfdiff/random.hpp"

namespace selfdiff {

/// Grid, jump model and their index tables, shared by all trajectories.
class KMCSystem {
 public:
  KMCSystem(JumpModel model, Grid grid);

  const JumpModel& model() const noexcept { return model_; }
  const Grid& grid() const noexcept { return grid_; }
  const JumpTables& tables() const noexcept { return tables_; }
  int num_sites() const noexcept { return grid_.size(); }

 private:
  JumpModel model_;
  Grid grid_;
  JumpTables tables_;
};

struct KMCParams {
  double T = 300.0;
  /// Total budget; each density uses ceil(nhat / (ell + 1)) trajectories.
  std::uint64_t nhat = 30000;
  /// Drift directions evaluated from the same trajectories.
  std::vector<std::vector<double>> us{{1.0, 0.0}};
  int threads = 1;
  /// Record the running alpha every this many trajectories (0: off).
  std::uint64_t trace_every = 0;

  void validate(int dim) const;
  std::uint64_t trajectories(int ell) const { return (nhat + static_cast<std::uint64_t>(ell)) / (static_cast<std::uint64_t>(ell) + 1); }
};

struct EventCounts {
  std::uint64_t events = 0;   ///< clock rings before T
  std::uint64_t blocked = 0;  ///< rings whose target was occupied
  std::uint64_t tagged_jumps = 0;

  EventCounts& operator+=(const EventCounts& o) {
    events += o.events;
    blocked += o.blocked;
    tagged_jumps += o.tagged_jumps;
    return *this;
  }
};

/// Called after every accepted jump with the environment seen from the tagged
/// particle and its unwrapped displacement.
using KMCObserver = std::function<void(const Configuration&, const LatticeVector&)>;

/// One trajectory up to time T from a uniform configuration of weight ell.
/// Returns the tagged particle's displacement in Z^d.
LatticeVector simulate_one(const KMCSystem& sys, int ell, double T, Rng& rng, EventCounts* counts = nullptr,
                           const KMCObserver& observer = {});

struct KMCEstimate {
  int ell = 0;
  std::uint64_t trajectories = 0;
  /// alpha[j] = sum_i <u_j, w_i>^2 / (T N_s), approximating u^T D u / 2.
  std::vector<double> alpha;
  /// Standard error of alpha[j] from the spread over trajectories.
  std::vector<double> stderr_alpha;
  /// trace[j]: (trajectories so far, running alpha for u_j).
  std::vector<std::vector<std::pair<std::uint64_t, double>>> trace;
  EventCounts counts;
};

/// Long-time mean-square displacement estimate at density ell / N. Trajectory i uses
/// the stream derive_seed(seed, "kmc", {ell, i}); sums are taken in trajectory order.
KMCEstimate kmc_estimate(const KMCSystem& sys, int ell, const KMCParams& params, std::uint64_t seed);

}  // namespace selfdiff
