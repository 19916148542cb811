#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "selfdiff/objective.hpp"
#include "selfdiff/random.hpp"

namespace selfdiff {

struct ALSConfig {
  /// Relative change guard |v_old - v_new| > tolerance * |v_new|.
  double tolerance = 1e-12;
  /// Cap on single-site updates (counted mid-sweep).
  int max_updates = 420;
  ObjectiveScale scale = ObjectiveScale::Raw;
  /// Start from these cores instead of uniform [0,1] draws. Used for the first
  /// rank-1 term only by successive_minimize.
  std::optional<Rank1Function> initial;
  /// A 2x2 system counts as indefinite when its smaller eigenvalue is at most
  /// this fraction of the larger one's magnitude.
  double indefinite_rel_tol = 1e-13;
  /// Record the model value after every single-site update.
  bool trace_updates = false;

  void validate(int num_sites) const;
};

struct SolveReport {
  double initial_objective = 0.0;
  double final_objective = 0.0;
  /// A(Phi + R) after each completed (or cap-truncated) sweep.
  std::vector<double> sweep_objectives;
  /// Model value q(a*, b*) after each single-site update, when traced.
  std::vector<double> update_objectives;
  int updates = 0;
  int indefinite_count = 0;
  /// Updates rejected because the stationary point did not lower the model.
  int rejected_count = 0;
  bool converged = false;
  /// The optimized term was worse than adding nothing and was replaced by zero.
  bool zero_fallback = false;
  double wall_seconds = 0.0;
};

/// Stationary point of the one-site quadratic: [[2a1, a3], [a3, 2a2]] (a, b) = (-a4, -a5).
/// Throws IndefiniteSystem unless the matrix is positive definite beyond `rel_tol`.
std::pair<double, double> solve_2x2(const QuadCoeffs& q, double rel_tol = 1e-13);

struct Rank1Result {
  Rank1Function term;
  SolveReport report;
};

/// Alternating least squares for min_R A(phi + R) over rank-1 R.
Rank1Result als_rank1(const ObjectiveContext& ctx, const LowRankFunction& phi, const ALSConfig& cfg, Rng& rng);

struct SuccessiveResult {
  LowRankFunction phi;
  std::vector<SolveReport> reports;
  /// objective_by_rank[k] = A(R^(1) + ... + R^(k)); entry 0 is A(0).
  std::vector<double> objective_by_rank;
};

/// Greedy rank-r construction, one ALS-optimized term at a time. Each term after the
/// first starts from fresh uniform [0,1] cores drawn from `rng`.
SuccessiveResult successive_minimize(const ObjectiveContext& ctx, int rank, const ALSConfig& cfg, Rng& rng);

struct DenseSolution {
  std::vector<double> table;  ///< indexed by configuration bits
  double objective = 0.0;     ///< raw A at the table
};

/// Global minimizer of A over all 2^N table values (N <= 12), from the sparse
/// normal equations with one value pinned to zero in every weight class.
DenseSolution dense_minimize(const ObjectiveContext& ctx);

}  // namespace selfdiff
