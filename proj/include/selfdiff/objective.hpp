#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "selfdiff/lattice.hpp"
#include "selfdiff/lowrank.hpp"

namespace selfdiff {

/// Raw: the unnormalized sum over {0,1}^N, of order 2^N.
/// PerConfiguration: the same divided by 2^N (same minimizers).
enum class ObjectiveScale { Raw, PerConfiguration };

/// Jump model, grid and drift direction u of one quadratic functional.
class ObjectiveContext {
 public:
  ObjectiveContext(JumpModel model, Grid grid, std::vector<double> u);

  const JumpModel& model() const noexcept { return model_; }
  const Grid& grid() const noexcept { return grid_; }
  const JumpTables& tables() const noexcept { return tables_; }
  const std::vector<double>& u() const noexcept { return u_; }
  int num_sites() const noexcept { return grid_.size(); }

  /// u . v_k
  double drift(int k) const { return drift_[static_cast<std::size_t>(k)]; }

 private:
  JumpModel model_;
  Grid grid_;
  JumpTables tables_;
  std::vector<double> u_;
  std::vector<double> drift_;
};

/// q(a, b) = a1 a^2 + a2 b^2 + a3 a b + a4 a + a5 b + a6, with a = R_s0(1), b = R_s0(0).
struct QuadCoeffs {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0;

  double operator()(double a, double b) const noexcept {
    return a1 * a * a + a2 * b * b + a3 * a * b + a4 * a + a5 * b + a6;
  }
};

/// Recovers the quadratic from its values at (0,0),(1,0),(0,1),(2,0),(0,2),(1,1).
QuadCoeffs fit_quadratic(double g00, double g10, double g01, double g20, double g02, double g11);

/// Combined functional via Frobenius norms of signed rank-1 sums (TT route).
double eval_A(const ObjectiveContext& ctx, const LowRankFunction& phi, ObjectiveScale scale = ObjectiveScale::Raw);

/// Combined functional by literal summation over all 2^N configurations of a
/// dense table indexed by configuration bits. Oracle; N <= 20.
double eval_A_direct(const ObjectiveContext& ctx, std::span<const double> table);

/// Per-configuration summand f(eta) of the fixed-density functional.
double eval_f(const ObjectiveContext& ctx, const LowRankFunction& phi, const Configuration& eta);

/// Mean of f over all configurations of weight ell. Throws TooLarge when the class
/// has more than `max_configurations` members; use the estimator module instead.
double eval_A_ell_exact(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell,
                        std::uint64_t max_configurations = 4'000'000);

/// f summed over a dense table, per weight class: result[ell] = A_{M,ell}(table).
std::vector<double> eval_A_ell_direct(const ObjectiveContext& ctx, std::span<const double> table);

/// Dense table phi(bits) for bits in [0, 2^N). N <= 20.
std::vector<double> expand_table(const LowRankFunction& phi);

/// Coefficients of g(a, b) = A(phi + R[a, b]) where R[a, b] is `r` with its core at
/// s0 replaced by (at0, at1) = (b, a). Six-point interpolation.
QuadCoeffs als_coefficients(const ObjectiveContext& ctx, const LowRankFunction& phi, const Rank1Function& r,
                            SiteIndex s0, ObjectiveScale scale = ObjectiveScale::Raw);

}  // namespace selfdiff
