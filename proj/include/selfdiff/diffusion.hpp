#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace selfdiff {

/// Symmetric d x d matrix, row-major full storage.
struct SymMatrix {
  int dim = 2;
  std::vector<double> data = std::vector<double>(4, 0.0);

  SymMatrix() = default;
  explicit SymMatrix(int d) : dim(d), data(static_cast<std::size_t>(d * d), 0.0) {}

  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i * dim + j)]; }
  void set(int i, int j, double v) {
    data[static_cast<std::size_t>(i * dim + j)] = v;
    data[static_cast<std::size_t>(j * dim + i)] = v;
  }
  double trace() const;
  /// u^T D u
  double form(const std::vector<double>& u) const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;
};

/// D11 = q10, D22 = q01, D12 = (q11 - q10 - q01) / 2, where q_u = u^T D u.
SymMatrix assemble_matrix(double q10, double q01, double q11);

/// General d: diag[i] = q(e_i), pair[i][j] = q(e_i + e_j) for i < j (row-major over i < j).
SymMatrix assemble_matrix(int dim, const std::vector<double>& diag, const std::vector<double>& pair);

/// The drift directions whose quadratic forms determine D: e_1..e_d, then e_i + e_j for i < j.
std::vector<std::vector<double>> polarization_directions(int dim);
SymMatrix assemble_from_polarization(int dim, const std::vector<double>& q);

enum class CurveMethod { Minimization, KMC };
std::string to_string(CurveMethod m);

struct CurveNode {
  int ell = 0;
  SymMatrix D;
  SymMatrix variance;  ///< per-entry variance; zero when exact
};

/// Self-diffusion matrix at densities ell / N for ell = 0..N.
struct DiffusionCurve {
  int num_sites = 0;
  CurveMethod method = CurveMethod::Minimization;
  std::uint64_t seed = 0;
  std::vector<CurveNode> nodes;

  bool complete() const;
};

/// Entrywise piecewise-linear interpolation between the nodes ell / N.
SymMatrix interpolate(const DiffusionCurve& curve, double rho);

struct TraceAverage {
  /// (2 / (N + 1)) sum_ell u^T D(ell / N) u for u = e_1.
  double reference = 0.0;
  /// sum_ell Tr D(ell / N) / (N + 1).
  double trace = 0.0;
};
TraceAverage trace_average(const DiffusionCurve& curve);

/// Delimited curve file: '#' lines carry `header`, then one row per node
/// `ell rho D11 D12 D22 var11 var12 var22 method seed` (2-d curves).
void write_curve(std::ostream& os, const DiffusionCurve& curve, const std::vector<std::string>& header = {});
DiffusionCurve read_curve(std::istream& is);

}  // namespace selfdiff
