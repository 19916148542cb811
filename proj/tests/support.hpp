#pragma once

#include <random>
#include <vector>

#include "selfdiff/lattice.hpp"
#include "selfdiff/lowrank.hpp"

namespace selfdiff::testkit {

inline Rank1Function random_rank1(int n, std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<CorePair> c(static_cast<std::size_t>(n));
  for (auto& p : c) {
    p.at0 = d(g);
    p.at1 = d(g);
  }
  return Rank1Function(std::move(c));
}

inline LowRankFunction random_lowrank(int n, int r, std::mt19937_64& g) {
  LowRankFunction phi(n);
  for (int t = 0; t < r; ++t) phi.add(random_rank1(n, g));
  return phi;
}

/// The table as a sum of one indicator rank-1 term per configuration.
inline LowRankFunction indicator_expansion(int n, const std::vector<double>& table) {
  LowRankFunction phi(n);
  for (std::uint64_t bits = 0; bits < table.size(); ++bits) {
    std::vector<CorePair> c(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) c[static_cast<std::size_t>(s)] = ((bits >> s) & 1U) ? CorePair{0.0, 1.0} : CorePair{1.0, 0.0};
    phi.add(Rank1Function(std::move(c), table[bits]));
  }
  return phi;
}

/// Tagged jump by w on an explicit (2M+1)^d torus: the tagged particle leaves the
/// origin, lands on wrap(w), and the environment is read back around its new position.
inline Configuration torus_relabel(const Configuration& eta, const LatticeVector& w, const Grid& grid) {
  const int L = 2 * grid.M() + 1;
  const int dim = grid.dim();
  auto cell = [&](const LatticeVector& p) {
    int idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * L + (((p[i] + grid.M()) % L + L) % L);
    return idx;
  };
  int cells = 1;
  for (int i = 0; i < dim; ++i) cells *= L;
  std::vector<int> occ(static_cast<std::size_t>(cells), 0);
  for (SiteIndex s = 0; s < grid.size(); ++s) occ[static_cast<std::size_t>(cell(grid.site(s)))] = eta[s];
  occ[static_cast<std::size_t>(cell({0, 0, 0}))] = 0;  // vacated by the tagged particle
  Configuration out(grid.size());
  for (SiteIndex s = 0; s < grid.size(); ++s) {
    const auto& p = grid.site(s);
    out.set(s, occ[static_cast<std::size_t>(cell({p[0] + w[0], p[1] + w[1], p[2] + w[2]}))] != 0);
  }
  return out;
}

}  // namespace selfdiff::testkit
