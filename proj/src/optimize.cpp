#include "selfdiff/optimize.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfdiff/errors.hpp"

namespace selfdiff {

void ALSConfig::validate(int num_sites) const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("als: tolerance must be positive");
  if (max_updates < num_sites) throw std::invalid_argument("als: max_updates must be at least N");
  if (initial && initial->size() != num_sites) throw ShapeMismatch("als: initial cores have the wrong length");
  if (!(indefinite_rel_tol >= 0.0)) throw std::invalid_argument("als: indefinite_rel_tol must be >= 0");
}

std::pair<double, double> solve_2x2(const QuadCoeffs& q, double rel_tol) {
  const double h11 = 2.0 * q.a1;
  const double h22 = 2.0 * q.a2;
  const double h12 = q.a3;
  const double mean = 0.5 * (h11 + h22);
  const double radius = std::hypot(0.5 * (h11 - h22), h12);
  const double eig_max = mean + radius;
  const double eig_min = mean - radius;
  if (!std::isfinite(eig_min) || !std::isfinite(eig_max) || !(eig_min > rel_tol * std::abs(eig_max)))
    throw IndefiniteSystem(eig_min, eig_max);
  const double det = h11 * h22 - h12 * h12;
  const double a = (-q.a4 * h22 + q.a5 * h12) / det;
  const double b = (-q.a5 * h11 + q.a4 * h12) / det;
  return {a, b};
}

namespace {

std::vector<CorePair> random_cores(int n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CorePair> cores(static_cast<std::size_t>(n));
  for (auto& c : cores) {
    c.at0 = unit(rng);
    c.at1 = unit(rng);
  }
  return cores;
}

// Scales every other core to max-abs 1 and moves the product into s0, so the one-site
// optimum is of the order of the function values. Without it the optimum at a site can
// sit near 1e5 and the six-point fit (taken at 0, 1, 2) loses digits when extrapolated.
void rebalance(Rank1Function& r, SiteIndex s0) {
  std::vector<double> norms(static_cast<std::size_t>(r.size()), 1.0);
  double scale = 1.0;
  for (SiteIndex s = 0; s < r.size(); ++s) {
    if (s == s0) continue;
    norms[static_cast<std::size_t>(s)] = std::max(std::abs(r.core(s).at0), std::abs(r.core(s).at1));
    if (norms[static_cast<std::size_t>(s)] == 0.0) return;
    scale *= norms[static_cast<std::size_t>(s)];
  }
  for (SiteIndex s = 0; s < r.size(); ++s) {
    const CorePair c = r.core(s);
    const double f = s == s0 ? scale : 1.0 / norms[static_cast<std::size_t>(s)];
    r.set_core(s, {c.at0 * f, c.at1 * f});
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Rank1Result als_rank1(const ObjectiveContext& ctx, const LowRankFunction& phi, const ALSConfig& cfg, Rng& rng) {
  const int n = ctx.num_sites();
  if (phi.num_sites() != n) throw ShapeMismatch("als: function and grid sizes differ");
  cfg.validate(n);
  const auto t0 = std::chrono::steady_clock::now();

  Rank1Result out;
  auto& rep = out.report;
  out.term = cfg.initial ? *cfg.initial : Rank1Function(random_cores(n, rng));

  double v_old = std::numeric_limits<double>::infinity();
  double v_new = eval_A(ctx, phi.plus(out.term), cfg.scale);
  rep.initial_objective = v_new;

  while (std::abs(v_old - v_new) > cfg.tolerance * std::abs(v_new) && rep.updates < cfg.max_updates) {
    v_old = v_new;
    for (SiteIndex s0 = 0; s0 < n && rep.updates < cfg.max_updates; ++s0) {
      ++rep.updates;
      rebalance(out.term, s0);
      const QuadCoeffs q = als_coefficients(ctx, phi, out.term, s0, cfg.scale);
      const CorePair current = out.term.core(s0);
      try {
        const auto [a, b] = solve_2x2(q, cfg.indefinite_rel_tol);
        if (q(a, b) <= q(current.at1, current.at0)) {
          out.term.set_core(s0, {b, a});
        } else {
          ++rep.rejected_count;
        }
      } catch (const IndefiniteSystem&) {
        ++rep.indefinite_count;
      }
      if (cfg.trace_updates) rep.update_objectives.push_back(q(out.term.core(s0).at1, out.term.core(s0).at0));
    }
    v_new = eval_A(ctx, phi.plus(out.term), cfg.scale);
    rep.sweep_objectives.push_back(v_new);
  }
  rep.converged = std::abs(v_old - v_new) <= cfg.tolerance * std::abs(v_new);

  const double without = eval_A(ctx, phi, cfg.scale);
  if (v_new > without) {
    out.term = Rank1Function::zero(n);
    v_new = without;
    rep.zero_fallback = true;
  }
  rep.final_objective = v_new;
  rep.wall_seconds = seconds_since(t0);
  return out;
}

SuccessiveResult successive_minimize(const ObjectiveContext& ctx, int rank, const ALSConfig& cfg, Rng& rng) {
  if (rank < 1) throw std::invalid_argument("successive_minimize: rank must be >= 1");
  SuccessiveResult out{LowRankFunction(ctx.num_sites()), {}, {}};
  out.objective_by_rank.push_back(eval_A(ctx, out.phi, cfg.scale));
  ALSConfig step = cfg;
  for (int k = 0; k < rank; ++k) {
    if (k > 0) step.initial.reset();
    auto res = als_rank1(ctx, out.phi, step, rng);
    out.phi.add(std::move(res.term));
    out.objective_by_rank.push_back(res.report.final_objective);
    out.reports.push_back(std::move(res.report));
  }
  return out;
}

DenseSolution dense_minimize(const ObjectiveContext& ctx) {
  const int n = ctx.num_sites();
  if (n > 12) throw TooLarge("dense_minimize: N > 12");
  const std::uint64_t count = std::uint64_t{1} << n;
  const auto& model = ctx.model();
  const auto& tables = ctx.tables();

  // Lowest bit pattern of each weight class is pinned to zero.
  std::vector<bool> pinned(count, false);
  for (int ell = 0; ell <= n; ++ell) pinned[(*WeightClass(n, ell).begin()).bits()] = true;

  // Each squared residual w (c + psi[a] - psi[b])^2 adds w (e_a - e_b)(e_a - e_b)^T to the
  // Hessian/2 and -w c (e_a - e_b) to the right-hand side.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  auto add = [&](std::uint64_t a, std::uint64_t b, double w, double c) {
    if (a == b) return;
    const bool pa = pinned[a];
    const bool pb = pinned[b];
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    if (!pa) {
      trip.emplace_back(ia, ia, w);
      if (!pb) trip.emplace_back(ia, ib, -w);
      rhs[ia] -= w * c;
    }
    if (!pb) {
      trip.emplace_back(ib, ib, w);
      if (!pa) trip.emplace_back(ib, ia, -w);
      rhs[ib] += w * c;
    }
  };

  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const auto eta = Configuration::from_bits(n, bits);
    for (int k = 0; k < model.size(); ++k) {
      const double p = model.probability(k);
      if (!eta[tables.target(k)]) add(tables.tagged_shift(eta, k).bits(), bits, p, ctx.drift(k));
      for (SiteIndex y = 0; y < n; ++y) {
        if (tables.neighbor(y, k) < 0) continue;
        add(tables.swap(eta, y, k).bits(), bits, 0.5 * p, 0.0);
      }
    }
  }
  for (std::uint64_t i = 0; i < count; ++i)
    if (pinned[i]) trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0);

  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  h.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("dense_minimize: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw NumericalError("dense_minimize: solve failed");

  DenseSolution out;
  out.table.assign(x.data(), x.data() + x.size());
  out.objective = eval_A_direct(ctx, out.table);
  return out;
}

}  // namespace selfdiff
