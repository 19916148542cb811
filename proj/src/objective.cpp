#include "selfdiff/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "selfdiff/errors.hpp"
#include "selfdiff/ttnorm.hpp"

namespace selfdiff {

ObjectiveContext::ObjectiveContext(JumpModel model, Grid grid, std::vector<double> u)
    : model_(std::move(model)), grid_(std::move(grid)), tables_(grid_, model_), u_(std::move(u)) {
  if (static_cast<int>(u_.size()) != model_.dim()) throw ShapeMismatch("objective: u has wrong dimension");
  for (int k = 0; k < model_.size(); ++k) {
    double d = 0.0;
    for (int i = 0; i < model_.dim(); ++i) d += u_[static_cast<std::size_t>(i)] * model_.direction(k)[i];
    drift_.push_back(d);
  }
}

QuadCoeffs fit_quadratic(double g00, double g10, double g01, double g20, double g02, double g11) {
  QuadCoeffs q;
  q.a6 = g00;
  q.a1 = (g20 - 2.0 * g10 + g00) / 2.0;
  q.a2 = (g02 - 2.0 * g01 + g00) / 2.0;
  q.a4 = g10 - q.a1 - q.a6;
  q.a5 = g01 - q.a2 - q.a6;
  q.a3 = g11 - q.a1 - q.a2 - q.a4 - q.a5 - q.a6;
  return q;
}

namespace {

void negate_first(TTChain& chain, int term) {
  auto& p = chain.pair(0, term);
  p.at0 = -p.at0;
  p.at1 = -p.at1;
}

}  // namespace

double eval_A(const ObjectiveContext& ctx, const LowRankFunction& phi, ObjectiveScale scale) {
  const int n = ctx.num_sites();
  if (phi.num_sites() != n) throw ShapeMismatch("eval_A: function and grid sizes differ");
  const auto& tables = ctx.tables();
  const auto& model = ctx.model();
  const int r = phi.rank();

  // || P_{v_k} (u.v_k + Phi^(0,v_k) - Phi) ||^2 : 2r + 1 terms
  TTChain jump(n, 2 * r + 1);
  // || Phi^(y+v_k, y) - Phi ||^2 : 2r terms
  TTChain exchange(n, std::max(2 * r, 1));

  double total = 0.0;
  for (int k = 0; k < model.size(); ++k) {
    const double c = ctx.drift(k);
    const SiteIndex target = tables.target(k);
    const SiteIndex vacated = tables.vacated(k);

    for (int s = 0; s < n; ++s) jump.pair(s, 0) = CorePair{};
    jump.pair(0, 0) = {c, c};
    for (int t = 0; t < r; ++t) {
      const auto& rt = phi.term(t);
      for (SiteIndex s = 0; s < n; ++s) {
        const SiteIndex dst = tables.neighbor(s, k);
        if (dst >= 0) jump.pair(dst, 1 + t) = rt.core(s);
        jump.pair(s, 1 + r + t) = rt.core(s);
      }
      const double cv = rt.core(vacated).at0;
      jump.pair(target, 1 + t) = {cv, cv};
      negate_first(jump, 1 + r + t);
    }
    for (int t = 0; t < 2 * r + 1; ++t) jump.pair(target, t).at1 = 0.0;
    const double jump_norm = frobenius_norm_sq(jump);

    double exchange_sum = 0.0;
    if (r > 0) {
      for (SiteIndex y = 0; y < n; ++y) {
        const SiteIndex z = tables.neighbor(y, k);
        if (z < 0) continue;
        for (int t = 0; t < r; ++t) {
          const auto& rt = phi.term(t);
          for (SiteIndex s = 0; s < n; ++s) {
            exchange.pair(s, t) = rt.core(s);
            exchange.pair(s, r + t) = rt.core(s);
          }
          std::swap(exchange.pair(y, t), exchange.pair(z, t));
          negate_first(exchange, r + t);
        }
        exchange_sum += frobenius_norm_sq(exchange);
      }
    }
    total += model.probability(k) * (jump_norm + 0.5 * exchange_sum);
  }
  if (scale == ObjectiveScale::PerConfiguration) total = std::ldexp(total, -n);
  return total;
}

namespace {

/// f(eta) for an arbitrary function psi, built from the literal grid-level
/// transformations. Used only by the dense-table oracle paths.
template <class Psi>
double direct_summand(const ObjectiveContext& ctx, const Psi& psi, const Configuration& eta) {
  const auto& model = ctx.model();
  const auto& grid = ctx.grid();
  const double base = psi(eta);
  double f = 0.0;
  for (int k = 0; k < model.size(); ++k) {
    const auto& v = model.direction(k);
    double term = 0.0;
    if (!eta[grid.index_of(v)]) {
      const double d = ctx.drift(k) + psi(tagged_shift(eta, v, grid)) - base;
      term += d * d;
    }
    double ex = 0.0;
    for (SiteIndex y = 0; y < grid.size(); ++y) {
      const auto& ys = grid.site(y);
      if (ys[0] + v[0] == 0 && ys[1] + v[1] == 0 && ys[2] + v[2] == 0) continue;
      const double d = psi(swap_exchange(eta, ys, v, grid)) - base;
      ex += d * d;
    }
    f += model.probability(k) * (term + 0.5 * ex);
  }
  return f;
}

}  // namespace

double eval_A_direct(const ObjectiveContext& ctx, std::span<const double> table) {
  const int n = ctx.num_sites();
  if (n > 20) throw TooLarge("eval_A_direct: N > 20");
  const std::uint64_t count = std::uint64_t{1} << n;
  if (table.size() != count) throw ShapeMismatch("eval_A_direct: table must have 2^N entries");
  auto psi = [&](const Configuration& c) { return table[c.bits()]; };
  double total = 0.0;
  for (std::uint64_t bits = 0; bits < count; ++bits)
    total += direct_summand(ctx, psi, Configuration::from_bits(n, bits));
  return total;
}

std::vector<double> eval_A_ell_direct(const ObjectiveContext& ctx, std::span<const double> table) {
  const int n = ctx.num_sites();
  if (n > 20) throw TooLarge("eval_A_ell_direct: N > 20");
  const std::uint64_t count = std::uint64_t{1} << n;
  if (table.size() != count) throw ShapeMismatch("eval_A_ell_direct: table must have 2^N entries");
  auto psi = [&](const Configuration& c) { return table[c.bits()]; };
  std::vector<double> sums(static_cast<std::size_t>(n + 1), 0.0);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const auto eta = Configuration::from_bits(n, bits);
    sums[static_cast<std::size_t>(eta.weight())] += direct_summand(ctx, psi, eta);
  }
  for (int ell = 0; ell <= n; ++ell) sums[static_cast<std::size_t>(ell)] /= static_cast<double>(binomial(n, ell));
  return sums;
}

double eval_f(const ObjectiveContext& ctx, const LowRankFunction& phi, const Configuration& eta) {
  const int n = ctx.num_sites();
  if (phi.num_sites() != n || eta.size() != n) throw ShapeMismatch("eval_f: size mismatch");
  const auto& tables = ctx.tables();
  const auto& model = ctx.model();
  const int r = phi.rank();

  // vals[t*n + s] = R_t,s(eta_s)
  thread_local std::vector<double> vals;
  vals.resize(static_cast<std::size_t>(r * n));
  double base = 0.0;
  for (int t = 0; t < r; ++t) {
    double p = 1.0;
    const auto cores = phi.term(t).cores();
    for (int s = 0; s < n; ++s) {
      const double x = cores[static_cast<std::size_t>(s)](eta[s]);
      vals[static_cast<std::size_t>(t * n + s)] = x;
      p *= x;
    }
    base += p;
  }

  double f = 0.0;
  for (int k = 0; k < model.size(); ++k) {
    double term = 0.0;
    if (!eta[tables.target(k)]) {
      const double d = ctx.drift(k) + (r > 0 ? phi(tables.tagged_shift(eta, k)) : 0.0) - base;
      term = d * d;
    }
    double ex = 0.0;
    if (r > 0) {
      for (SiteIndex y = 0; y < n; ++y) {
        const SiteIndex z = tables.neighbor(y, k);
        if (z < 0) continue;
        const bool ey = eta[y];
        const bool ez = eta[z];
        if (ey == ez) continue;  // exchange is the identity
        double swapped = 0.0;
        for (int t = 0; t < r; ++t) {
          const double* v = &vals[static_cast<std::size_t>(t * n)];
          double p = 1.0;
          for (int s = 0; s < n; ++s)
            if (s != y && s != z) p *= v[s];
          const auto cores = phi.term(t).cores();
          swapped += p * cores[static_cast<std::size_t>(y)](ez) * cores[static_cast<std::size_t>(z)](ey);
        }
        const double d = swapped - base;
        ex += d * d;
      }
    }
    f += model.probability(k) * (term + 0.5 * ex);
  }
  return f;
}

double eval_A_ell_exact(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell,
                        std::uint64_t max_configurations) {
  const int n = ctx.num_sites();
  if (ell < 0 || ell > n) throw std::out_of_range("eval_A_ell_exact: ell out of range");
  const WeightClass cls(n, ell);
  if (cls.size() > max_configurations)
    throw TooLarge("eval_A_ell_exact: weight class has " + std::to_string(cls.size()) +
                   " configurations; use the stratified estimator");
  double sum = 0.0;
  for (const auto& eta : cls) sum += eval_f(ctx, phi, eta);
  return sum / static_cast<double>(cls.size());
}

std::vector<double> expand_table(const LowRankFunction& phi) {
  const int n = phi.num_sites();
  if (n > 20) throw TooLarge("expand_table: N > 20");
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> table(count);
  for (std::uint64_t bits = 0; bits < count; ++bits) table[bits] = phi(Configuration::from_bits(n, bits));
  return table;
}

QuadCoeffs als_coefficients(const ObjectiveContext& ctx, const LowRankFunction& phi, const Rank1Function& r,
                            SiteIndex s0, ObjectiveScale scale) {
  if (s0 < 0 || s0 >= ctx.num_sites()) throw std::out_of_range("als_coefficients: site out of range");
  LowRankFunction trial = phi.plus(r);
  const int last = trial.rank() - 1;
  auto g = [&](double a, double b) {
    Rank1Function probe = trial.term(last);
    probe.set_core(s0, {b, a});
    LowRankFunction candidate = phi.plus(std::move(probe));
    const double v = eval_A(ctx, candidate, scale);
    if (!std::isfinite(v)) throw NumericalError("als_coefficients: non-finite objective");
    return v;
  };
  return fit_quadratic(g(0, 0), g(1, 0), g(0, 1), g(2, 0), g(0, 2), g(1, 1));
}

}  // namespace selfdiff
