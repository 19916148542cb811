#include <gtest/gtest.h>

#include <cmath>

#include "selfdiff/errors.hpp"
#include "selfdiff/objective.hpp"
#include "support.hpp"

using namespace selfdiff;

namespace {

ObjectiveContext nn(int M, std::vector<double> u = {1.0, 0.0}) {
  return {JumpModel::nearest_neighbor(2), Grid(2, M), std::move(u)};
}

// Literal per-configuration summand, written out from the definition.
double summand_oracle(const ObjectiveContext& ctx, const LowRankFunction& phi, const Configuration& eta) {
  const auto& g = ctx.grid();
  const auto& m = ctx.model();
  const double base = phi(eta);
  double total = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    const auto& v = m.direction(k);
    double drift = 0.0;
    for (int i = 0; i < 2; ++i) drift += ctx.u()[static_cast<std::size_t>(i)] * v[i];
    double part = 0.0;
    if (!eta[g.index_of(v)]) {
      const double j = drift + phi(testkit::torus_relabel(eta, v, g)) - base;
      part += j * j;
    }
    for (SiteIndex s = 0; s < g.size(); ++s) {
      const auto& y = g.site(s);
      if (g.index_of({y[0] + v[0], y[1] + v[1], 0}) < 0) continue;
      const double e = phi(swap_exchange(eta, y, v, g)) - base;
      part += 0.5 * e * e;
    }
    total += m.probability(k) * part;
  }
  return total;
}

}  // namespace

TEST(Objective, ZeroFunctionValue) {
  // only jump terms survive: sum_eta sum_k p_k (1 - eta_v) (u.v)^2 = 2^(N-1) * (1/2)
  auto ctx = nn(1);
  EXPECT_DOUBLE_EQ(eval_A(ctx, LowRankFunction(8)), 64.0);
  EXPECT_DOUBLE_EQ(eval_A(ctx, LowRankFunction(8), ObjectiveScale::PerConfiguration), 0.25);
}

TEST(Objective, TensorRouteMatchesLiteralSum) {
  std::mt19937_64 gen(1);
  for (auto u : {std::vector<double>{1, 0}, {0, 1}, {1, 1}, {0.3, -1.7}}) {
    auto ctx = nn(1, u);
    for (int r : {1, 2, 4}) {
      auto phi = testkit::random_lowrank(ctx.num_sites(), r, gen);
      const double want = eval_A_direct(ctx, expand_table(phi));
      EXPECT_NEAR(eval_A(ctx, phi), want, 1e-11 * want);
    }
  }
}

TEST(Objective, TensorRouteMatchesLiteralSumOnSmallTorus) {
  std::mt19937_64 gen(2);
  ObjectiveContext ctx(JumpModel::nearest_neighbor(2), Grid::torus({4, 4}), {1.0, 0.0});
  auto phi = testkit::random_lowrank(ctx.num_sites(), 2, gen);
  const double want = eval_A_direct(ctx, expand_table(phi));
  EXPECT_NEAR(eval_A(ctx, phi), want, 1e-11 * want);
}

TEST(Objective, LongerJumpsMatchLiteralSum) {
  std::mt19937_64 gen(3);
  JumpModel m(2, {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {1, 1, 0}, {-1, -1, 0}},
              {0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
  ObjectiveContext ctx(m, Grid(2, 2), {1.0, 0.5});
  auto phi = testkit::random_lowrank(ctx.num_sites(), 1, gen);
  for (int i = 0; i < 200; ++i) {
    auto eta = Configuration::from_bits(24, gen() & ((1ULL << 24) - 1));
    const double want = summand_oracle(ctx, phi, eta);
    EXPECT_NEAR(eval_f(ctx, phi, eta), want, 1e-12 * std::max(1.0, want));
  }
}

TEST(Objective, SummandMatchesOracle) {
  std::mt19937_64 gen(4);
  auto ctx = nn(2, {0.6, 0.8});
  auto phi = testkit::random_lowrank(24, 3, gen);
  for (int i = 0; i < 300; ++i) {
    auto eta = Configuration::from_bits(24, gen() & ((1ULL << 24) - 1));
    const double want = summand_oracle(ctx, phi, eta);
    EXPECT_NEAR(eval_f(ctx, phi, eta), want, 1e-12 * std::max(1.0, want));
  }
}

TEST(Objective, SummandsAddUpToCombinedFunctional) {
  std::mt19937_64 gen(5);
  auto ctx = nn(1);
  auto phi = testkit::random_lowrank(8, 2, gen);
  double sum = 0.0;
  for (std::uint64_t b = 0; b < 256; ++b) sum += eval_f(ctx, phi, Configuration::from_bits(8, b));
  EXPECT_NEAR(sum, eval_A(ctx, phi), 1e-11 * sum);
  double by_class = 0.0;
  for (int ell = 0; ell <= 8; ++ell) by_class += eval_A_ell_exact(ctx, phi, ell) * static_cast<double>(binomial(8, ell));
  EXPECT_NEAR(by_class, sum, 1e-11 * sum);
}

TEST(Objective, EndpointDensities) {
  std::mt19937_64 gen(6);
  for (auto u : {std::vector<double>{1, 0}, {0, 1}}) {
    auto ctx = nn(2, u);
    auto phi = testkit::random_lowrank(24, 3, gen);
    // empty environment: phi is evaluated at the same configuration, only drift remains
    EXPECT_NEAR(2.0 * eval_A_ell_exact(ctx, phi, 0), 1.0, 1e-14);
    // full environment: every tagged jump blocked, every swap trivial
    EXPECT_NEAR(eval_A_ell_exact(ctx, phi, 24), 0.0, 1e-14);
  }
}

TEST(Objective, ConstantShiftDoesNotChangeValue) {
  std::mt19937_64 gen(7);
  auto ctx = nn(1, {1, 1});
  auto phi = testkit::random_lowrank(8, 2, gen);
  const double a = eval_A(ctx, phi);
  EXPECT_NEAR(eval_A(ctx, phi.plus(Rank1Function::constant(8, 3.7))), a, 1e-11 * a);
}

TEST(Objective, ExactClassMeanRefusesHugeClasses) {
  auto ctx = nn(2);
  EXPECT_THROW(eval_A_ell_exact(ctx, LowRankFunction(24), 12, 1000), TooLarge);
}

TEST(Objective, ExpandTableAgreesWithPointwise) {
  std::mt19937_64 gen(8);
  auto phi = testkit::random_lowrank(8, 3, gen);
  auto table = expand_table(phi);
  for (std::uint64_t b = 0; b < 256; ++b) EXPECT_NEAR(table[b], phi(Configuration::from_bits(8, b)), 1e-14);
}

TEST(Objective, PerClassLiteralSumMatchesRank1Route) {
  // any table can be written as a sum of indicator rank-1 terms
  std::mt19937_64 gen(9);
  auto ctx = nn(1, {0, 1});
  std::vector<double> table(256);
  std::uniform_real_distribution<double> d(-2, 2);
  for (auto& x : table) x = d(gen);
  auto phi = testkit::indicator_expansion(8, table);
  auto direct = eval_A_ell_direct(ctx, table);
  for (int ell = 0; ell <= 8; ++ell)
    EXPECT_NEAR(eval_A_ell_exact(ctx, phi, ell), direct[static_cast<std::size_t>(ell)], 1e-11) << ell;
}

TEST(FitQuadratic, ExactAtHeldOutPoints) {
  QuadCoeffs q{1.5, -0.25, 0.75, -2.0, 3.0, 0.5};
  auto fit = fit_quadratic(q(0, 0), q(1, 0), q(0, 1), q(2, 0), q(0, 2), q(1, 1));
  for (auto [a, b] : {std::pair{-3.0, 2.0}, std::pair{0.5, 0.25}, std::pair{7.0, -4.0}})
    EXPECT_NEAR(fit(a, b), q(a, b), 1e-12 * std::max(1.0, std::abs(q(a, b))));
}

TEST(ALSCoefficients, ReproduceObjectiveAlongTheCore) {
  std::mt19937_64 gen(10);
  auto ctx = nn(1, {1, 0.5});
  auto phi = testkit::random_lowrank(8, 2, gen);
  auto r = testkit::random_rank1(8, gen);
  for (SiteIndex s0 : {0, 3, 7}) {
    auto q = als_coefficients(ctx, phi, r, s0);
    for (auto [a, b] : {std::pair{-1.3, 0.4}, std::pair{2.5, -3.0}}) {
      auto trial = r;
      trial.set_core(s0, {b, a});
      const double want = eval_A_direct(ctx, expand_table(phi.plus(trial)));
      EXPECT_NEAR(q(a, b), want, 1e-10 * want);
    }
  }
}
