#include <gtest/gtest.h>

#include <cmath>

#include "selfdiff/errors.hpp"
#include "selfdiff/optimize.hpp"
#include "support.hpp"

using namespace selfdiff;

namespace {

ObjectiveContext nn(int M, std::vector<double> u = {1.0, 0.0}) {
  return {JumpModel::nearest_neighbor(2), Grid(2, M), std::move(u)};
}

}  // namespace

TEST(Solve2x2, KnownMinimizers) {
  auto [a, b] = solve_2x2({1, 1, 0, -2, 0, 5});
  EXPECT_NEAR(a, 1.0, 1e-15);
  EXPECT_NEAR(b, 0.0, 1e-15);
  auto [c, d] = solve_2x2({2, 3, 1, -1, 4, 0});
  // gradient of the quadratic vanishes at the returned point
  EXPECT_NEAR(4 * c + d - 1, 0.0, 1e-14);
  EXPECT_NEAR(c + 6 * d + 4, 0.0, 1e-14);
}

TEST(Solve2x2, RejectsSingularAndIndefinite) {
  EXPECT_THROW(solve_2x2({1, 1, 2, -4, -4, 0}), IndefiniteSystem);
  EXPECT_THROW(solve_2x2({1, -1, 0, 0, 0, 0}), IndefiniteSystem);
  try {
    solve_2x2({-1, -2, 0, 0, 0, 0});
    FAIL();
  } catch (const IndefiniteSystem& e) {
    EXPECT_LT(e.eig_min(), 0.0);
  }
}

TEST(Solve2x2, SmallResidualOnRandomDefiniteSystems) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(gen), y = d(gen), z = d(gen), w = d(gen);
    // H = B^T B + 1e-3 I is positive definite
    const double h11 = x * x + z * z + 1e-3, h22 = y * y + w * w + 1e-3, h12 = x * y + z * w;
    QuadCoeffs q{h11 / 2, h22 / 2, h12, d(gen), d(gen), 0};
    auto [a, b] = solve_2x2(q);
    EXPECT_NEAR(h11 * a + h12 * b + q.a4, 0.0, 1e-9);
    EXPECT_NEAR(h12 * a + h22 * b + q.a5, 0.0, 1e-9);
  }
}

TEST(ALS, ObjectiveNeverIncreases) {
  auto ctx = nn(1);
  Rng rng(3);
  ALSConfig cfg;
  cfg.trace_updates = true;
  auto res = als_rank1(ctx, LowRankFunction(8), cfg, rng);
  const auto& rep = res.report;
  ASSERT_FALSE(rep.sweep_objectives.empty());
  double prev = rep.initial_objective;
  for (double v : rep.sweep_objectives) {
    EXPECT_LE(v, prev * (1 + 1e-12));
    prev = v;
  }
  for (std::size_t i = 1; i < rep.update_objectives.size(); ++i)
    EXPECT_LE(rep.update_objectives[i], rep.update_objectives[i - 1] * (1 + 1e-12) + 1e-12);
  EXPECT_LE(rep.updates, cfg.max_updates);
  EXPECT_NEAR(rep.final_objective, eval_A(ctx, LowRankFunction(8).plus(res.term)), 1e-12 * rep.final_objective);
  EXPECT_LT(rep.final_objective, 64.0);
}

TEST(ALS, UpdateCapIsHonoured) {
  auto ctx = nn(2);
  Rng rng(4);
  ALSConfig cfg;
  cfg.max_updates = 30;
  auto res = als_rank1(ctx, LowRankFunction(24), cfg, rng);
  EXPECT_EQ(res.report.updates, 30);
  EXPECT_FALSE(res.report.converged);
  cfg.max_updates = 10;  // below N
  EXPECT_THROW(als_rank1(ctx, LowRankFunction(24), cfg, rng), std::invalid_argument);
}

TEST(ALS, SameSeedSameResult) {
  auto ctx = nn(1, {1, 1});
  ALSConfig cfg;
  Rng a(42), b(42);
  auto ra = successive_minimize(ctx, 3, cfg, a);
  auto rb = successive_minimize(ctx, 3, cfg, b);
  EXPECT_EQ(ra.phi, rb.phi);
  EXPECT_EQ(ra.objective_by_rank, rb.objective_by_rank);
}

TEST(ALS, InitialCoresReplaceRandomStart) {
  auto ctx = nn(1);
  ALSConfig cfg;
  cfg.initial = Rank1Function::constant(8, 0.5);
  Rng a(1), b(2);
  EXPECT_EQ(als_rank1(ctx, LowRankFunction(8), cfg, a).term, als_rank1(ctx, LowRankFunction(8), cfg, b).term);
}

TEST(Successive, ObjectiveDecreasesWithRank) {
  auto ctx = nn(1);
  Rng rng(5);
  auto res = successive_minimize(ctx, 4, ALSConfig{}, rng);
  ASSERT_EQ(res.objective_by_rank.size(), 5u);
  EXPECT_DOUBLE_EQ(res.objective_by_rank[0], 64.0);
  for (std::size_t k = 1; k < res.objective_by_rank.size(); ++k)
    EXPECT_LE(res.objective_by_rank[k], res.objective_by_rank[k - 1] * (1 + 1e-12));
  EXPECT_EQ(res.phi.rank(), 4);
  EXPECT_NEAR(res.objective_by_rank.back(), eval_A(ctx, res.phi), 1e-12 * 64);
}

TEST(Dense, IsStationaryAndBelowEveryLowRankValue) {
  for (auto u : {std::vector<double>{1, 0}, {1, 1}}) {
    auto ctx = nn(1, u);
    auto sol = dense_minimize(ctx);
    ASSERT_EQ(sol.table.size(), 256u);
    EXPECT_NEAR(sol.objective, eval_A_direct(ctx, sol.table), 1e-10);
    // the functional is quadratic, so central differences give the exact gradient
    const double h = 1e-3;
    for (std::size_t i = 0; i < sol.table.size(); ++i) {
      auto plus = sol.table, minus = sol.table;
      plus[i] += h;
      minus[i] -= h;
      EXPECT_NEAR((eval_A_direct(ctx, plus) - eval_A_direct(ctx, minus)) / (2 * h), 0.0, 1e-7) << i;
    }
    Rng rng(6);
    auto low = successive_minimize(ctx, 3, ALSConfig{}, rng);
    EXPECT_LE(sol.objective, low.objective_by_rank.back());
  }
}

TEST(Dense, EndpointsOfTheCurve) {
  auto ctx = nn(1);
  auto sol = dense_minimize(ctx);
  auto per = eval_A_ell_direct(ctx, sol.table);
  EXPECT_NEAR(2 * per.front(), 1.0, 1e-12);
  EXPECT_NEAR(per.back(), 0.0, 1e-12);
  for (double v : per) EXPECT_GE(v, -1e-12);
}

TEST(Dense, RefusesLargeGrids) { EXPECT_THROW(dense_minimize(nn(2)), TooLarge); }
