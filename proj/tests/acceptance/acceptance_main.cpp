// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned below.
// Usage: selfdiff_acceptance [criterion numbers...]   (default: all)
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfdiff/estimator.hpp"
#include "selfdiff/kmc.hpp"
#include "selfdiff/optimize.hpp"
#include "selfdiff/ttnorm.hpp"

using namespace selfdiff;

namespace {

constexpr std::uint64_t kSeed = 20240601;

// criterion 1, 2
constexpr double kOracleRelTol = 1e-10;
// criterion 3
constexpr double kRank1Gap = 1e-3;
constexpr int kRank1Seeds = 12;
// criterion 4
constexpr double kEndpointTol = 1e-6;
// criterion 5
constexpr double kTraceLo = 0.82, kTraceHi = 0.86;
// criterion 6: desk scale, one tenth of the 460,800-evaluation budget
constexpr std::uint64_t kVarBudget = 46080;
constexpr int kVarRepeats = 100;
constexpr std::uint64_t kSmallBudget = 100000;
constexpr int kSmallRepeats = 30;
constexpr double kSmallVarMax = 1e-5;
// criterion 7
constexpr double kCalibSigmas = 4.0;
constexpr int kKmcRepeats = 12;
constexpr double kKmcVarLo = 0.5e-4, kKmcVarHi = 8e-4;
// criterion 8
constexpr int kCompareRepeats = 20;
constexpr double kMinVarMax = 1e-6, kKmcVarMin = 1e-5;
// criterion 9
constexpr double kPropertySeconds = 120.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ObjectiveContext nn(int M, std::vector<double> u) { return {JumpModel::nearest_neighbor(2), Grid(2, M), std::move(u)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Rank1Function random_rank1(int n, Rng& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<CorePair> c(static_cast<std::size_t>(n));
  for (auto& p : c) p = {d(rng), d(rng)};
  return Rank1Function(std::move(c));
}

double sample_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

/// Mean and max over ell of the across-repeat variance of per-ell values.
std::pair<double, double> table_variance(const std::vector<std::vector<double>>& per_repeat) {
  const std::size_t n = per_repeat.front().size();
  double mean = 0.0, mx = 0.0;
  for (std::size_t ell = 0; ell < n; ++ell) {
    std::vector<double> col;
    for (const auto& r : per_repeat) col.push_back(r[ell]);
    const double v = sample_variance(col);
    mean += v;
    mx = std::max(mx, v);
  }
  return {mean / static_cast<double>(n), mx};
}

// Rank-3 minimizer at M = 2, u = (1, 0), shared by criteria 4, 5 and 6.
const LowRankFunction& m2_solution() {
  static std::optional<LowRankFunction> phi;
  if (!phi) {
    Rng rng = make_rng(kSeed, "als", {0});
    phi = successive_minimize(nn(2, {1, 0}), 3, ALSConfig{}, rng).phi;
  }
  return *phi;
}

Outcome oracle_equivalence() {
  Rng rng = make_rng(kSeed, "acceptance", {1});
  const std::vector<std::vector<double>> us{{1, 0}, {0, 1}, {1, 1}, {0.6, -0.8}};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto ctx = nn(1, us[static_cast<std::size_t>(i) % us.size()]);
    LowRankFunction phi(8);
    for (int r = 0; r <= i % 4; ++r) phi.add(random_rank1(8, rng));
    const double direct = eval_A_direct(ctx, expand_table(phi));
    worst = std::max(worst, std::abs(eval_A(ctx, phi) - direct) / direct);
  }
  return {worst <= kOracleRelTol, fmt("max rel err %.2e over 50 functions (tol %.0e)", worst, kOracleRelTol)};
}

Outcome norm_correctness() {
  Rng rng = make_rng(kSeed, "acceptance", {2});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 8 + i % 5;
    const int terms = 1 + i % 9;
    std::vector<Rank1Term> sum;
    for (int t = 0; t < terms; ++t) sum.push_back(to_term(random_rank1(n, rng), (t % 2) ? -1 : 1));
    const double brute = brute_force_norm_sq(sum);
    worst = std::max(worst, std::abs(frobenius_norm_sq(assemble_chain(sum)) - brute) / brute);
  }
  return {worst <= kOracleRelTol, fmt("max rel err %.2e over 100 sums (tol %.0e)", worst, kOracleRelTol)};
}

Outcome rank1_gap() {
  auto ctx = nn(1, {1, 0});
  const double dense = dense_minimize(ctx).objective;
  double worst = 0.0, best = 1e300;
  for (int s = 0; s < kRank1Seeds; ++s) {
    Rng rng = make_rng(kSeed, "als", {static_cast<std::uint64_t>(100 + s)});
    const double v = als_rank1(ctx, LowRankFunction(8), ALSConfig{}, rng).report.final_objective;
    const double gap = (v - dense) / dense;
    worst = std::max(worst, gap);
    best = std::min(best, gap);
  }
  return {worst <= kRank1Gap, fmt("dense %.10g, rank-1 rel gap %.3e..%.3e over %d seeds (tol %.0e)", dense, best,
                                  worst, kRank1Seeds, kRank1Gap)};
}

Outcome endpoints() {
  std::string detail;
  bool ok = true;
  for (int M : {1, 2}) {
    auto ctx = nn(M, {1, 0});
    LowRankFunction phi(ctx.num_sites());
    if (M == 1) {
      Rng rng = make_rng(kSeed, "als", {1});
      phi = successive_minimize(ctx, 3, ALSConfig{}, rng).phi;
    } else {
      phi = m2_solution();
    }
    const double low = 2.0 * eval_A_ell_exact(ctx, phi, 0);
    const double high = 2.0 * eval_A_ell_exact(ctx, phi, ctx.num_sites());
    ok = ok && std::abs(low - 1.0) <= kEndpointTol && high == 0.0;
    detail += fmt("M=%d min route 2A_0-1=%.1e D(1)=%g; ", M, low - 1.0, high);
    KMCSystem sys(JumpModel::nearest_neighbor(2), Grid(2, M));
    KMCParams p;
    p.nhat = 1000;
    p.us = {{1, 0}, {0, 1}};
    auto full = kmc_estimate(sys, ctx.num_sites(), p, kSeed);
    ok = ok && full.alpha[0] == 0.0 && full.alpha[1] == 0.0;
    detail += fmt("kmc D(1)=%g; ", full.alpha[0] + full.alpha[1]);
  }
  return {ok, detail + fmt("(tol %.0e, D(1) exactly 0)", kEndpointTol)};
}

Outcome trace_average() {
  auto ctx = nn(2, {1, 0});
  const auto& phi = m2_solution();
  const int n = ctx.num_sites();
  double sum = 0.0;
  for (int ell = 0; ell <= n; ++ell) sum += 2.0 * eval_A_ell_exact(ctx, phi, ell);
  const double avg = 2.0 * sum / (n + 1);
  return {avg >= kTraceLo && avg <= kTraceHi,
          fmt("(2/(N+1)) sum u^T D u = %.6f, exact class means, r=3 (band [%.2f, %.2f])", avg, kTraceLo, kTraceHi)};
}

/// Largest samples-per-stratum whose stratified evaluations over all ell fit the budget.
int budget_ntilde(const ObjectiveContext& ctx, std::uint64_t budget) {
  int best = 1;
  for (int nt = 1;; ++nt) {
    std::uint64_t total = 0;
    for (int ell = 0; ell <= ctx.num_sites(); ++ell) total += make_stratified_plan(ctx, ell, nt).evaluations();
    if (total > budget) return best;
    best = nt;
  }
}

Outcome variance_reduction() {
  auto ctx = nn(2, {1, 0});
  const auto& phi = m2_solution();
  const int n = ctx.num_sites();
  auto estimate = [&](int nt, int repeats, bool naive, std::uint64_t salt) {
    std::vector<double> out;
    for (int r = 0; r < repeats; ++r) {
      Rng rng = make_rng(kSeed, "repeat", {salt, static_cast<std::uint64_t>(r)});
      double sum = 0.0;
      for (int ell = 0; ell <= n; ++ell) {
        const double a = naive ? naive_mc(ctx, phi, ell, make_stratified_plan(ctx, ell, nt).evaluations(), rng).value
                               : stratified_mc(ctx, phi, ell, nt, rng).value;
        sum += 2.0 * a;
      }
      out.push_back(2.0 * sum / (n + 1));
    }
    return sample_variance(out);
  };
  const int nt = budget_ntilde(ctx, kVarBudget);
  const double strat = estimate(nt, kVarRepeats, false, 1);
  const double naive = estimate(nt, kVarRepeats, true, 2);
  const int nt_small = budget_ntilde(ctx, kSmallBudget);
  const double small = estimate(nt_small, kSmallRepeats, false, 3);
  const bool ok = strat <= naive && small <= kSmallVarMax;
  return {ok, fmt("budget %llu (Ntilde=%d), %d repeats: var stratified %.3e <= naive %.3e; at %llu evals "
                  "(Ntilde=%d, %d repeats) var %.3e (max %.0e)",
                  static_cast<unsigned long long>(kVarBudget), nt, kVarRepeats, strat, naive,
                  static_cast<unsigned long long>(kSmallBudget), nt_small, kSmallRepeats, small, kSmallVarMax)};
}

/// Per-ell Tr D from one full KMC run.
std::vector<double> kmc_trace(const KMCSystem& sys, std::uint64_t seed, double* calib, double* calib_se) {
  KMCParams p;
  p.us = {{1, 0}, {0, 1}};
  std::vector<double> tr;
  for (int ell = 0; ell <= sys.num_sites(); ++ell) {
    auto est = kmc_estimate(sys, ell, p, seed);
    tr.push_back(2.0 * (est.alpha[0] + est.alpha[1]));
    if (ell == 0 && calib) {
      *calib = 2.0 * est.alpha[0];
      *calib_se = 2.0 * est.stderr_alpha[0];
    }
  }
  return tr;
}

Outcome kmc_calibration() {
  KMCSystem sys(JumpModel::nearest_neighbor(2), Grid(2, 2));
  double calib = 0.0, se = 0.0;
  std::vector<std::vector<double>> runs;
  for (int r = 0; r < kKmcRepeats; ++r)
    runs.push_back(kmc_trace(sys, derive_seed(kSeed, "repeat", {7, static_cast<std::uint64_t>(r)}), r == 0 ? &calib : nullptr,
                             r == 0 ? &se : nullptr));
  const auto [mean, mx] = table_variance(runs);
  const bool ok = std::abs(calib - 1.0) <= kCalibSigmas * se && mean >= kKmcVarLo && mean <= kKmcVarHi;
  return {ok, fmt("ell=0: 2alpha=%.5f, |2alpha-1|/se=%.2f (max %.0f); %d repeats: mean Var(Tr D)=%.3e "
                  "(band [%.1e, %.1e]), max %.3e",
                  calib, std::abs(calib - 1.0) / se, kCalibSigmas, kKmcRepeats, mean, kKmcVarLo, kKmcVarHi, mx)};
}

Outcome method_comparison() {
  std::vector<std::vector<double>> min_runs, kmc_runs;
  const std::vector<std::vector<double>> us{{1, 0}, {0, 1}};
  for (int r = 0; r < kCompareRepeats; ++r) {
    std::vector<double> tr(9, 0.0);
    for (std::size_t j = 0; j < us.size(); ++j) {
      auto ctx = nn(1, us[j]);
      Rng rng = make_rng(derive_seed(kSeed, "repeat", {8, static_cast<std::uint64_t>(r)}), "als", {j});
      auto phi = successive_minimize(ctx, 3, ALSConfig{}, rng).phi;
      for (int ell = 0; ell <= 8; ++ell) tr[static_cast<std::size_t>(ell)] += 2.0 * eval_A_ell_exact(ctx, phi, ell);
    }
    min_runs.push_back(tr);
  }
  KMCSystem sys(JumpModel::nearest_neighbor(2), Grid(2, 1));
  for (int r = 0; r < kCompareRepeats; ++r)
    kmc_runs.push_back(kmc_trace(sys, derive_seed(kSeed, "repeat", {9, static_cast<std::uint64_t>(r)}), nullptr, nullptr));
  const auto [min_mean, min_max] = table_variance(min_runs);
  const auto [kmc_mean, kmc_max] = table_variance(kmc_runs);
  const bool ok = min_mean <= kMinVarMax && kmc_mean >= kKmcVarMin;
  return {ok, fmt("N=8, %d repeats: mean Var(Tr D) minimization %.3e (max %.0e, worst ell %.3e), kmc %.3e "
                  "(min %.0e, worst ell %.3e)",
                  kCompareRepeats, min_mean, kMinVarMax, min_max, kmc_mean, kKmcVarMin, kmc_max)};
}

Outcome property_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string(SELFDIFF_PROPERTIES) + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  const bool passed = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  return {passed && secs < kPropertySeconds,
          fmt("standalone suite %s in %.1f s (limit %.0f s)", passed ? "passed" : "FAILED", secs, kPropertySeconds)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"oracle equivalence", oracle_equivalence}},
      {2, {"tt norm correctness", norm_correctness}},
      {3, {"rank-1 optimality gap", rank1_gap}},
      {4, {"exact endpoints", endpoints}},
      {5, {"trace average", trace_average}},
      {6, {"variance reduction", variance_reduction}},
      {7, {"kmc calibration", kmc_calibration}},
      {8, {"method comparison", method_comparison}},
      {9, {"property suite", property_suite}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, v] : criteria) selected.insert(k);

  int failed = 0;
  for (int k : selected) {
    auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k, it->second.first.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failed, selected.size());
  return failed == 0 ? 0 : 1;
}
