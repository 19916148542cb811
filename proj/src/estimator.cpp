#include "selfdiff/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfdiff/errors.hpp"
#include "selfdiff/parallel.hpp"

namespace selfdiff {

MCEstimate naive_mc(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell, std::uint64_t n_samples,
                    Rng& rng, std::uint64_t trace_every) {
  const int n = ctx.num_sites();
  if (ell < 0 || ell > n) throw std::out_of_range("naive_mc: ell out of range");
  if (n_samples == 0) throw std::invalid_argument("naive_mc: needs at least one sample");
  MCEstimate out;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 1; i <= n_samples; ++i) {
    const double f = eval_f(ctx, phi, sample_weight_class(n, ell, rng));
    sum += f;
    sum_sq += f * f;
    if (trace_every > 0 && (i % trace_every == 0 || i == n_samples))
      out.trace.push_back({i, sum / static_cast<double>(i)});
  }
  const double m = static_cast<double>(n_samples);
  out.value = sum / m;
  out.evaluations = n_samples;
  if (n_samples > 1) out.variance = std::max(0.0, (sum_sq - m * out.value * out.value) / (m - 1.0)) / m;
  return out;
}

std::uint64_t StratifiedPlan::evaluations() const {
  std::uint64_t total = 0;
  for (const auto& s : strata) total += s.enumerate ? s.population : static_cast<std::uint64_t>(budget);
  return total;
}

StratifiedPlan make_stratified_plan(const ObjectiveContext& ctx, int ell, int budget) {
  const int n = ctx.num_sites();
  const auto& tables = ctx.tables();
  const int k_dirs = tables.num_directions();
  if (ell < 0 || ell > n) throw std::out_of_range("stratified plan: ell out of range");
  if (budget < 1) throw std::invalid_argument("stratified plan: budget must be >= 1");
  if (k_dirs > 20) throw TooLarge("stratified plan: more than 20 jump targets");

  StratifiedPlan plan;
  plan.ell = ell;
  plan.budget = budget;
  std::vector<bool> is_target(static_cast<std::size_t>(n), false);
  for (int k = 0; k < k_dirs; ++k) {
    const SiteIndex t = tables.target(k);
    if (is_target[static_cast<std::size_t>(t)]) throw InvalidDirection("stratified plan: jump targets coincide");
    is_target[static_cast<std::size_t>(t)] = true;
    plan.targets.push_back(t);
  }
  for (SiteIndex s = 0; s < n; ++s)
    if (!is_target[static_cast<std::size_t>(s)]) plan.rest.push_back(s);

  const int free_sites = n - k_dirs;
  std::uint64_t total = 0;
  for (std::uint32_t w1 = 0; w1 < (std::uint32_t{1} << k_dirs); ++w1) {
    Stratum s;
    s.target_bits = w1;
    s.n1 = std::popcount(w1);
    s.n2 = ell - s.n1;
    if (s.n2 < 0 || s.n2 > free_sites) continue;
    s.population = binomial(free_sites, s.n2);
    s.log_weight = log_binomial(free_sites, s.n2);
    s.enumerate = s.population <= static_cast<std::uint64_t>(budget);
    total += s.population;
    plan.strata.push_back(s);
  }
  if (total != binomial(n, ell)) throw NumericalError("stratified plan: stratum populations do not sum to binomial(N, ell)");
  return plan;
}

namespace {

Configuration place(const StratifiedPlan& plan, int n, std::uint32_t target_bits, const Configuration& rest) {
  Configuration eta(n);
  for (std::size_t k = 0; k < plan.targets.size(); ++k)
    if ((target_bits >> k) & 1U) eta.set(plan.targets[k], true);
  for (std::size_t i = 0; i < plan.rest.size(); ++i)
    if (rest[static_cast<SiteIndex>(i)]) eta.set(plan.rest[i], true);
  return eta;
}

}  // namespace

MCEstimate stratified_mc(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell, int budget, Rng& rng,
                         int threads, bool record_trace) {
  const int n = ctx.num_sites();
  const auto plan = make_stratified_plan(ctx, ell, budget);
  const int free_sites = static_cast<int>(plan.rest.size());
  const std::size_t count = plan.strata.size();

  std::vector<std::uint64_t> seeds(count);
  for (auto& s : seeds) s = rng();

  // samples[i]: f values of stratum i, in draw (or enumeration) order
  std::vector<std::vector<double>> samples(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto& st = plan.strata[i];
    auto& out = samples[i];
    if (st.enumerate) {
      out.reserve(st.population);
      for (const auto& rest : WeightClass(free_sites, st.n2))
        out.push_back(eval_f(ctx, phi, place(plan, n, st.target_bits, rest)));
    } else {
      Rng local(seeds[i]);
      out.reserve(static_cast<std::size_t>(budget));
      for (int j = 0; j < budget; ++j)
        out.push_back(eval_f(ctx, phi, place(plan, n, st.target_bits, sample_fixed_weight(free_sites, st.n2, local))));
    }
  });

  std::vector<double> log_w(count);
  std::vector<double> means(count);
  for (std::size_t i = 0; i < count; ++i) log_w[i] = plan.strata[i].log_weight;

  auto combine = [&](std::size_t round) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto& v = samples[i];
      const std::size_t m = plan.strata[i].enumerate ? v.size() : std::min(round, v.size());
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += v[j];
      means[i] = s / static_cast<double>(m);
    }
    return log_weighted_sum(log_w, means);
  };

  MCEstimate out;
  out.evaluations = plan.evaluations();
  out.value = combine(static_cast<std::size_t>(budget));

  // variance of the weighted mean: sum_s (w_s / Z)^2 s_s^2 / n_s over sampled strata
  const double log_z = log_binomial(n, ell);
  for (std::size_t i = 0; i < count; ++i) {
    if (plan.strata[i].enumerate || budget < 2) continue;
    const auto& v = samples[i];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double s2 = ss / static_cast<double>(v.size() - 1);
    const double frac = std::exp(log_w[i] - log_z);
    out.variance += frac * frac * s2 / static_cast<double>(v.size());
  }

  if (record_trace) {
    std::uint64_t enumerated = 0;
    std::uint64_t sampled_strata = 0;
    for (const auto& st : plan.strata) {
      if (st.enumerate) enumerated += st.population;
      else ++sampled_strata;
    }
    const int rounds = sampled_strata > 0 ? budget : 1;
    for (int j = 1; j <= rounds; ++j)
      out.trace.push_back({enumerated + sampled_strata * static_cast<std::uint64_t>(j), combine(static_cast<std::size_t>(j))});
  }
  return out;
}

Configuration sample_fixed_weight(int n, int w, Rng& rng) {
  if (n < 0 || n > Configuration::kMaxSites || w < 0 || w > n) throw std::out_of_range("sample_fixed_weight: bad range");
  if (n == 0) return Configuration(0);
  return sample_weight_class(n, w, rng);
}

double log_weighted_sum(std::span<const double> log_weights, std::span<const double> values) {
  if (log_weights.size() != values.size()) throw ShapeMismatch("log_weighted_sum: length mismatch");
  if (log_weights.empty()) throw std::invalid_argument("log_weighted_sum: empty input");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw NumericalError("log_weighted_sum: non-finite weights");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - top);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

}  // namespace selfdiff
