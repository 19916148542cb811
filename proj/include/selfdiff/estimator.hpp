#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "selfdiff/objective.hpp"
#include "selfdiff/random.hpp"

namespace selfdiff {

struct TracePoint {
  std::uint64_t evaluations = 0;
  double estimate = 0.0;
};

struct MCEstimate {
  double value = 0.0;
  /// Plug-in estimate of the estimator's variance (0 when exact).
  double variance = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<TracePoint> trace;
};

/// Mean of f over n_samples uniform draws from the weight-ell class.
/// trace_every > 0 records the running mean every that many samples.
MCEstimate naive_mc(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell, std::uint64_t n_samples,
                    Rng& rng, std::uint64_t trace_every = 0);

/// One occupancy pattern of the K jump-target sites together with the number of
/// particles n2 left for the other N - K sites.
struct Stratum {
  std::uint32_t target_bits = 0;  ///< bit k set: target of direction k occupied
  int n1 = 0;
  int n2 = 0;
  std::uint64_t population = 0;  ///< binomial(N - K, n2)
  double log_weight = 0.0;       ///< log of population
  bool enumerate = false;        ///< population <= budget: evaluate every member
};

struct StratifiedPlan {
  int ell = 0;
  int budget = 0;  ///< samples per non-enumerated stratum
  std::vector<SiteIndex> targets;
  std::vector<SiteIndex> rest;
  std::vector<Stratum> strata;  ///< admissible strata in binary order of target_bits

  std::uint64_t evaluations() const;
};

/// Builds the strata for weight ell and checks that their populations add up to
/// binomial(N, ell).
StratifiedPlan make_stratified_plan(const ObjectiveContext& ctx, int ell, int budget);

/// Stratified estimate of A_{M,ell}(phi). Each sampled stratum draws from its own
/// stream seeded from `rng` in stratum order, so `threads` does not change the result.
/// The trace is recorded in rounds: after round j every sampled stratum holds j samples.
MCEstimate stratified_mc(const ObjectiveContext& ctx, const LowRankFunction& phi, int ell, int budget, Rng& rng,
                         int threads = 1, bool record_trace = false);

/// Uniform over the binomial(n, w) patterns of n bits with w ones.
Configuration sample_fixed_weight(int n, int w, Rng& rng);

/// sum_i exp(logw_i) v_i / sum_i exp(logw_i), shifted by the largest log weight.
double log_weighted_sum(std::span<const double> log_weights, std::span<const double> values);

}  // namespace selfdiff
