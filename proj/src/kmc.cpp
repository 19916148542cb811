#include "selfdiff/kmc.hpp"

#include <cmath>
#include <stdexcept>

#include "selfdiff/errors.hpp"
#include "selfdiff/parallel.hpp"

namespace selfdiff {

KMCSystem::KMCSystem(JumpModel model, Grid grid)
    : model_(std::move(model)), grid_(std::move(grid)), tables_(grid_, model_) {}

void KMCParams::validate(int dim) const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("kmc: T must be positive");
  if (nhat < 1) throw std::invalid_argument("kmc: nhat must be >= 1");
  if (us.empty()) throw std::invalid_argument("kmc: no drift directions");
  for (const auto& u : us)
    if (static_cast<int>(u.size()) != dim) throw ShapeMismatch("kmc: drift direction has the wrong dimension");
}

LatticeVector simulate_one(const KMCSystem& sys, int ell, double T, Rng& rng, EventCounts* counts,
                           const KMCObserver& observer) {
  const int n = sys.num_sites();
  if (ell < 0 || ell > n) throw std::out_of_range("simulate_one: ell out of range");
  const auto& tables = sys.tables();
  const auto& model = sys.model();

  Configuration eta = sample_weight_class(n, ell, rng);
  // occupied[j]: site of environment particle j
  std::vector<SiteIndex> occupied;
  auto rebuild = [&] {
    occupied.clear();
    for (SiteIndex s = 0; s < n; ++s)
      if (eta[s]) occupied.push_back(s);
  };
  rebuild();

  std::exponential_distribution<double> clock(static_cast<double>(ell + 1));
  std::uniform_int_distribution<int> agent(0, ell);
  std::discrete_distribution<int> direction(model.probabilities().begin(), model.probabilities().end());

  LatticeVector w{};
  EventCounts local;
  double t = 0.0;
  while (true) {
    t += clock(rng);
    if (t > T) break;
    ++local.events;
    const int a = agent(rng);
    const int k = direction(rng);
    if (a == ell) {
      if (eta[tables.target(k)]) {
        ++local.blocked;
        continue;
      }
      eta = tables.tagged_shift(eta, k);
      const auto& v = model.direction(k);
      for (int i = 0; i < kMaxDim; ++i) w[i] += v[i];
      ++local.tagged_jumps;
      rebuild();
    } else {
      const SiteIndex y = occupied[static_cast<std::size_t>(a)];
      const SiteIndex z = tables.neighbor(y, k);
      if (z < 0 || eta[z]) {  // z < 0: the tagged particle sits there
        ++local.blocked;
        continue;
      }
      eta.set(y, false);
      eta.set(z, true);
      occupied[static_cast<std::size_t>(a)] = z;
    }
    if (observer) observer(eta, w);
  }
  if (counts) *counts += local;
  return w;
}

KMCEstimate kmc_estimate(const KMCSystem& sys, int ell, const KMCParams& params, std::uint64_t seed) {
  const int dim = sys.model().dim();
  params.validate(dim);
  const int n = sys.num_sites();
  if (ell < 0 || ell > n) throw std::out_of_range("kmc_estimate: ell out of range");

  KMCEstimate out;
  out.ell = ell;
  out.trajectories = params.trajectories(ell);
  const std::size_t n_traj = out.trajectories;
  const std::size_t n_u = params.us.size();

  std::vector<LatticeVector> disp(n_traj);
  std::vector<EventCounts> counts(n_traj);
  parallel_for(n_traj, params.threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, "kmc", {static_cast<std::uint64_t>(ell), static_cast<std::uint64_t>(i)});
    disp[i] = simulate_one(sys, ell, params.T, rng, &counts[i]);
  });

  out.alpha.assign(n_u, 0.0);
  out.stderr_alpha.assign(n_u, 0.0);
  out.trace.assign(n_u, {});
  std::vector<double> sum(n_u, 0.0);
  std::vector<double> sum_sq(n_u, 0.0);
  for (std::size_t i = 0; i < n_traj; ++i) {
    out.counts += counts[i];
    for (std::size_t j = 0; j < n_u; ++j) {
      double proj = 0.0;
      for (int c = 0; c < dim; ++c) proj += params.us[j][static_cast<std::size_t>(c)] * disp[i][c];
      const double x = proj * proj / params.T;
      sum[j] += x;
      sum_sq[j] += x * x;
      if (params.trace_every > 0 && ((i + 1) % params.trace_every == 0 || i + 1 == n_traj))
        out.trace[j].emplace_back(i + 1, sum[j] / static_cast<double>(i + 1));
    }
  }
  const double m = static_cast<double>(n_traj);
  for (std::size_t j = 0; j < n_u; ++j) {
    out.alpha[j] = sum[j] / m;
    if (n_traj > 1) {
      const double var = std::max(0.0, (sum_sq[j] - m * out.alpha[j] * out.alpha[j]) / (m - 1.0));
      out.stderr_alpha[j] = std::sqrt(var / m);
    }
  }
  return out;
}

}  // namespace selfdiff
