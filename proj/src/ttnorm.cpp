#include "selfdiff/ttnorm.hpp"

#include <algorithm>
#include <cmath>

#include "selfdiff/errors.hpp"

namespace selfdiff {

TTChain::TTChain(int num_sites, int rho) : num_sites_(num_sites), rho_(rho) {
  if (num_sites < 1) throw std::invalid_argument("tt chain: needs at least one site");
  if (rho < 1) throw std::invalid_argument("tt chain: needs at least one term");
  pairs_.assign(static_cast<std::size_t>(num_sites) * static_cast<std::size_t>(rho), CorePair{});
}

TTChain::DenseCore TTChain::dense_core(int site) const {
  DenseCore c;
  const bool first = site == 0;
  const bool last = site == num_sites_ - 1;
  c.left = first ? 1 : rho_;
  c.right = last ? 1 : rho_;
  c.data.assign(static_cast<std::size_t>(c.left * 2 * c.right), 0.0);
  for (int t = 0; t < rho_; ++t) {
    const int a = first ? 0 : t;
    const int b = last ? 0 : t;
    const auto& p = pair(site, t);
    c.data[static_cast<std::size_t>((a * 2 + 0) * c.right + b)] += p.at0;
    c.data[static_cast<std::size_t>((a * 2 + 1) * c.right + b)] += p.at1;
  }
  return c;
}

double TTChain::contract(const Configuration& eta) const {
  if (eta.size() != num_sites_) throw ShapeMismatch("tt chain: configuration length mismatch");
  double sum = 0.0;
  for (int t = 0; t < rho_; ++t) {
    double p = 1.0;
    for (int s = 0; s < num_sites_; ++s) p *= pair(s, t)(eta[s]);
    sum += p;
  }
  return sum;
}

TTChain assemble_chain(std::span<const Rank1Term> terms) {
  if (terms.empty()) throw std::invalid_argument("assemble_chain: no terms");
  const int n = terms.front().size();
  TTChain chain(n, static_cast<int>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    if (term.size() != n) throw ShapeMismatch("assemble_chain: terms differ in length");
    for (int s = 0; s < n; ++s) chain.pair(s, static_cast<int>(t)) = term.cores[static_cast<std::size_t>(s)];
    auto& first = chain.pair(0, static_cast<int>(t));
    first.at0 *= term.sign;
    first.at1 *= term.sign;
  }
  return chain;
}

namespace detail {

int householder_r(double* a, int m, int n) {
  const int steps = std::min(m, n);
  for (int j = 0; j < steps; ++j) {
    if (j == m - 1) break;
    double* col = a + static_cast<std::ptrdiff_t>(j) * m;
    double norm2 = 0.0;
    for (int i = j; i < m; ++i) norm2 += col[i] * col[i];
    if (norm2 == 0.0) continue;
    const double norm = std::sqrt(norm2);
    const double alpha = col[j] > 0.0 ? -norm : norm;
    // v = x - alpha e_1, stored in col[j..m)
    col[j] -= alpha;
    const double vnorm2 = norm2 - 2.0 * alpha * (col[j] + alpha) + alpha * alpha;
    // vnorm2 = |x|^2 - 2 alpha x_0 + alpha^2 with x_0 = col[j] + alpha
    if (!(vnorm2 > 0.0) || !std::isfinite(vnorm2)) throw NumericalError("householder: breakdown");
    for (int c = j + 1; c < n; ++c) {
      double* other = a + static_cast<std::ptrdiff_t>(c) * m;
      double dot = 0.0;
      for (int i = j; i < m; ++i) dot += col[i] * other[i];
      const double f = 2.0 * dot / vnorm2;
      for (int i = j; i < m; ++i) other[i] -= f * col[i];
    }
    col[j] = alpha;
    for (int i = j + 1; i < m; ++i) col[i] = 0.0;
  }
  return steps;
}

}  // namespace detail

double frobenius_norm_sq(const TTChain& chain, NormStats* stats) {
  const int n = chain.num_sites();
  const int rho = chain.rank();

  if (n == 1) {
    double v0 = 0.0;
    double v1 = 0.0;
    for (const auto& p : chain.site_pairs(0)) {
      v0 += p.at0;
      v1 += p.at1;
    }
    const double out = v0 * v0 + v1 * v1;
    if (!std::isfinite(out)) throw NumericalError("frobenius_norm_sq: non-finite result");
    return out;
  }

  // work: column-major (2k) x rho matrix; r: k x rho upper-trapezoidal factor (column-major, ld = rho)
  std::vector<double> work(static_cast<std::size_t>(2 * rho * rho));
  std::vector<double> r(static_cast<std::size_t>(rho * rho), 0.0);

  // first core reshaped to 2 x rho
  {
    const int m = 2;
    for (int b = 0; b < rho; ++b) {
      const auto& p = chain.pair(0, b);
      work[static_cast<std::size_t>(b * m + 0)] = p.at0;
      work[static_cast<std::size_t>(b * m + 1)] = p.at1;
    }
  }
  int m = 2;
  int k = 0;
  for (int j = 0; j < n - 1; ++j) {
    if (j > 0) {
      // push R (k x rho) into block-diagonal core j: G(a,i,b) = R(a,b) * x_b(i)
      m = 2 * k;
      for (int b = 0; b < rho; ++b) {
        const auto& p = chain.pair(j, b);
        double* gcol = work.data() + static_cast<std::ptrdiff_t>(b) * m;
        const double* rcol = r.data() + static_cast<std::ptrdiff_t>(b) * rho;
        for (int a = 0; a < k; ++a) {
          gcol[2 * a + 0] = rcol[a] * p.at0;
          gcol[2 * a + 1] = rcol[a] * p.at1;
        }
      }
      if (stats) stats->core_update_mults += 2L * k * rho;
    }
    k = detail::householder_r(work.data(), m, rho);
    if (stats) ++stats->qr_calls;
    for (int b = 0; b < rho; ++b)
      for (int a = 0; a < k; ++a)
        r[static_cast<std::size_t>(b * rho + a)] = a <= b ? work[static_cast<std::size_t>(b * m + a)] : 0.0;
  }

  // last core: G(a,i) = sum_b R(a,b) x_b(i)
  double out = 0.0;
  for (int a = 0; a < k; ++a) {
    double g0 = 0.0;
    double g1 = 0.0;
    for (int b = a; b < rho; ++b) {
      const auto& p = chain.pair(n - 1, b);
      const double rab = r[static_cast<std::size_t>(b * rho + a)];
      g0 += rab * p.at0;
      g1 += rab * p.at1;
    }
    out += g0 * g0 + g1 * g1;
  }
  if (stats) stats->core_update_mults += 2L * k * rho;
  if (!std::isfinite(out)) throw NumericalError("frobenius_norm_sq: non-finite result");
  return out;
}

double brute_force_norm_sq(std::span<const Rank1Term> terms) {
  if (terms.empty()) return 0.0;
  const int n = terms.front().size();
  if (n > 20) throw TooLarge("brute_force_norm_sq: N > 20");
  for (const auto& t : terms)
    if (t.size() != n) throw ShapeMismatch("brute_force_norm_sq: terms differ in length");
  double sum = 0.0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    double entry = 0.0;
    for (const auto& t : terms) {
      double p = t.sign;
      for (int s = 0; s < n; ++s) p *= t.cores[static_cast<std::size_t>(s)]((bits >> s) & 1U);
      entry += p;
    }
    sum += entry * entry;
  }
  return sum;
}

}  // namespace selfdiff
