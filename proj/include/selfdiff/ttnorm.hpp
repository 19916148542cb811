#pragma once

#include <span>
#include <vector>

#include "selfdiff/lowrank.hpp"

namespace selfdiff {

/// Sum of rho signed rank-1 terms written as a tensor train with cores
/// 1x2xrho, rhox2xrho, ..., rhox2x1. Interior cores are block diagonal, so only the
/// rho 2-vectors of each core are stored; term signs are folded into the first core.
class TTChain {
 public:
  TTChain(int num_sites, int rho);

  int num_sites() const noexcept { return num_sites_; }
  int rank() const noexcept { return rho_; }
  /// Interior cores hold exactly rho nonzero 2-vectors (the stored representation).
  bool block_diagonal() const noexcept { return true; }

  CorePair& pair(int site, int term) { return pairs_[static_cast<std::size_t>(site * rho_ + term)]; }
  const CorePair& pair(int site, int term) const { return pairs_[static_cast<std::size_t>(site * rho_ + term)]; }
  std::span<const CorePair> site_pairs(int site) const {
    return {pairs_.data() + static_cast<std::size_t>(site * rho_), static_cast<std::size_t>(rho_)};
  }

  struct DenseCore {
    int left = 0;
    int right = 0;
    std::vector<double> data;  ///< index (a, i, b) -> (a * 2 + i) * right + b
    double at(int a, int i, int b) const { return data[static_cast<std::size_t>((a * 2 + i) * right + b)]; }
  };
  /// Core j expanded to its dense (left, 2, right) form.
  DenseCore dense_core(int site) const;

  /// Entry of the contracted tensor at eta.
  double contract(const Configuration& eta) const;

 private:
  int num_sites_;
  int rho_;
  std::vector<CorePair> pairs_;
};

/// Arithmetic counters for one sweep.
struct NormStats {
  long core_update_mults = 0;  ///< multiplications spent pushing R into the next core
  int qr_calls = 0;
};

TTChain assemble_chain(std::span<const Rank1Term> terms);

/// ||T||_F^2 by left-to-right QR orthogonalization of the chain.
double frobenius_norm_sq(const TTChain& chain, NormStats* stats = nullptr);

/// Explicit sum over all 2^N entries. Test oracle; N <= 20.
double brute_force_norm_sq(std::span<const Rank1Term> terms);

namespace detail {
/// Householder triangularization of the column-major m x n matrix `a` (leading
/// dimension m). On return the upper triangle of the first min(m, n) rows holds R.
/// Returns min(m, n).
int householder_r(double* a, int m, int n);
}  // namespace detail

}  // namespace selfdiff
