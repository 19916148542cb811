#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "selfdiff/lattice.hpp"

namespace selfdiff {

/// One per-site factor R_s: {0,1} -> R of a pure tensor product function.
struct CorePair {
  double at0 = 1.0;  ///< value on an empty site
  double at1 = 1.0;  ///< value on an occupied site

  double operator()(bool occupied) const noexcept { return occupied ? at1 : at0; }
  friend bool operator==(const CorePair&, const CorePair&) = default;
};

/// R(eta) = prod_s R_s(eta_s).
class Rank1Function {
 public:
  Rank1Function() = default;
  /// `weight` is folded into the first core.
  explicit Rank1Function(std::vector<CorePair> cores, double weight = 1.0);

  static Rank1Function constant(int num_sites, double c);
  static Rank1Function zero(int num_sites) { return constant(num_sites, 0.0); }

  int size() const noexcept { return static_cast<int>(cores_.size()); }
  const CorePair& core(SiteIndex s) const { return cores_.at(static_cast<std::size_t>(s)); }
  void set_core(SiteIndex s, CorePair c) { cores_.at(static_cast<std::size_t>(s)) = c; }
  std::span<const CorePair> cores() const noexcept { return cores_; }

  double operator()(const Configuration& eta) const;

  friend bool operator==(const Rank1Function&, const Rank1Function&) = default;

 private:
  std::vector<CorePair> cores_;
};

/// Phi = R^(1) + ... + R^(r); r = 0 is the zero function.
class LowRankFunction {
 public:
  explicit LowRankFunction(int num_sites = 0) : num_sites_(num_sites) {}
  LowRankFunction(int num_sites, std::vector<Rank1Function> terms);

  int num_sites() const noexcept { return num_sites_; }
  int rank() const noexcept { return static_cast<int>(terms_.size()); }
  const Rank1Function& term(int i) const { return terms_.at(static_cast<std::size_t>(i)); }
  const std::vector<Rank1Function>& terms() const noexcept { return terms_; }

  void add(Rank1Function term);
  LowRankFunction plus(Rank1Function term) const;

  double operator()(const Configuration& eta) const;

  friend bool operator==(const LowRankFunction&, const LowRankFunction&) = default;

 private:
  int num_sites_;
  std::vector<Rank1Function> terms_;
};

/// One signed rank-1 summand of a tensor expression.
struct Rank1Term {
  std::vector<CorePair> cores;
  int sign = 1;

  int size() const noexcept { return static_cast<int>(cores.size()); }
};

double evaluate(const LowRankFunction& phi, const Configuration& eta);
double evaluate(const Rank1Term& term, const Configuration& eta);

Rank1Term to_term(const Rank1Function& r, int sign = 1);

/// Cores of eta -> R(eta^{0,v}): core at t = v is the constant R_{-v}(0), core at
/// t != v is R_{wrap(t - v)}. Exact, no 2^N object is formed.
Rank1Term shift_tagged_term(const Rank1Function& r, const LatticeVector& v, const Grid& grid);
Rank1Term shift_tagged_term(const Rank1Function& r, const JumpTables& tables, int k, int sign = 1);

/// Cores of eta -> R(eta^{y+v,y}): pairs at y and wrap(y+v) exchanged.
Rank1Term swap_term(const Rank1Function& r, const LatticeVector& y, const LatticeVector& v, const Grid& grid);
Rank1Term swap_term(const Rank1Function& r, const JumpTables& tables, SiteIndex y, int k, int sign = 1);

Rank1Term constant_term(double c, int num_sites);
inline Rank1Term constant_term(double c, const Grid& grid) { return constant_term(c, grid.size()); }

/// Multiplies the term by (1 - eta_site).
Rank1Term project_empty(Rank1Term term, SiteIndex site);
Rank1Term project_empty(Rank1Term term, const LatticeVector& site, const Grid& grid);

/// Flat table: one row `term site at0 at1` per core, tab-delimited, '#' header lines.
void write_lowrank(std::ostream& os, const LowRankFunction& phi, const std::vector<std::string>& header = {});
LowRankFunction read_lowrank(std::istream& is);

}  // namespace selfdiff
