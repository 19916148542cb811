#include "selfdiff/lowrank.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "selfdiff/errors.hpp"

namespace selfdiff {

Rank1Function::Rank1Function(std::vector<CorePair> cores, double weight) : cores_(std::move(cores)) {
  for (const auto& c : cores_)
    if (!std::isfinite(c.at0) || !std::isfinite(c.at1)) throw std::invalid_argument("rank-1 function: non-finite core");
  if (weight != 1.0) {
    if (cores_.empty()) throw std::invalid_argument("rank-1 function: weight on an empty core list");
    cores_.front().at0 *= weight;
    cores_.front().at1 *= weight;
  }
}

Rank1Function Rank1Function::constant(int num_sites, double c) {
  if (num_sites < 1) throw std::invalid_argument("rank-1 function: needs at least one site");
  return Rank1Function(std::vector<CorePair>(static_cast<std::size_t>(num_sites)), c);
}

double Rank1Function::operator()(const Configuration& eta) const {
  if (eta.size() != size()) throw ShapeMismatch("rank-1 function: configuration length mismatch");
  double p = 1.0;
  for (int s = 0; s < size(); ++s) p *= cores_[static_cast<std::size_t>(s)](eta[s]);
  return p;
}

LowRankFunction::LowRankFunction(int num_sites, std::vector<Rank1Function> terms) : num_sites_(num_sites) {
  for (auto& t : terms) add(std::move(t));
}

void LowRankFunction::add(Rank1Function term) {
  if (term.size() != num_sites_) throw ShapeMismatch("low-rank function: term length mismatch");
  terms_.push_back(std::move(term));
}

LowRankFunction LowRankFunction::plus(Rank1Function term) const {
  LowRankFunction out = *this;
  out.add(std::move(term));
  return out;
}

double LowRankFunction::operator()(const Configuration& eta) const {
  if (eta.size() != num_sites_) throw ShapeMismatch("low-rank function: configuration length mismatch");
  double sum = 0.0;
  for (const auto& t : terms_) sum += t(eta);
  return sum;
}

double evaluate(const LowRankFunction& phi, const Configuration& eta) { return phi(eta); }

double evaluate(const Rank1Term& term, const Configuration& eta) {
  if (eta.size() != term.size()) throw ShapeMismatch("rank-1 term: configuration length mismatch");
  double p = static_cast<double>(term.sign);
  for (int s = 0; s < term.size(); ++s) p *= term.cores[static_cast<std::size_t>(s)](eta[s]);
  return p;
}

Rank1Term to_term(const Rank1Function& r, int sign) {
  return {std::vector<CorePair>(r.cores().begin(), r.cores().end()), sign};
}

Rank1Term shift_tagged_term(const Rank1Function& r, const JumpTables& tables, int k, int sign) {
  const int n = tables.num_sites();
  if (r.size() != n) throw ShapeMismatch("shift_tagged_term: term length mismatch");
  Rank1Term out{std::vector<CorePair>(static_cast<std::size_t>(n)), sign};
  const SiteIndex vacated = tables.vacated(k);
  for (SiteIndex s = 0; s < n; ++s) {
    const SiteIndex t = tables.neighbor(s, k);
    if (t >= 0) out.cores[static_cast<std::size_t>(t)] = r.core(s);
  }
  const double c = r.core(vacated).at0;
  out.cores[static_cast<std::size_t>(tables.target(k))] = {c, c};
  return out;
}

Rank1Term shift_tagged_term(const Rank1Function& r, const LatticeVector& v, const Grid& grid) {
  if (grid.index_of(v) < 0 || taxicab(v) > grid.M()) throw InvalidDirection("shift_tagged_term: invalid direction");
  if (r.size() != grid.size()) throw ShapeMismatch("shift_tagged_term: term length mismatch");
  const LatticeVector minus_v{-v[0], -v[1], -v[2]};
  Rank1Term out{std::vector<CorePair>(static_cast<std::size_t>(grid.size())), 1};
  const SiteIndex target = grid.index_of(v);
  for (SiteIndex t = 0; t < grid.size(); ++t) {
    if (t == target) continue;
    const auto& p = grid.site(t);
    out.cores[static_cast<std::size_t>(t)] = r.core(grid.index_of({p[0] - v[0], p[1] - v[1], p[2] - v[2]}));
  }
  const double c = r.core(grid.index_of(minus_v)).at0;
  out.cores[static_cast<std::size_t>(target)] = {c, c};
  return out;
}

Rank1Term swap_term(const Rank1Function& r, const JumpTables& tables, SiteIndex y, int k, int sign) {
  const SiteIndex z = tables.neighbor(y, k);
  if (z < 0) throw ExcludedPair("swap_term: y + v is the origin");
  Rank1Term out = to_term(r, sign);
  std::swap(out.cores[static_cast<std::size_t>(y)], out.cores[static_cast<std::size_t>(z)]);
  return out;
}

Rank1Term swap_term(const Rank1Function& r, const LatticeVector& y, const LatticeVector& v, const Grid& grid) {
  const SiteIndex a = grid.index_of(y);
  if (a < 0 || grid.wrap(y) != y) throw std::out_of_range("swap_term: y is not a grid site");
  const LatticeVector z{y[0] + v[0], y[1] + v[1], y[2] + v[2]};
  if (z == LatticeVector{}) throw ExcludedPair("swap_term: y + v is the origin");
  const SiteIndex b = grid.index_of(z);
  if (b < 0) throw InvalidDirection("swap_term: y + v wrapped onto the origin");
  if (r.size() != grid.size()) throw ShapeMismatch("swap_term: term length mismatch");
  Rank1Term out = to_term(r);
  std::swap(out.cores[static_cast<std::size_t>(a)], out.cores[static_cast<std::size_t>(b)]);
  return out;
}

Rank1Term constant_term(double c, int num_sites) { return to_term(Rank1Function::constant(num_sites, c)); }

Rank1Term project_empty(Rank1Term term, SiteIndex site) {
  if (site < 0 || site >= term.size()) throw std::out_of_range("project_empty: site outside grid");
  term.cores[static_cast<std::size_t>(site)].at1 = 0.0;
  return term;
}

Rank1Term project_empty(Rank1Term term, const LatticeVector& site, const Grid& grid) {
  const SiteIndex s = grid.index_of(site);
  if (s < 0 || grid.wrap(site) != site) throw std::out_of_range("project_empty: site outside grid");
  return project_empty(std::move(term), s);
}

// ---------------------------------------------------------------------------
// serialization

void write_lowrank(std::ostream& os, const LowRankFunction& phi, const std::vector<std::string>& header) {
  os << "# selfdiff lowrank\n";
  for (const auto& h : header) os << "# " << h << '\n';
  os << "# num_sites=" << phi.num_sites() << '\n';
  os << "# rank=" << phi.rank() << '\n';
  os << "term\tsite\tat0\tat1\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (int t = 0; t < phi.rank(); ++t)
    for (int s = 0; s < phi.num_sites(); ++s) {
      const auto& c = phi.term(t).core(s);
      os << t << '\t' << s << '\t' << c.at0 << '\t' << c.at1 << '\n';
    }
  os.precision(old);
}

LowRankFunction read_lowrank(std::istream& is) {
  int num_sites = -1;
  int rank = -1;
  std::vector<std::vector<CorePair>> cores;
  std::string line;
  int lineno = 0;
  bool saw_columns = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# num_sites=", 0) == 0) num_sites = std::stoi(line.substr(12));
      if (line.rfind("# rank=", 0) == 0) rank = std::stoi(line.substr(7));
      continue;
    }
    if (!saw_columns) {
      saw_columns = true;
      if (line.rfind("term", 0) == 0) continue;
    }
    if (num_sites < 0 || rank < 0) throw ConfigError(lineno, "lowrank table: missing num_sites/rank header");
    if (cores.empty()) cores.assign(static_cast<std::size_t>(rank), std::vector<CorePair>(static_cast<std::size_t>(num_sites)));
    std::istringstream row(line);
    int t = 0;
    int s = 0;
    CorePair c;
    if (!(row >> t >> s >> c.at0 >> c.at1)) throw ConfigError(lineno, "lowrank table: malformed row");
    if (t < 0 || t >= rank || s < 0 || s >= num_sites) throw ConfigError(lineno, "lowrank table: index out of range");
    cores[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = c;
  }
  if (num_sites < 0 || rank < 0) throw ConfigError(0, "lowrank table: missing header");
  LowRankFunction phi(num_sites);
  for (auto& c : cores) phi.add(Rank1Function(std::move(c)));
  return phi;
}

}  // namespace selfdiff
