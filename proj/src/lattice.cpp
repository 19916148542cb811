#include "selfdiff/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "selfdiff/errors.hpp"

namespace selfdiff {

int taxicab(const LatticeVector& v) {
  return std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
}

std::string format_vector(const LatticeVector& v, int dim) {
  std::string out = "(";
  for (int i = 0; i < dim; ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out + ")";
}

namespace {

LatticeVector negate(const LatticeVector& v) { return {-v[0], -v[1], -v[2]}; }

LatticeVector add(const LatticeVector& a, const LatticeVector& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

bool is_zero(const LatticeVector& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

}  // namespace

// ---------------------------------------------------------------------------
// JumpModel

JumpModel::JumpModel(int dim, std::vector<LatticeVector> directions, std::vector<double> probabilities)
    : dim_(dim), directions_(std::move(directions)), probabilities_(std::move(probabilities)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("jump model: dimension must be 1, 2 or 3");
  if (directions_.empty()) throw std::invalid_argument("jump model: no directions");
  if (directions_.size() != probabilities_.size())
    throw std::invalid_argument("jump model: directions and probabilities differ in length");

  double total = 0.0;
  for (std::size_t k = 0; k < directions_.size(); ++k) {
    const auto& v = directions_[k];
    for (int i = dim_; i < kMaxDim; ++i)
      if (v[i] != 0) throw std::invalid_argument("jump model: direction has components beyond dimension");
    if (is_zero(v)) throw InvalidDirection("jump model: zero direction");
    const double p = probabilities_[k];
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("jump model: probability outside (0,1]");
    total += p;
    for (std::size_t j = 0; j < k; ++j)
      if (directions_[j] == v)
        throw std::invalid_argument("jump model: duplicate direction " + format_vector(v, dim_));
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("jump model: probabilities do not sum to 1");

  opposite_.assign(directions_.size(), -1);
  for (std::size_t k = 0; k < directions_.size(); ++k) {
    const auto minus = negate(directions_[k]);
    auto it = std::find(directions_.begin(), directions_.end(), minus);
    if (it == directions_.end())
      throw std::invalid_argument("jump model: missing opposite of " + format_vector(directions_[k], dim_));
    const auto j = static_cast<std::size_t>(it - directions_.begin());
    if (std::abs(probabilities_[j] - probabilities_[k]) > 1e-15)
      throw std::invalid_argument("jump model: asymmetric probabilities for " + format_vector(directions_[k], dim_));
    opposite_[k] = static_cast<int>(j);
  }
}

JumpModel JumpModel::nearest_neighbor(int dim) {
  std::vector<LatticeVector> dirs;
  for (int i = 0; i < dim; ++i) {
    LatticeVector e{};
    e[i] = 1;
    dirs.push_back(e);
    e[i] = -1;
    dirs.push_back(e);
  }
  std::vector<double> probs(dirs.size(), 1.0 / static_cast<double>(dirs.size()));
  return {dim, std::move(dirs), std::move(probs)};
}

int JumpModel::max_taxicab() const noexcept {
  int m = 0;
  for (const auto& v : directions_) m = std::max(m, taxicab(v));
  return m;
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int dim, int M) : Grid(dim, std::vector<int>(static_cast<std::size_t>(std::max(dim, 0)), 2 * M + 1), false) {
  if (M < 1) throw std::invalid_argument("grid: M must be >= 1");
}

Grid Grid::torus(std::vector<int> sides) {
  const int dim = static_cast<int>(sides.size());
  return Grid(dim, std::move(sides), true);
}

Grid::Grid(int dim, std::vector<int> sides, bool torus_variant)
    : dim_(dim), reach_(0), torus_variant_(torus_variant), sides_(std::move(sides)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("grid: dimension must be 1, 2 or 3");
  long total = 1;
  reach_ = 1 << 20;
  for (int L : sides_) {
    if (L < 3) throw std::invalid_argument("grid: side length must be >= 3");
    total *= L;
    low_.push_back(-(L - 1) / 2);
    reach_ = std::min(reach_, (L - 1) / 2);
  }
  if (total - 1 > Configuration::kMaxSites)
    throw TooLarge("grid: " + std::to_string(total - 1) + " sites exceed the supported maximum of " +
                   std::to_string(Configuration::kMaxSites));

  // lexicographic, last coordinate fastest, origin skipped
  LatticeVector p{};
  for (int i = 0; i < dim_; ++i) p[i] = low_[i];
  for (long n = 0; n < total; ++n) {
    if (!is_zero(p)) sites_.push_back(p);
    for (int i = dim_ - 1; i >= 0; --i) {
      if (++p[i] <= low_[i] + sides_[i] - 1) break;
      p[i] = low_[i];
    }
  }
}

LatticeVector Grid::wrap(const LatticeVector& p) const {
  LatticeVector out{};
  for (int i = 0; i < dim_; ++i) {
    const int L = sides_[i];
    out[i] = ((p[i] - low_[i]) % L + L) % L + low_[i];
  }
  return out;
}

LatticeVector wrap(const LatticeVector& p, const Grid& grid) { return grid.wrap(p); }

SiteIndex Grid::index_of(const LatticeVector& p) const {
  const LatticeVector q = wrap(p);
  long lin = 0;
  long origin = 0;
  for (int i = 0; i < dim_; ++i) {
    lin = lin * sides_[i] + (q[i] - low_[i]);
    origin = origin * sides_[i] + (0 - low_[i]);
  }
  if (lin == origin) return -1;
  return static_cast<SiteIndex>(lin < origin ? lin : lin - 1);
}

void Grid::require_compatible(const JumpModel& model) const {
  if (model.dim() != dim_) throw InvalidDirection("grid and jump model dimensions differ");
  for (const auto& v : model.directions())
    if (taxicab(v) > reach_)
      throw InvalidDirection("direction " + format_vector(v, dim_) + " exceeds grid reach M=" + std::to_string(reach_));
  // distinct jump targets on the torus (needed by the stratified estimator)
  for (int k = 0; k < model.size(); ++k)
    for (int j = 0; j < k; ++j)
      if (index_of(model.direction(k)) == index_of(model.direction(j)))
        throw InvalidDirection("directions " + format_vector(model.direction(k), dim_) + " and " +
                               format_vector(model.direction(j), dim_) + " wrap to the same site");
}

std::string Grid::describe() const {
  std::ostringstream os;
  if (torus_variant_) {
    os << "torus ";
    for (std::size_t i = 0; i < sides_.size(); ++i) os << (i ? "x" : "") << sides_[i];
  } else {
    os << "M=" << reach_ << " d=" << dim_;
  }
  os << " N=" << size();
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(int size) : size_(size) {
  if (size < 0 || size > kMaxSites) throw TooLarge("configuration size out of range");
}

Configuration Configuration::from_bits(int size, std::uint64_t bits) {
  Configuration c(size);
  if (size < kMaxSites && (bits >> size) != 0) throw std::invalid_argument("configuration bits beyond size");
  c.bits_ = bits;
  c.weight_ = std::popcount(bits);
  return c;
}

Configuration Configuration::from_string(std::string_view text) {
  Configuration c(static_cast<int>(text.size()));
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1')
      c.set(static_cast<SiteIndex>(i), true);
    else if (text[i] != '0')
      throw std::invalid_argument("configuration string must contain only '0' and '1'");
  }
  return c;
}

void Configuration::set(SiteIndex s, bool occupied) {
  const std::uint64_t mask = std::uint64_t{1} << s;
  const bool was = (bits_ & mask) != 0;
  if (was == occupied) return;
  bits_ ^= mask;
  weight_ += occupied ? 1 : -1;
}

std::string Configuration::to_string() const {
  std::string s(static_cast<std::size_t>(size_), '0');
  for (int i = 0; i < size_; ++i)
    if ((*this)[i]) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

// ---------------------------------------------------------------------------
// transformations

Configuration tagged_shift(const Configuration& eta, const LatticeVector& w, const Grid& grid) {
  if (eta.size() != grid.size()) throw ShapeMismatch("tagged_shift: configuration size differs from grid");
  if (grid.index_of(w) < 0) throw InvalidDirection("tagged_shift: direction wraps onto the origin");
  if (taxicab(w) > grid.M()) throw InvalidDirection("tagged_shift: |w|_1 exceeds M");
  const LatticeVector minus_w = negate(w);
  Configuration out(grid.size());
  for (SiteIndex s = 0; s < grid.size(); ++s) {
    if (grid.wrap(grid.site(s)) == grid.wrap(minus_w)) continue;
    const SiteIndex src = grid.index_of(add(grid.site(s), w));
    // |s + w| components stay below the period, so only s = -w reaches the origin
    if (src < 0) throw NumericalError("tagged_shift: periodic image of the origin reached");
    out.set(s, eta[src]);
  }
  return out;
}

Configuration swap_exchange(const Configuration& eta, const LatticeVector& y, const LatticeVector& v,
                            const Grid& grid) {
  if (eta.size() != grid.size()) throw ShapeMismatch("swap_exchange: configuration size differs from grid");
  const SiteIndex a = grid.index_of(y);
  if (a < 0 || grid.wrap(y) != y) throw std::out_of_range("swap_exchange: y is not a grid site");
  const LatticeVector z = add(y, v);
  if (is_zero(z)) throw ExcludedPair("swap_exchange: y + v is the origin");
  if (taxicab(v) > grid.M()) throw InvalidDirection("swap_exchange: |v|_1 exceeds M");
  const SiteIndex b = grid.index_of(z);
  if (b < 0) throw NumericalError("swap_exchange: y + v wrapped onto the origin");
  Configuration out = eta;
  out.set(a, eta[b]);
  out.set(b, eta[a]);
  return out;
}

// ---------------------------------------------------------------------------
// JumpTables

JumpTables::JumpTables(const Grid& grid, const JumpModel& model)
    : num_sites_(grid.size()), num_directions_(model.size()) {
  grid.require_compatible(model);
  target_.resize(static_cast<std::size_t>(num_directions_));
  vacated_.resize(static_cast<std::size_t>(num_directions_));
  neighbor_.resize(static_cast<std::size_t>(num_directions_ * num_sites_));
  for (int k = 0; k < num_directions_; ++k) {
    const auto& v = model.direction(k);
    target_[k] = grid.index_of(v);
    vacated_[k] = grid.index_of(negate(v));
    for (SiteIndex s = 0; s < num_sites_; ++s) {
      const LatticeVector z = add(grid.site(s), v);
      const SiteIndex t = grid.index_of(z);
      if (t < 0 && !is_zero(z)) throw NumericalError("jump tables: periodic image of the origin reached");
      neighbor_[static_cast<std::size_t>(k * num_sites_ + s)] = t;
    }
  }
}

Configuration JumpTables::tagged_shift(const Configuration& eta, int k) const {
  const SiteIndex* nb = &neighbor_[static_cast<std::size_t>(k * num_sites_)];
  const std::uint64_t in = eta.bits();
  std::uint64_t out = 0;
  for (SiteIndex s = 0; s < num_sites_; ++s) {
    const SiteIndex src = nb[s];
    if (src >= 0) out |= ((in >> src) & 1U) << s;
  }
  return Configuration::from_bits(num_sites_, out);
}

Configuration JumpTables::swap(const Configuration& eta, SiteIndex s, int k) const {
  const SiteIndex t = neighbor(s, k);
  if (t < 0) throw ExcludedPair("swap: y + v is the origin");
  const std::uint64_t bits = eta.bits();
  const std::uint64_t diff = ((bits >> s) ^ (bits >> t)) & 1U;
  return Configuration::from_bits(num_sites_, bits ^ ((diff << s) | (diff << t)));
}

// ---------------------------------------------------------------------------
// weight classes

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // exact: r * (n - k + i) is divisible by i; use gcd to avoid overflow for n <= 64
    std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    std::uint64_t den = static_cast<std::uint64_t>(i);
    const std::uint64_t g = std::gcd(r, den);
    r /= g;
    den /= g;
    num /= den;
    r *= num;
  }
  return r;
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

WeightClass::WeightClass(int num_sites, int ell) : num_sites_(num_sites), ell_(ell), count_(0) {
  if (num_sites < 0 || num_sites > Configuration::kMaxSites) throw TooLarge("weight class: too many sites");
  if (ell < 0 || ell > num_sites) throw std::out_of_range("weight class: ell out of range");
  count_ = binomial(num_sites, ell);
}

WeightClass::iterator WeightClass::begin() const {
  const std::uint64_t first = ell_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << ell_) - 1;
  return {num_sites_, first, count_};
}

WeightClass::iterator& WeightClass::iterator::operator++() {
  if (--remaining_ == 0) return *this;
  // Gosper's hack: next larger integer with the same popcount
  const std::uint64_t c = bits_ & (~bits_ + 1);
  const std::uint64_t r = bits_ + c;
  bits_ = (((r ^ bits_) >> 2) / c) | r;
  return *this;
}

Configuration sample_weight_class(int num_sites, int ell, Rng& rng) {
  if (ell < 0 || ell > num_sites) throw std::out_of_range("sample_weight_class: ell out of range");
  Configuration c(num_sites);
  if (ell == 0) return c;
  if (ell == num_sites) {
    for (int s = 0; s < num_sites; ++s) c.set(s, true);
    return c;
  }
  std::array<int, Configuration::kMaxSites> sites{};
  std::iota(sites.begin(), sites.begin() + num_sites, 0);
  std::array<int, Configuration::kMaxSites> chosen{};
  std::sample(sites.begin(), sites.begin() + num_sites, chosen.begin(), ell, rng);
  for (int i = 0; i < ell; ++i) c.set(chosen[static_cast<std::size_t>(i)], true);
  return c;
}

}  // namespace selfdiff
