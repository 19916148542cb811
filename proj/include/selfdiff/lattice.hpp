#pragma once

#include <array>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfdiff/random.hpp"

namespace selfdiff {

inline constexpr int kMaxDim = 3;

/// Point of Z^d; components beyond the model dimension are zero.
using LatticeVector = std::array<int, kMaxDim>;

/// Position of a site in the canonical enumeration of the grid.
using SiteIndex = int;

int taxicab(const LatticeVector& v);
std::string format_vector(const LatticeVector& v, int dim);

/// Jump directions v_k with probabilities p_k. Validated on construction:
/// nonzero, distinct, symmetric under v -> -v with equal probability, sum p_k = 1.
class JumpModel {
 public:
  JumpModel(int dim, std::vector<LatticeVector> directions, std::vector<double> probabilities);

  /// The 2d directions +-e_i, each with probability 1/(2d).
  static JumpModel nearest_neighbor(int dim);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(directions_.size()); }
  const LatticeVector& direction(int k) const { return directions_.at(k); }
  double probability(int k) const { return probabilities_.at(k); }
  const std::vector<LatticeVector>& directions() const noexcept { return directions_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  /// Index k' with v_{k'} = -v_k.
  int opposite(int k) const { return opposite_.at(k); }
  int max_taxicab() const noexcept;

 private:
  int dim_;
  std::vector<LatticeVector> directions_;
  std::vector<double> probabilities_;
  std::vector<int> opposite_;
};

/// The periodized box {-M..M}^d minus the origin, enumerated lexicographically
/// (last coordinate fastest). Grid::torus builds the same structure for
/// arbitrary side lengths (even sides use the range [-(L-1)/2, L/2]).
class Grid {
 public:
  Grid(int dim, int M);

  /// Experimental rectangular torus, e.g. {4, 4} for the 4x4 lattice (N = 15).
  static Grid torus(std::vector<int> sides);

  int dim() const noexcept { return dim_; }
  /// Reach: largest taxicab jump length the grid supports. Equals M for the standard grid.
  int M() const noexcept { return reach_; }
  int size() const noexcept { return static_cast<int>(sites_.size()); }
  const std::vector<int>& sides() const noexcept { return sides_; }
  bool is_torus_variant() const noexcept { return torus_variant_; }

  const LatticeVector& site(SiteIndex s) const { return sites_.at(s); }
  const std::vector<LatticeVector>& sites() const noexcept { return sites_; }

  /// Index of wrap(p); -1 when p wraps onto the origin.
  SiteIndex index_of(const LatticeVector& p) const;

  LatticeVector wrap(const LatticeVector& p) const;

  /// Throws InvalidDirection unless every model direction satisfies |v|_1 <= M.
  void require_compatible(const class JumpModel& model) const;

  std::string describe() const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.sides_ == b.sides_;
  }

 private:
  Grid(int dim, std::vector<int> sides, bool torus_variant);

  int dim_;
  int reach_;
  bool torus_variant_;
  std::vector<int> sides_;
  std::vector<int> low_;
  std::vector<LatticeVector> sites_;
};

LatticeVector wrap(const LatticeVector& p, const Grid& grid);

/// Binary occupancy over the grid sites, packed into one 64-bit word.
class Configuration {
 public:
  static constexpr int kMaxSites = 64;

  Configuration() = default;
  explicit Configuration(int size);

  static Configuration from_bits(int size, std::uint64_t bits);
  /// '0'/'1' characters in enumeration order.
  static Configuration from_string(std::string_view text);

  int size() const noexcept { return size_; }
  int weight() const noexcept { return weight_; }
  std::uint64_t bits() const noexcept { return bits_; }

  bool operator[](SiteIndex s) const noexcept { return (bits_ >> s) & 1U; }
  void set(SiteIndex s, bool occupied);

  std::string to_string() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::uint64_t bits_ = 0;
  int size_ = 0;
  int weight_ = 0;
};

/// eta^{0,w}: the tagged particle jumps by w and sites are relabeled so it stays at
/// the origin. Pure relabeling; legality (target empty) is the caller's business.
Configuration tagged_shift(const Configuration& eta, const LatticeVector& w, const Grid& grid);

/// eta^{y+v,y}: exchange of the values at y and wrap(y+v).
Configuration swap_exchange(const Configuration& eta, const LatticeVector& y, const LatticeVector& v,
                            const Grid& grid);

/// Index tables for one (grid, model) pair, used by every hot loop.
class JumpTables {
 public:
  JumpTables(const Grid& grid, const JumpModel& model);

  int num_sites() const noexcept { return num_sites_; }
  int num_directions() const noexcept { return num_directions_; }

  /// Site wrap(v_k): the tagged particle's jump target.
  SiteIndex target(int k) const { return target_[k]; }
  /// Site wrap(-v_k): emptied by a tagged jump along v_k.
  SiteIndex vacated(int k) const { return vacated_[k]; }
  /// wrap(s + v_k), or -1 when s + v_k is the origin.
  SiteIndex neighbor(SiteIndex s, int k) const { return neighbor_[k * num_sites_ + s]; }

  Configuration tagged_shift(const Configuration& eta, int k) const;
  Configuration swap(const Configuration& eta, SiteIndex s, int k) const;

 private:
  int num_sites_;
  int num_directions_;
  std::vector<SiteIndex> target_;
  std::vector<SiteIndex> vacated_;
  std::vector<SiteIndex> neighbor_;
};

std::uint64_t binomial(int n, int k);
double log_binomial(int n, int k);

/// All configurations of weight ell on n sites, in increasing bit-pattern order.
class WeightClass {
 public:
  WeightClass(int num_sites, int ell);

  class iterator {
   public:
    using value_type = Configuration;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    iterator(int n, std::uint64_t bits, std::uint64_t remaining) : n_(n), bits_(bits), remaining_(remaining) {}

    Configuration operator*() const { return Configuration::from_bits(n_, bits_); }
    iterator& operator++();
    iterator operator++(int) {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.remaining_ == b.remaining_; }

   private:
    int n_ = 0;
    std::uint64_t bits_ = 0;
    std::uint64_t remaining_ = 0;
  };

  iterator begin() const;
  iterator end() const { return {num_sites_, 0, 0}; }
  std::uint64_t size() const noexcept { return count_; }

 private:
  int num_sites_;
  int ell_;
  std::uint64_t count_;
};

inline WeightClass enumerate_weight_class(const Grid& grid, int ell) { return {grid.size(), ell}; }

/// Uniform over the configurations of weight ell.
Configuration sample_weight_class(int num_sites, int ell, Rng& rng);
inline Configuration sample_weight_class(const Grid& grid, int ell, Rng& rng) {
  return sample_weight_class(grid.size(), ell, rng);
}

}  // namespace selfdiff
