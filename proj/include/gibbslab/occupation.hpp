#pragma once

// Occupation-number labels shared by the classical and quantum reduced
// density matrices and by the truncated Fock space.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace gibbslab {

using Occupation = std::vector<int>;

struct OccupationHash {
  std::size_t operator()(const Occupation& v) const noexcept;
};

/// Total particle number |nu|.
int particle_count(const Occupation& nu);
/// nu! = prod_i nu_i!.
double occupation_factorial(const Occupation& nu);

/// All occupations of K modes with exactly k particles, in descending
/// lexicographic order, so that the k = 1 ordering is e_0, e_1, ...
class SymmetricBasis {
 public:
  SymmetricBasis(std::size_t modes, std::size_t particles);

  std::size_t modes() const { return modes_; }
  std::size_t particles() const { return particles_; }
  std::size_t dimension() const { return states_.size(); }
  const Occupation& state(std::size_t i) const { return states_[i]; }
  const std::vector<Occupation>& states() const { return states_; }
  std::optional<std::size_t> index_of(const Occupation& nu) const;

  bool operator==(const SymmetricBasis& other) const {
    return modes_ == other.modes_ && particles_ == other.particles_;
  }

 private:
  std::size_t modes_;
  std::size_t particles_;
  std::vector<Occupation> states_;
  std::unordered_map<Occupation, std::size_t, OccupationHash> index_;
};

/// One term of the normalized symmetric tensor e_nu written in the product
/// basis: coefficient times u_{modes[0]} (x) u_{modes[1]} (x) ...
struct ProductTerm {
  std::vector<int> modes;
  double coefficient;
};

/// e_nu = sqrt(nu!/k!) * sum over distinct arrangements of the mode multiset.
std::vector<ProductTerm> product_expansion(const Occupation& nu);

struct BasisLimits {
  // Largest particle sector handed to a dense eigensolver.
  std::size_t max_sector_dimension = 20000;
  std::size_t max_total_dimension = 1000000;
};

/// Occupation vectors with |nu| <= N_max, grouped in sectors of fixed
/// particle number (ascending), descending-lexicographic inside a sector.
class OccupationBasis {
 public:
  OccupationBasis(std::size_t modes, std::size_t max_particles, BasisLimits limits = {});

  std::size_t modes() const { return modes_; }
  std::size_t max_particles() const { return max_particles_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t sector_count() const { return sectors_.size(); }
  const SymmetricBasis& sector(std::size_t n) const { return sectors_[n]; }
  std::size_t sector_offset(std::size_t n) const { return offsets_[n]; }

  /// Global index of an occupation vector, if it lies in the basis.
  std::optional<std::size_t> index_of(const Occupation& nu) const;
  const Occupation& state(std::size_t global) const;

 private:
  std::size_t modes_;
  std::size_t max_particles_;
  std::size_t dimension_ = 0;
  std::vector<SymmetricBasis> sectors_;
  std::vector<std::size_t> offsets_;
};

/// C(n, k) in floating point.
double binomial(std::size_t n, std::size_t k);

}  // namespace gibbslab
