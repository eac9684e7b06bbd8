#include "gibbslab/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gibbslab {

std::size_t OccupationHash::operator()(const Occupation& v) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int x : v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

int particle_count(const Occupation& nu) { return std::accumulate(nu.begin(), nu.end(), 0); }

double occupation_factorial(const Occupation& nu) {
  double f = 1.0;
  for (int x : nu) f *= std::tgamma(static_cast<double>(x) + 1.0);
  return f;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

namespace {

void compositions(std::size_t modes, int remaining, Occupation& prefix, std::vector<Occupation>& out) {
  if (prefix.size() + 1 == modes) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = remaining; first >= 0; --first) {
    prefix.push_back(first);
    compositions(modes, remaining - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

SymmetricBasis::SymmetricBasis(std::size_t modes, std::size_t particles)
    : modes_(modes), particles_(particles) {
  if (modes == 0) throw std::invalid_argument("SymmetricBasis: at least one mode is required");
  Occupation prefix;
  prefix.reserve(modes);
  compositions(modes, static_cast<int>(particles), prefix, states_);
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

std::optional<std::size_t> SymmetricBasis::index_of(const Occupation& nu) const {
  const auto it = index_.find(nu);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ProductTerm> product_expansion(const Occupation& nu) {
  std::vector<int> modes;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    for (int c = 0; c < nu[i]; ++c) modes.push_back(static_cast<int>(i));
  }
  const double k_factorial = std::tgamma(static_cast<double>(modes.size()) + 1.0);
  const double coefficient = std::sqrt(occupation_factorial(nu) / k_factorial);
  std::vector<ProductTerm> terms;
  do {
    terms.push_back({modes, coefficient});
  } while (std::next_permutation(modes.begin(), modes.end()));
  return terms;
}

OccupationBasis::OccupationBasis(std::size_t modes, std::size_t max_particles, BasisLimits limits)
    : modes_(modes), max_particles_(max_particles) {
  if (modes == 0) throw std::invalid_argument("OccupationBasis: K must be at least 1");
  const double total = binomial(modes + max_particles, modes);
  const double largest = binomial(modes - 1 + max_particles, modes - 1);
  if (largest > static_cast<double>(limits.max_sector_dimension) ||
      total > static_cast<double>(limits.max_total_dimension)) {
    throw std::length_error("OccupationBasis: K=" + std::to_string(modes) +
                            ", N_max=" + std::to_string(max_particles) + " gives dimension " +
                            std::to_string(static_cast<long long>(total)) +
                            " (largest sector " + std::to_string(static_cast<long long>(largest)) +
                            "), above the dense-solve limit");
  }
  sectors_.reserve(max_particles + 1);
  offsets_.reserve(max_particles + 1);
  for (std::size_t n = 0; n <= max_particles; ++n) {
    offsets_.push_back(dimension_);
    sectors_.emplace_back(modes, n);
    dimension_ += sectors_.back().dimension();
  }
}

std::optional<std::size_t> OccupationBasis::index_of(const Occupation& nu) const {
  if (nu.size() != modes_) return std::nullopt;
  const int n = particle_count(nu);
  if (n < 0 || static_cast<std::size_t>(n) > max_particles_) return std::nullopt;
  const auto local = sectors_[static_cast<std::size_t>(n)].index_of(nu);
  if (!local) return std::nullopt;
  return offsets_[static_cast<std::size_t>(n)] + *local;
}

const Occupation& OccupationBasis::state(std::size_t global) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
  const std::size_t n = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return sectors_[n].state(global - offsets_[n]);
}

}  // namespace gibbslab
