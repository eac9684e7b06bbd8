#pragma once

#include <cstddef>

#include "gibbslab/schrodinger1d.hpp"
#include "gibbslab/stats.hpp"

namespace fixtures {

// The reference harmonic problem V = x^2 on [-12, 12] with 1200 nodes.
inline const gibbslab::Grid1D& harmonic_grid() {
  static const gibbslab::Grid1D grid(12.0, 1200);
  return grid;
}

inline gibbslab::SpectralDecomposition harmonic(std::size_t K) {
  static const gibbslab::SpectralDecomposition all =
      gibbslab::eigensolve(gibbslab::build_hamiltonian(harmonic_grid(), gibbslab::PotentialSpec::power_law(2.0)), 12);
  return all.truncated(K);
}

/// Mean of f(s) over s < S with a block jackknife error.
template <class F>
gibbslab::Estimate sample_mean(std::size_t S, F&& f) {
  const std::size_t B = gibbslab::jackknife_block_count(S);
  gibbslab::BlockSums blocks{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), 1),
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B))};
  for (std::size_t s = 0; s < S; ++s) {
    const auto b = static_cast<Eigen::Index>(gibbslab::jackknife_block_of(s, S, B));
    blocks.sums(b, 0) += f(s);
    blocks.counts(b) += 1.0;
  }
  const auto jk = gibbslab::jackknife(blocks, [](const Eigen::VectorXd& m) { return m; });
  return {jk.value(0), jk.se(0)};
}

/// |estimate - expected| in units of its standard error.
inline double pull(const gibbslab::Estimate& e, double expected) { return std::abs(e.value - expected) / e.se; }

}  // namespace fixtures
