#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

#include "gibbslab/occupation.hpp"

namespace gibbslab {

enum class Provenance { quantum, classical, exact_free };

std::string_view to_string(Provenance p);

/// k-particle density matrix on the orthonormal symmetric k-mode basis
/// {e_nu : |nu| = k}. Entry (mu, nu) is <e_mu| gamma |e_nu>.
struct ReducedDM {
  std::size_t k;
  SymmetricBasis basis;
  Eigen::MatrixXcd matrix;
  Provenance provenance;

  ReducedDM(SymmetricBasis b, Eigen::MatrixXcd m, Provenance p);

  std::size_t dimension() const { return basis.dimension(); }
  double trace() const { return matrix.trace().real(); }
  /// max |A - A^dagger|.
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  ReducedDM scaled(double factor) const;
};

/// Components of u^{(x)k} on the symmetric basis: sqrt(k!/nu!) prod_i alpha_i^{nu_i}.
Eigen::VectorXcd symmetric_tensor_power(const Eigen::VectorXcd& alpha, const SymmetricBasis& basis);

/// Position-space kernel of a k = 1 or k = 2 density matrix:
/// gamma(X; Y) = sum_{mu,nu} gamma_{mu nu} e_mu(X) conj(e_nu(Y)), where
/// `modes` holds u_n(x) for the requested points (rows) and modes (columns).
/// For k = 1 the result is points x points; for k = 2 the pair (x1, x2) is
/// flattened as x1 + P * x2. Only the real part of gamma is used; the modes
/// are real, so this is the kernel of Re(gamma).
Eigen::MatrixXd position_kernel(const ReducedDM& dm, const Eigen::MatrixXd& modes);

}  // namespace gibbslab
