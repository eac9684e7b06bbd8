#include "gibbslab/reduced_dm.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbslab {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::quantum:
      return "quantum";
    case Provenance::classical:
      return "classical";
    case Provenance::exact_free:
      return "exact-free";
  }
  return "unknown";
}

ReducedDM::ReducedDM(SymmetricBasis b, Eigen::MatrixXcd m, Provenance p)
    : k(b.particles()), basis(std::move(b)), matrix(std::move(m)), provenance(p) {
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  if (matrix.rows() != d || matrix.cols() != d) {
    throw std::invalid_argument("ReducedDM: matrix does not match the symmetric basis");
  }
}

double ReducedDM::hermiticity_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

double ReducedDM::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

ReducedDM ReducedDM::scaled(double factor) const {
  return ReducedDM(basis, matrix * factor, provenance);
}

Eigen::VectorXcd symmetric_tensor_power(const Eigen::VectorXcd& alpha, const SymmetricBasis& basis) {
  if (static_cast<std::size_t>(alpha.size()) != basis.modes()) {
    throw std::invalid_argument("symmetric_tensor_power: coefficient length mismatch");
  }
  const double k_factorial = std::tgamma(static_cast<double>(basis.particles()) + 1.0);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Occupation& nu = basis.state(i);
    std::complex<double> c = std::sqrt(k_factorial / occupation_factorial(nu));
    for (std::size_t m = 0; m < nu.size(); ++m) {
      for (int p = 0; p < nu[m]; ++p) c *= alpha(static_cast<Eigen::Index>(m));
    }
    out(static_cast<Eigen::Index>(i)) = c;
  }
  return out;
}

Eigen::MatrixXd position_kernel(const ReducedDM& dm, const Eigen::MatrixXd& modes) {
  if (static_cast<std::size_t>(modes.cols()) != dm.basis.modes()) {
    throw std::invalid_argument("position_kernel: mode table does not match the basis");
  }
  const Eigen::Index points = modes.rows();
  const Eigen::Index d = static_cast<Eigen::Index>(dm.dimension());
  const Eigen::MatrixXd real = dm.matrix.real();
  if (dm.k == 1) {
    return modes * real * modes.transpose();
  }
  if (dm.k != 2) throw std::invalid_argument("position_kernel: only k = 1, 2 are supported");

  // Symmetric pair functions e_nu(x1, x2) on the flattened point grid.
  Eigen::MatrixXd pair(points * points, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto terms = product_expansion(dm.basis.state(static_cast<std::size_t>(a)));
    for (Eigen::Index x2 = 0; x2 < points; ++x2) {
      for (Eigen::Index x1 = 0; x1 < points; ++x1) {
        double v = 0.0;
        for (const auto& t : terms) v += t.coefficient * modes(x1, t.modes[0]) * modes(x2, t.modes[1]);
        pair(x1 + points * x2, a) = v;
      }
    }
  }
  return pair * real * pair.transpose();
}

}  // namespace gibbslab
