#pragma once

// Two-body repulsion w = a*delta_0 + w2 and its projection on the K lowest
// modes. The same tensor drives the classical functional F_NL and the
// second-quantized interaction, so both sides see an identical Galerkin model.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gibbslab/schrodinger1d.hpp"

namespace gibbslab {

struct InteractionSpec {
  double delta_mass = 1.0;
  /// w2 at grid offsets k*dx, k = 0..M-1 (w2 is even); empty means w2 = 0.
  std::vector<double> smooth;
  /// Declared L^p class of w2 (metadata, checked against p < 1/(2-s)_+).
  double smooth_lp = 1.0;

  static InteractionSpec delta(double a);
  /// w2(x) = amplitude * exp(-x^2 / (2 width^2)) tabulated on the grid offsets.
  static InteractionSpec gaussian(double a, double amplitude, double width, const Grid1D& grid);

  bool is_zero() const;
  InteractionSpec scaled(double factor) const;
  /// Throws std::invalid_argument on a < 0, negative w2 or a size mismatch.
  void validate(const Grid1D& grid) const;
  /// Soft checks (the L^p condition), returned as messages.
  std::vector<std::string> warnings(double exponent_s) const;
  /// ||w2||_{L^p} on the grid (offsets mirrored to negative x).
  double smooth_norm(const Grid1D& grid, double p) const;
};

/// W_{mnpq} = a sum_i u_m u_n u_p u_q dx
///          + sum_{i,j} u_m(x_i) u_p(x_i) w2(x_i - x_j) u_n(x_j) u_q(x_j) dx^2.
class InteractionTensor {
 public:
  InteractionTensor(std::size_t modes, std::vector<double> values);

  std::size_t modes() const { return modes_; }
  double operator()(std::size_t m, std::size_t n, std::size_t p, std::size_t q) const {
    return values_[((m * modes_ + n) * modes_ + p) * modes_ + q];
  }
  bool is_zero() const;
  /// Largest violation of the exchange symmetries of a two-body kernel.
  double symmetry_defect() const;
  InteractionTensor truncated(std::size_t K) const;

 private:
  std::size_t modes_;
  std::vector<double> values_;
};

InteractionTensor interaction_tensor(const SpectralDecomposition& spectrum,
                                     const InteractionSpec& interaction);

/// F_NL[u] = (a/2) sum_i |u_i|^4 dx + (1/2) sum_{i,j} |u_i|^2 w2(x_i - x_j) |u_j|^2 dx^2.
double f_nl(const Eigen::VectorXcd& grid_function, const Grid1D& grid,
            const InteractionSpec& interaction);

/// Same functional evaluated through the mode tensor:
/// (1/2) sum W_{mnpq} conj(alpha_m) conj(alpha_n) alpha_p alpha_q.
double f_nl_modes(const Eigen::VectorXcd& alpha, const InteractionTensor& tensor);

/// Tr[w h^{-1} (x) h^{-1}] on the K-mode model: sum_{m,n} W_{mnmn} / (lambda_m lambda_n).
double interaction_free_trace(const InteractionTensor& tensor, const Eigen::VectorXd& eigenvalues);

}  // namespace gibbslab
