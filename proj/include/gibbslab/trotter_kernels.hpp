#pragma once

// Real-space kernels of exp(-t(-Laplacian + W)) for one and two particles on
// a Dirichlet grid, by the Lie-Trotter product (exp(t D/m) exp(-t W/m))^m with
// the exact semigroup of the discrete Laplacian D.

#include <cstddef>
#include <iosfwd>

#include <Eigen/Dense>

#include "gibbslab/schrodinger1d.hpp"

namespace gibbslab {

struct TrotterConfig {
  double time = 0.5;
  int steps = 256;
  Grid1D grid{6.0, 64};   // per-coordinate grid
  std::size_t particles = 2;

  void validate() const;
  std::size_t nodes() const;  // M^n
};

/// kernel(X; Y) with X, Y flattened as x1 + M x2; values are the operator
/// matrix divided by dx^n, so that sum_Y kernel(X; Y) f(Y) dx^n applies it.
struct KernelMatrix {
  std::size_t particles;
  Grid1D grid;
  Eigen::MatrixXd values;

  double weight() const;  // dx^n
  double min_entry() const { return values.minCoeff(); }
};

/// exp(tau D) for the second-order Dirichlet Laplacian, from its sine eigenbasis.
Eigen::MatrixXd free_propagator(const Grid1D& grid, double tau);

/// V(x_i) for n = 1, V(x_i) + V(x_j) + (a/dx) 1{i = j} for n = 2 (flattened i + M j).
Eigen::VectorXd one_body_potential(const Grid1D& grid, const PotentialSpec& potential);
Eigen::VectorXd two_body_potential(const Grid1D& grid, const PotentialSpec& potential, double delta_mass);

KernelMatrix heat_kernel(const TrotterConfig& config, const Eigen::VectorXd& potential, std::size_t workers = 1);

/// sum_k exp(-t lambda_k) u_k(x)^2 from a full eigendecomposition.
Eigen::VectorXd spectral_heat_diagonal(const SpectralDecomposition& spectrum, double time);

/// Average over exchanging the two coordinates of X (n = 2 only).
KernelMatrix symmetrized(const KernelMatrix& kernel);

inline constexpr double kKernelTolerance = 1e-10;

struct DominationReport {
  double max_violation = 0.0;        // max (K_strong - K_weak)
  double positivity_floor = 0.0;     // min entry of both kernels
  double symmetrized_violation = 0.0;
  bool passed = false;
};

/// Kernels for W_strong >= W_weak >= 0 (checked pointwise first; throws
/// std::invalid_argument otherwise) and their entrywise comparison.
DominationReport domination_check(const TrotterConfig& config, const Eigen::VectorXd& strong,
                                  const Eigen::VectorXd& weak, std::size_t workers = 1);
DominationReport compare_kernels(const KernelMatrix& strong, const KernelMatrix& weak);

/// n = 1: x,y,value for every pair; n = 2: x1,x2,value at the fixed column Y.
void write_kernel_slice_csv(std::ostream& os, const KernelMatrix& kernel, std::size_t column);

}  // namespace gibbslab
