#pragma once

// One-body operator h = -d^2/dx^2 + V(x) on a uniform Dirichlet grid.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gibbslab {

/// Uniform grid on [-L, L] with M nodes, x_i = -L + i*dx, dx = 2L/(M-1).
class Grid1D {
 public:
  Grid1D(double half_width, std::size_t points);

  double half_width() const { return half_width_; }
  std::size_t points() const { return points_; }
  double spacing() const { return spacing_; }
  /// Measured from the nearer end, so node(M-1-i) == -node(i) exactly.
  double node(std::size_t i) const {
    const std::size_t mirror = points_ - 1 - i;
    return i <= mirror ? -half_width_ + static_cast<double>(i) * spacing_
                       : half_width_ - static_cast<double>(mirror) * spacing_;
  }
  std::vector<double> nodes() const;

  /// Index of the node closest to x (clamped to the grid).
  std::size_t nearest_index(double x) const;

  bool operator==(const Grid1D& other) const = default;

 private:
  double half_width_;
  std::size_t points_;
  double spacing_;
};

/// V(x) = c |x|^s, or a tabulated override that must dominate c^{-1}|x|^s.
struct PotentialSpec {
  double exponent = 2.0;
  double strength = 1.0;
  std::optional<std::vector<double>> tabulated;

  static PotentialSpec power_law(double s, double c = 1.0);

  /// Potential values at the grid nodes. Throws std::invalid_argument on
  /// non-finite or negative values, or a tabulated size mismatch.
  std::vector<double> on_grid(const Grid1D& grid) const;
};

enum class Stencil {
  second_order,  // (-u[i-1] + 2u[i] - u[i+1]) / dx^2
  fourth_order,  // (u[i-2] - 16u[i-1] + 30u[i] - 16u[i+1] + u[i+2]) / (12 dx^2)
};

/// Symmetric band matrix: bands[d][i] = H(i, i+d).
struct BandedHamiltonian {
  Grid1D grid;
  Stencil stencil;
  PotentialSpec potential;
  std::vector<std::vector<double>> bands;

  std::size_t size() const { return grid.points(); }
  std::size_t bandwidth() const { return bands.size() - 1; }
  double operator()(std::size_t i, std::size_t j) const;
  Eigen::MatrixXd dense() const;
};

BandedHamiltonian build_hamiltonian(const Grid1D& grid, const PotentialSpec& potential,
                                    Stencil stencil = Stencil::fourth_order);

struct EigensolveOptions {
  // Reject spectra whose top eigenvalue reaches c*L^s/4, where the classically
  // allowed region touches the walls.
  bool enforce_resolution_guard = true;
};

/// K lowest eigenpairs with grid-normalized eigenvectors (sum u^2 dx = 1).
/// Immutable after construction.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Grid1D grid, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double eigenvalue(std::size_t n) const { return eigenvalues_(static_cast<Eigen::Index>(n)); }
  /// Columns are the eigenfunctions sampled at the grid nodes.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  auto mode(std::size_t n) const { return eigenvectors_.col(static_cast<Eigen::Index>(n)); }

  /// The K lowest modes of this decomposition.
  SpectralDecomposition truncated(std::size_t K) const;

 private:
  Grid1D grid_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

SpectralDecomposition eigensolve(const BandedHamiltonian& hamiltonian, std::size_t K,
                                 EigensolveOptions options = {});

/// Grid kernel h^{-1}(x_i; x_j) = sum_{n<K} u_n(x_i) u_n(x_j) / lambda_n.
Eigen::MatrixXd green_function(const SpectralDecomposition& spectrum);

struct KernelDiagonal {
  double spacing;
  std::vector<double> values;

  double integral() const;
  /// (sum_i |v_i|^p dx)^{1/p}; p = infinity gives the max.
  double lp_norm(double p) const;
};

KernelDiagonal inverse_kernel_diag(const SpectralDecomposition& spectrum);

struct SchattenTrace {
  double partial_sum = 0.0;
  double tail_exponent = 0.0;  // log-log slope of lambda_n^{-p} over the last decade of modes
  bool convergent_like = false;
};

SchattenTrace schatten_trace(const SpectralDecomposition& spectrum, double p);

struct Interval {
  double lower;
  double upper;
};

/// Tr[chi h^{-1} chi] for chi the indicator of the interval.
double local_trace(const SpectralDecomposition& spectrum, Interval interval);

void write_eigenvalues_csv(std::ostream& os, const SpectralDecomposition& spectrum);
void write_eigenvectors_csv(std::ostream& os, const SpectralDecomposition& spectrum);

}  // namespace gibbslab
