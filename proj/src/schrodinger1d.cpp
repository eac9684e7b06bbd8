#include "gibbslab/schrodinger1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace gibbslab {

Grid1D::Grid1D(double half_width, std::size_t points) : half_width_(half_width), points_(points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("Grid1D: half width must be positive and finite");
  }
  if (points < 3) {
    throw std::invalid_argument("Grid1D: at least 3 nodes are required");
  }
  spacing_ = 2.0 * half_width / static_cast<double>(points - 1);
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(points_);
  for (std::size_t i = 0; i < points_; ++i) x[i] = node(i);
  return x;
}

std::size_t Grid1D::nearest_index(double x) const {
  const double r = std::round((x + half_width_) / spacing_);
  if (r <= 0.0) return 0;
  return std::min(points_ - 1, static_cast<std::size_t>(r));
}

PotentialSpec PotentialSpec::power_law(double s, double c) {
  PotentialSpec spec;
  spec.exponent = s;
  spec.strength = c;
  return spec;
}

std::vector<double> PotentialSpec::on_grid(const Grid1D& grid) const {
  if (!(exponent > 1.0)) throw std::invalid_argument("PotentialSpec: exponent s must exceed 1");
  if (!(strength > 0.0)) throw std::invalid_argument("PotentialSpec: strength c must be positive");
  std::vector<double> v(grid.points());
  if (tabulated) {
    if (tabulated->size() != grid.points()) {
      throw std::invalid_argument("PotentialSpec: tabulated potential has " +
                                  std::to_string(tabulated->size()) + " values for " +
                                  std::to_string(grid.points()) + " nodes");
    }
    v = *tabulated;
  } else {
    for (std::size_t i = 0; i < grid.points(); ++i) {
      v[i] = strength * std::pow(std::abs(grid.node(i)), exponent);
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument("PotentialSpec: non-finite potential value at node " +
                                  std::to_string(i));
    }
    if (v[i] < 0.0) {
      throw std::invalid_argument("PotentialSpec: negative potential value at node " +
                                  std::to_string(i));
    }
    if (tabulated) {
      const double floor = std::pow(std::abs(grid.node(i)), exponent) / strength;
      if (v[i] < floor * (1.0 - 1e-12)) {
        throw std::invalid_argument("PotentialSpec: tabulated value below c^{-1}|x|^s at node " +
                                    std::to_string(i));
      }
    }
  }
  return v;
}

double BandedHamiltonian::operator()(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t d = j - i;
  if (d > bandwidth()) return 0.0;
  return bands[d][i];
}

Eigen::MatrixXd BandedHamiltonian::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t d = 0; d < bands.size(); ++d) {
    for (std::size_t i = 0; i + d < size(); ++i) {
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(i + d);
      m(a, b) = bands[d][i];
      m(b, a) = bands[d][i];
    }
  }
  return m;
}

BandedHamiltonian build_hamiltonian(const Grid1D& grid, const PotentialSpec& potential,
                                    Stencil stencil) {
  const std::vector<double> v = potential.on_grid(grid);
  const std::size_t n = grid.points();
  const double inv_dx2 = 1.0 / (grid.spacing() * grid.spacing());

  std::vector<double> coeffs;  // stencil weights for offsets 0, 1, 2, ...
  switch (stencil) {
    case Stencil::second_order:
      coeffs = {2.0 * inv_dx2, -1.0 * inv_dx2};
      break;
    case Stencil::fourth_order:
      coeffs = {30.0 / 12.0 * inv_dx2, -16.0 / 12.0 * inv_dx2, 1.0 / 12.0 * inv_dx2};
      break;
  }

  BandedHamiltonian h{grid, stencil, potential, {}};
  h.bands.resize(coeffs.size());
  for (std::size_t d = 0; d < coeffs.size(); ++d) {
    h.bands[d].assign(n > d ? n - d : 0, coeffs[d]);
  }
  for (std::size_t i = 0; i < n; ++i) h.bands[0][i] += v[i];
  return h;
}

SpectralDecomposition::SpectralDecomposition(Grid1D grid, Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors)
    : grid_(grid), eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  if (eigenvalues_.size() == 0) throw std::invalid_argument("SpectralDecomposition: no modes");
  if (eigenvectors_.cols() != eigenvalues_.size() ||
      eigenvectors_.rows() != static_cast<Eigen::Index>(grid_.points())) {
    throw std::invalid_argument("SpectralDecomposition: shape mismatch");
  }
  if (!(eigenvalues_(0) > 0.0)) {
    throw std::invalid_argument("SpectralDecomposition: lowest eigenvalue must be positive");
  }
  for (Eigen::Index n = 1; n < eigenvalues_.size(); ++n) {
    if (eigenvalues_(n) < eigenvalues_(n - 1)) {
      throw std::invalid_argument("SpectralDecomposition: eigenvalues must be ascending");
    }
  }
}

SpectralDecomposition SpectralDecomposition::truncated(std::size_t K) const {
  if (K == 0 || K > size()) throw std::invalid_argument("SpectralDecomposition: bad truncation");
  const auto k = static_cast<Eigen::Index>(K);
  return SpectralDecomposition(grid_, eigenvalues_.head(k), eigenvectors_.leftCols(k));
}

SpectralDecomposition eigensolve(const BandedHamiltonian& hamiltonian, std::size_t K,
                                 EigensolveOptions options) {
  const std::size_t n = hamiltonian.size();
  if (K == 0 || K > n) {
    throw std::invalid_argument("eigensolve: requested " + std::to_string(K) +
                                " modes on a grid of " + std::to_string(n) + " nodes");
  }
  const lapack_int kd = static_cast<lapack_int>(hamiltonian.bandwidth());
  const lapack_int ldab = kd + 1;
  const lapack_int ln = static_cast<lapack_int>(n);

  // Upper band storage, column-major: AB(kd + i - j, j) = H(i, j).
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d <= hamiltonian.bandwidth() && d <= j; ++d) {
      ab[static_cast<std::size_t>(kd) - d + j * static_cast<std::size_t>(ldab)] =
          hamiltonian.bands[d][j - d];
    }
  }

  std::vector<double> q(n * n);
  std::vector<double> w(n);
  std::vector<double> z(n * K);
  std::vector<lapack_int> ifail(n);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsbevx(
      LAPACK_COL_MAJOR, 'V', 'I', 'U', ln, kd, ab.data(), ldab, q.data(), ln, 0.0, 0.0, 1,
      static_cast<lapack_int>(K), 2.0 * LAPACKE_dlamch('S'), &found, w.data(), z.data(), ln,
      ifail.data());
  if (info != 0 || found != static_cast<lapack_int>(K)) {
    throw std::runtime_error("eigensolve: LAPACK dsbevx failed (info=" + std::to_string(info) +
                             ", found=" + std::to_string(found) + ")");
  }

  const auto& pot = hamiltonian.potential;
  if (options.enforce_resolution_guard) {
    const double ceiling =
        pot.strength * std::pow(hamiltonian.grid.half_width(), pot.exponent) / 4.0;
    if (!(w[K - 1] < ceiling)) {
      throw std::domain_error("eigensolve: lambda_{K-1} = " + std::to_string(w[K - 1]) +
                              " is not resolved (guard c*L^s/4 = " + std::to_string(ceiling) +
                              "); enlarge L or lower K");
    }
  }

  const double norm = 1.0 / std::sqrt(hamiltonian.grid.spacing());
  Eigen::VectorXd values(static_cast<Eigen::Index>(K));
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    values(static_cast<Eigen::Index>(k)) = w[k];
    Eigen::Map<const Eigen::VectorXd> col(z.data() + k * n, static_cast<Eigen::Index>(n));
    auto out = vectors.col(static_cast<Eigen::Index>(k));
    out = col * norm;
    // Sign: first significant lobe positive.
    const double threshold = 1e-6 * out.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (std::abs(out(i)) > threshold) {
        if (out(i) < 0.0) out = -out;
        break;
      }
    }
  }
  return SpectralDecomposition(hamiltonian.grid, std::move(values), std::move(vectors));
}

Eigen::MatrixXd green_function(const SpectralDecomposition& spectrum) {
  const Eigen::MatrixXd& u = spectrum.eigenvectors();
  const Eigen::VectorXd inv = spectrum.eigenvalues().cwiseInverse();
  return u * inv.asDiagonal() * u.transpose();
}

double KernelDiagonal::integral() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * spacing;
}

double KernelDiagonal::lp_norm(double p) const {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p > 0.0)) throw std::invalid_argument("KernelDiagonal::lp_norm: p must be positive");
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v), p);
  return std::pow(sum * spacing, 1.0 / p);
}

KernelDiagonal inverse_kernel_diag(const SpectralDecomposition& spectrum) {
  const Eigen::MatrixXd& u = spectrum.eigenvectors();
  KernelDiagonal diag{spectrum.grid().spacing(), std::vector<double>(spectrum.grid().points(), 0.0)};
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    const double inv = 1.0 / spectrum.eigenvalue(n);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      diag.values[static_cast<std::size_t>(i)] += u(i, static_cast<Eigen::Index>(n)) *
                                                  u(i, static_cast<Eigen::Index>(n)) * inv;
    }
  }
  return diag;
}

SchattenTrace schatten_trace(const SpectralDecomposition& spectrum, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("schatten_trace: p must be nonnegative");
  const std::size_t K = spectrum.size();
  SchattenTrace out;
  for (std::size_t n = 0; n < K; ++n) out.partial_sum += std::pow(spectrum.eigenvalue(n), -p);

  // Least-squares slope of log(lambda_n^{-p}) against log(n + 1/2), the
  // Bohr-Sommerfeld counting variable, over n in [K/10, K).
  const std::size_t first = K >= 20 ? K / 10 : 0;
  if (K - first >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(K - first);
    for (std::size_t n = first; n < K; ++n) {
      const double x = std::log(static_cast<double>(n) + 0.5);
      const double y = -p * std::log(spectrum.eigenvalue(n));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.tail_exponent = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  }
  constexpr double margin = 0.01;
  out.convergent_like = out.tail_exponent < -1.0 - margin;
  return out;
}

double local_trace(const SpectralDecomposition& spectrum, Interval interval) {
  if (interval.upper < interval.lower) return 0.0;
  const Grid1D& grid = spectrum.grid();
  if (interval.lower < -grid.half_width() - 1e-12 || interval.upper > grid.half_width() + 1e-12) {
    throw std::invalid_argument("local_trace: interval exceeds the grid");
  }
  const KernelDiagonal diag = inverse_kernel_diag(spectrum);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double x = grid.node(i);
    if (x >= interval.lower && x <= interval.upper) sum += diag.values[i];
  }
  return sum * grid.spacing();
}

void write_eigenvalues_csv(std::ostream& os, const SpectralDecomposition& spectrum) {
  os.precision(17);
  os << "n,lambda\n";
  for (std::size_t n = 0; n < spectrum.size(); ++n) os << n << ',' << spectrum.eigenvalue(n) << '\n';
}

void write_eigenvectors_csv(std::ostream& os, const SpectralDecomposition& spectrum) {
  os.precision(17);
  os << "x";
  for (std::size_t n = 0; n < spectrum.size(); ++n) os << ",u" << n;
  os << '\n';
  const Eigen::MatrixXd& u = spectrum.eigenvectors();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    os << spectrum.grid().node(static_cast<std::size_t>(i));
    for (Eigen::Index n = 0; n < u.cols(); ++n) os << ',' << u(i, n);
    os << '\n';
  }
}

}  // namespace gibbslab
