#include "gibbslab/trotter_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gibbslab/parallel.hpp"

namespace gibbslab {

void TrotterConfig::validate() const {
  if (!(time > 0.0)) throw std::invalid_argument("trotter: t must be positive");
  if (steps < 1) throw std::invalid_argument("trotter: at least one step is required");
  if (particles < 1 || particles > 2) {
    throw std::invalid_argument("trotter: only n = 1 or n = 2 particles are supported, got " +
                                std::to_string(particles));
  }
}

std::size_t TrotterConfig::nodes() const {
  return particles == 1 ? grid.points() : grid.points() * grid.points();
}

double KernelMatrix::weight() const { return std::pow(grid.spacing(), static_cast<double>(particles)); }

Eigen::MatrixXd free_propagator(const Grid1D& grid, double tau) {
  const auto M = static_cast<Eigen::Index>(grid.points());
  const double dx = grid.spacing();
  const double h = std::numbers::pi / static_cast<double>(M + 1);
  Eigen::MatrixXd S(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index k = 0; k < M; ++k) {
      S(i, k) = std::sqrt(2.0 / static_cast<double>(M + 1)) * std::sin(h * static_cast<double>((k + 1) * (i + 1)));
    }
  Eigen::VectorXd decay(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    const double s = std::sin(0.5 * h * static_cast<double>(k + 1));
    decay(k) = std::exp(-tau * 4.0 * s * s / (dx * dx));
  }
  return S * decay.asDiagonal() * S.transpose();
}

Eigen::VectorXd one_body_potential(const Grid1D& grid, const PotentialSpec& potential) {
  const std::vector<double> v = potential.on_grid(grid);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd two_body_potential(const Grid1D& grid, const PotentialSpec& potential, double delta_mass) {
  if (!(delta_mass >= 0.0)) throw std::invalid_argument("two_body_potential: delta mass must be nonnegative");
  const Eigen::VectorXd v = one_body_potential(grid, potential);
  const auto M = v.size();
  Eigen::VectorXd out(M * M);
  for (Eigen::Index j = 0; j < M; ++j)
    for (Eigen::Index i = 0; i < M; ++i) {
      out(i + M * j) = v(i) + v(j) + (i == j ? delta_mass / grid.spacing() : 0.0);
    }
  return out;
}

namespace {

// Coordinate maps that leave the potential unchanged: exchange of the two
// particles and the reflection x -> -x. Identity is always included.
struct Symmetries {
  bool exchange = false;
  bool reflection = false;
};

Eigen::Index apply(Eigen::Index node, Eigen::Index M, std::size_t particles, bool swap, bool reflect) {
  if (particles == 1) return reflect ? M - 1 - node : node;
  Eigen::Index x1 = node % M, x2 = node / M;
  if (swap) std::swap(x1, x2);
  if (reflect) {
    x1 = M - 1 - x1;
    x2 = M - 1 - x2;
  }
  return x1 + M * x2;
}

Symmetries detect_symmetries(const Eigen::VectorXd& w, Eigen::Index M, std::size_t particles) {
  Symmetries s;
  const auto invariant = [&](bool swap, bool reflect) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w(i) != w(apply(i, M, particles, swap, reflect))) return false;
    }
    return true;
  };
  s.exchange = particles == 2 && invariant(true, false);
  s.reflection = invariant(false, true);
  return s;
}

// Images of a node under the detected symmetry group (with repetitions).
std::vector<Eigen::Index> orbit(Eigen::Index node, Eigen::Index M, std::size_t particles, const Symmetries& s) {
  std::vector<Eigen::Index> out{node};
  if (s.exchange) out.push_back(apply(node, M, particles, true, false));
  if (s.reflection) out.push_back(apply(node, M, particles, false, true));
  if (s.exchange && s.reflection) out.push_back(apply(node, M, particles, true, true));
  return out;
}

// Columns [first, first + count) of (E exp(-tau W))^m applied to unit vectors.
Eigen::MatrixXd evolve_columns(const Eigen::MatrixXd& E, const Eigen::VectorXd& damping, std::size_t particles,
                               const std::vector<Eigen::Index>& columns, int steps) {
  const Eigen::Index M = E.rows();
  const Eigen::Index N = damping.size();
  const auto c = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(N, c);
  for (Eigen::Index j = 0; j < c; ++j) block(columns[static_cast<std::size_t>(j)], j) = 1.0;
  Eigen::MatrixXd tmp(N, c);
  for (int step = 0; step < steps; ++step) {
    block = damping.asDiagonal() * block;
    if (particles == 1) {
      tmp.noalias() = E * block;
      block.swap(tmp);
      continue;
    }
    // (E (x) E) on each column viewed as an M x M array with x1 as row index.
    Eigen::Map<Eigen::MatrixXd> wide(block.data(), M, M * c);
    Eigen::Map<Eigen::MatrixXd> wide_tmp(tmp.data(), M, M * c);
    wide_tmp.noalias() = E * wide;
    for (Eigen::Index j = 0; j < c; ++j) {
      Eigen::Map<Eigen::MatrixXd> in(tmp.data() + j * N, M, M);
      Eigen::Map<Eigen::MatrixXd> out(block.data() + j * N, M, M);
      out.noalias() = in * E.transpose();
    }
  }
  return block;
}

}  // namespace

KernelMatrix heat_kernel(const TrotterConfig& config, const Eigen::VectorXd& potential, std::size_t workers) {
  config.validate();
  const auto N = static_cast<Eigen::Index>(config.nodes());
  if (potential.size() != N) {
    throw std::invalid_argument("heat_kernel: potential has " + std::to_string(potential.size()) +
                                " values, expected " + std::to_string(N));
  }
  if (!potential.allFinite() || potential.minCoeff() < 0.0) {
    throw std::invalid_argument("heat_kernel: potential must be finite and nonnegative");
  }
  const double tau = config.time / config.steps;
  const Eigen::MatrixXd E = free_propagator(config.grid, tau);
  const Eigen::VectorXd damping = (-tau * potential).array().exp();
  const auto M = static_cast<Eigen::Index>(config.grid.points());

  // The free factor commutes with exchange and reflection, so whenever the
  // potential does too, P e_{gY} = g P e_Y and only one column per orbit is
  // evolved.
  const Symmetries sym = detect_symmetries(potential, M, config.particles);
  std::vector<Eigen::Index> wanted;
  for (Eigen::Index y = 0; y < N; ++y) {
    const auto images = orbit(y, M, config.particles, sym);
    if (*std::min_element(images.begin(), images.end()) == y) wanted.push_back(y);
  }

  Eigen::MatrixXd P(N, N);
  constexpr std::size_t kColumnsPerTask = 64;
  const std::size_t tasks = (wanted.size() + kColumnsPerTask - 1) / kColumnsPerTask;
  parallel_for(tasks, workers, [&](std::size_t t) {
    const std::size_t begin = t * kColumnsPerTask;
    const std::size_t end = std::min(wanted.size(), begin + kColumnsPerTask);
    const std::vector<Eigen::Index> cols(wanted.begin() + static_cast<std::ptrdiff_t>(begin),
                                         wanted.begin() + static_cast<std::ptrdiff_t>(end));
    const Eigen::MatrixXd block = evolve_columns(E, damping, config.particles, cols, config.steps);
    for (std::size_t j = 0; j < cols.size(); ++j) P.col(cols[j]) = block.col(static_cast<Eigen::Index>(j));
  });
  const bool swaps[] = {false, true, false, true};
  const bool reflects[] = {false, false, true, true};
  for (const Eigen::Index y : wanted) {
    for (int g = 1; g < 4; ++g) {
      if ((swaps[g] && !sym.exchange) || (reflects[g] && !sym.reflection)) continue;
      const Eigen::Index image = apply(y, M, config.particles, swaps[g], reflects[g]);
      if (image == y) continue;
      for (Eigen::Index x = 0; x < N; ++x) P(x, image) = P(apply(x, M, config.particles, swaps[g], reflects[g]), y);
    }
  }
  const double weight = std::pow(config.grid.spacing(), static_cast<double>(config.particles));
  return KernelMatrix{config.particles, config.grid, P / weight};
}

Eigen::VectorXd spectral_heat_diagonal(const SpectralDecomposition& spectrum, double time) {
  const Eigen::VectorXd decay = (-time * spectrum.eigenvalues()).array().exp();
  return spectrum.eigenvectors().array().square().matrix() * decay;
}

KernelMatrix symmetrized(const KernelMatrix& kernel) {
  if (kernel.particles != 2) throw std::invalid_argument("symmetrized: defined for two particles");
  const auto M = static_cast<Eigen::Index>(kernel.grid.points());
  KernelMatrix out = kernel;
  for (Eigen::Index x2 = 0; x2 < M; ++x2)
    for (Eigen::Index x1 = 0; x1 < M; ++x1) {
      out.values.row(x1 + M * x2) = 0.5 * (kernel.values.row(x1 + M * x2) + kernel.values.row(x2 + M * x1));
    }
  return out;
}

DominationReport compare_kernels(const KernelMatrix& strong, const KernelMatrix& weak) {
  if (strong.values.rows() != weak.values.rows() || strong.values.cols() != weak.values.cols()) {
    throw std::invalid_argument("compare_kernels: kernels of different sizes");
  }
  DominationReport r;
  r.max_violation = (strong.values - weak.values).maxCoeff();
  r.positivity_floor = std::min(strong.min_entry(), weak.min_entry());
  if (strong.particles == 2) {
    r.symmetrized_violation = (symmetrized(strong).values - symmetrized(weak).values).maxCoeff();
  } else {
    r.symmetrized_violation = r.max_violation;
  }
  r.passed = r.max_violation <= kKernelTolerance && r.symmetrized_violation <= kKernelTolerance &&
             r.positivity_floor >= -kKernelTolerance;
  return r;
}

DominationReport domination_check(const TrotterConfig& config, const Eigen::VectorXd& strong,
                                  const Eigen::VectorXd& weak, std::size_t workers) {
  if (strong.size() != weak.size()) throw std::invalid_argument("domination_check: potential sizes differ");
  if (weak.minCoeff() < 0.0) throw std::invalid_argument("domination_check: potentials must be nonnegative");
  for (Eigen::Index i = 0; i < strong.size(); ++i) {
    if (strong(i) < weak(i)) {
      throw std::invalid_argument("domination_check: W1 >= W2 fails at node " + std::to_string(i));
    }
  }
  return compare_kernels(heat_kernel(config, strong, workers), heat_kernel(config, weak, workers));
}

void write_kernel_slice_csv(std::ostream& os, const KernelMatrix& kernel, std::size_t column) {
  os.precision(17);
  const Grid1D& g = kernel.grid;
  const auto M = static_cast<Eigen::Index>(g.points());
  if (column >= static_cast<std::size_t>(kernel.values.cols())) {
    throw std::out_of_range("write_kernel_slice_csv: column out of range");
  }
  if (kernel.particles == 1) {
    os << "x,y,value\n";
    for (Eigen::Index i = 0; i < M; ++i)
      for (Eigen::Index j = 0; j < M; ++j) {
        os << g.node(static_cast<std::size_t>(i)) << ',' << g.node(static_cast<std::size_t>(j)) << ','
           << kernel.values(i, j) << '\n';
      }
    return;
  }
  os << "x1,x2,value\n";
  for (Eigen::Index x2 = 0; x2 < M; ++x2)
    for (Eigen::Index x1 = 0; x1 < M; ++x1) {
      os << g.node(static_cast<std::size_t>(x1)) << ',' << g.node(static_cast<std::size_t>(x2)) << ','
         << kernel.values(x1 + M * x2, static_cast<Eigen::Index>(column)) << '\n';
    }
}

}  // namespace gibbslab
