#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "gibbslab/trotter_kernels.hpp"

using namespace gibbslab;

namespace {

// exp(tau D) for the tridiagonal Dirichlet Laplacian by dense diagonalization.
Eigen::MatrixXd dense_free(const Grid1D& grid, double tau) {
  const auto M = static_cast<Eigen::Index>(grid.points());
  const double inv = 1.0 / (grid.spacing() * grid.spacing());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    D(i, i) = -2.0 * inv;
    if (i + 1 < M) D(i, i + 1) = D(i + 1, i) = inv;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  return es.eigenvectors() * (tau * es.eigenvalues()).array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

// The full Trotter product as a dense matrix, with no symmetry shortcuts.
Eigen::MatrixXd dense_trotter(const TrotterConfig& config, const Eigen::VectorXd& w) {
  const double tau = config.time / config.steps;
  Eigen::MatrixXd E = dense_free(config.grid, tau);
  if (config.particles == 2) {
    const Eigen::Index M = E.rows();
    Eigen::MatrixXd pair(M * M, M * M);
    for (Eigen::Index a = 0; a < M; ++a)
      for (Eigen::Index b = 0; b < M; ++b) pair.block(a * M, b * M, M, M) = E(a, b) * E;
    E = pair;
  }
  const Eigen::MatrixXd step = E * (-tau * w).array().exp().matrix().asDiagonal();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(E.rows(), E.cols());
  for (int s = 0; s < config.steps; ++s) P = step * P;
  return P;
}

TrotterConfig small(std::size_t particles, std::size_t points = 8, int steps = 16) {
  TrotterConfig c;
  c.time = 0.3;
  c.steps = steps;
  c.grid = Grid1D(2.0, points);
  c.particles = particles;
  return c;
}

Eigen::VectorXd random_potential(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Eigen::VectorXd w(n);
  for (auto& x : w) x = u(rng);
  return w;
}

}  // namespace

TEST_CASE("free propagator matches dense exponential and composes") {
  const Grid1D grid(2.0, 12);
  const Eigen::MatrixXd E = free_propagator(grid, 0.05);
  CHECK((E - dense_free(grid, 0.05)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((E - E.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((E * free_propagator(grid, 0.07) - free_propagator(grid, 0.12)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("zero potential gives the free kernel") {
  const TrotterConfig c = small(1, 24, 7);
  const KernelMatrix k = heat_kernel(c, Eigen::VectorXd::Zero(24));
  const Eigen::MatrixXd P = k.values * k.weight();
  CHECK((P - free_propagator(c.grid, c.time)).cwiseAbs().maxCoeff() < 1e-13);
  const Eigen::VectorXd rows = P.rowwise().sum();
  CHECK(rows.maxCoeff() <= 1.0 + 1e-13);
  CHECK(rows(12) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rows(0) < rows(12));
  CHECK(k.min_entry() > 0.0);
}

TEST_CASE("kernels agree with the dense product") {
  for (const std::size_t n : {1u, 2u}) {
    const TrotterConfig c = small(n);
    const auto N = static_cast<Eigen::Index>(c.nodes());
    const Eigen::Index M = 8;

    // An asymmetric potential takes the plain path.
    const Eigen::VectorXd rough = random_potential(N, 5 + static_cast<unsigned>(n));
    const KernelMatrix a = heat_kernel(c, rough);
    CHECK((a.values * a.weight() - dense_trotter(c, rough)).cwiseAbs().maxCoeff() < 1e-13);

    // Mirror and exchange invariant potentials take the orbit shortcut.
    Eigen::VectorXd even(N);
    for (Eigen::Index x = 0; x < N; ++x) {
      const Eigen::Index x1 = x % M, x2 = x / M;
      const Eigen::Index mirror = n == 1 ? M - 1 - x : (M - 1 - x1) + M * (M - 1 - x2);
      const Eigen::Index swapped = n == 1 ? x : x2 + M * x1;
      const Eigen::Index both = n == 1 ? mirror : (M - 1 - x2) + M * (M - 1 - x1);
      even(x) = rough(x) + rough(mirror) + rough(swapped) + rough(both);
    }
    const KernelMatrix b = heat_kernel(c, even);
    CHECK((b.values * b.weight() - dense_trotter(c, even)).cwiseAbs().maxCoeff() < 1e-13);

    if (n == 2) {
      // Exchange only.
      Eigen::VectorXd swap_only(N);
      for (Eigen::Index x = 0; x < N; ++x) swap_only(x) = rough(x) + rough((x / M) + M * (x % M));
      const KernelMatrix s = heat_kernel(c, swap_only);
      CHECK((s.values * s.weight() - dense_trotter(c, swap_only)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("kernel does not depend on worker count") {
  TrotterConfig c = small(2, 12, 8);
  const Eigen::VectorXd w = two_body_potential(c.grid, PotentialSpec::power_law(2.0), 1.0);
  CHECK(heat_kernel(c, w, 1).values == heat_kernel(c, w, 3).values);
}

TEST_CASE("semigroup identity") {
  const TrotterConfig c = small(2, 10, 6);
  TrotterConfig doubled = c;
  doubled.time *= 2.0;
  doubled.steps *= 2;
  const Eigen::VectorXd w = two_body_potential(c.grid, PotentialSpec::power_law(2.0), 0.5);
  const Eigen::MatrixXd P = heat_kernel(c, w).values * std::pow(c.grid.spacing(), 2);
  const Eigen::MatrixXd P2 = heat_kernel(doubled, w).values * std::pow(c.grid.spacing(), 2);
  CHECK((P * P - P2).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("splitting error shrinks like 1/m") {
  TrotterConfig c = small(1, 24, 8);
  c.time = 0.5;
  const Eigen::VectorXd w = one_body_potential(c.grid, PotentialSpec::power_law(2.0));
  TrotterConfig fine = c;
  fine.steps = 4096;
  const Eigen::MatrixXd reference = heat_kernel(fine, w).values;
  const auto error = [&](int steps) {
    TrotterConfig t = c;
    t.steps = steps;
    return (heat_kernel(t, w).values - reference).cwiseAbs().maxCoeff();
  };
  const double e8 = error(8), e16 = error(16), e32 = error(32);
  CHECK(e8 / e16 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(e16 / e32 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("spectral route for one particle") {
  TrotterConfig c;
  c.particles = 1;
  const PotentialSpec v = PotentialSpec::power_law(2.0);
  const KernelMatrix k = heat_kernel(c, one_body_potential(c.grid, v));
  EigensolveOptions full;
  full.enforce_resolution_guard = false;
  const SpectralDecomposition spec =
      eigensolve(build_hamiltonian(c.grid, v, Stencil::second_order), c.grid.points(), full);
  CHECK((k.values.diagonal() - spectral_heat_diagonal(spec, c.time)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("domination on small grids") {
  const TrotterConfig c = small(2, 12, 16);
  const PotentialSpec v = PotentialSpec::power_law(2.0);
  const Eigen::VectorXd bare = two_body_potential(c.grid, v, 0.0);

  const DominationReport same = domination_check(c, bare, bare);
  CHECK(same.max_violation == 0.0);
  CHECK(same.passed);

  const DominationReport contact = domination_check(c, two_body_potential(c.grid, v, 1.0), bare);
  CHECK(contact.passed);
  CHECK(contact.max_violation < 0.0);
  CHECK(contact.symmetrized_violation <= contact.max_violation + 1e-15);
  CHECK(contact.positivity_floor > 0.0);

  // Larger contact masses give entrywise smaller kernels.
  Eigen::MatrixXd previous = heat_kernel(c, bare).values;
  for (const double a : {0.5, 1.0, 2.0, 4.0}) {
    const Eigen::MatrixXd next = heat_kernel(c, two_body_potential(c.grid, v, a)).values;
    CHECK((next - previous).maxCoeff() <= 0.0);
    previous = next;
  }
}

TEST_CASE("symmetrization averages over exchange") {
  const TrotterConfig c = small(2, 6, 4);
  const KernelMatrix k = heat_kernel(c, random_potential(36, 9));
  const KernelMatrix s = symmetrized(k);
  CHECK(s.values.row(1 + 6 * 4).isApprox(0.5 * (k.values.row(1 + 6 * 4) + k.values.row(4 + 6 * 1))));
  CHECK(s.values.row(2 + 6 * 2) == k.values.row(2 + 6 * 2));
}

TEST_CASE("trotter input errors") {
  TrotterConfig c = small(1);
  c.time = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small(1);
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small(3);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = small(1);
  CHECK_THROWS_AS(heat_kernel(c, Eigen::VectorXd::Zero(7)), std::invalid_argument);
  CHECK_THROWS_AS(heat_kernel(c, -Eigen::VectorXd::Ones(8)), std::invalid_argument);
  CHECK_THROWS_AS(symmetrized(heat_kernel(c, Eigen::VectorXd::Zero(8))), std::invalid_argument);
  CHECK_THROWS_AS(domination_check(c, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Ones(8)), std::invalid_argument);
  CHECK_THROWS_AS(two_body_potential(c.grid, PotentialSpec::power_law(2.0), -1.0), std::invalid_argument);
  std::ostringstream os;
  CHECK_THROWS_AS(write_kernel_slice_csv(os, heat_kernel(c, Eigen::VectorXd::Zero(8)), 8), std::out_of_range);
}

TEST_CASE("kernel slice csv") {
  std::ostringstream os;
  write_kernel_slice_csv(os, heat_kernel(small(1), Eigen::VectorXd::Zero(8)), 3);
  const std::string one = os.str();
  CHECK(one.rfind("x,y,value\n", 0) == 0);
  CHECK(std::count(one.begin(), one.end(), '\n') == 65);
  os.str("");
  write_kernel_slice_csv(os, heat_kernel(small(2), Eigen::VectorXd::Zero(64)), 9);
  const std::string text = os.str();
  CHECK(text.rfind("x1,x2,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 65);
}
