#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fixtures.hpp"
#include "gibbslab/gaussian_field.hpp"
#include "gibbslab/schrodinger1d.hpp"

using namespace gibbslab;

namespace {

constexpr std::size_t kSamples = 100000;

const FieldEnsemble& ensemble6() {
  static const FieldEnsemble ens = sample_ensemble(fixtures::harmonic(6), 6, kSamples, 2025);
  return ens;
}

ModeCoefficients coefficients(const FieldEnsemble& ens, std::size_t s) { return {ens.sample(s)}; }

}  // namespace

TEST_CASE("sampling is reproducible and independent of workers") {
  const SpectralDecomposition spec = fixtures::harmonic(4);
  const FieldEnsemble a = sample_ensemble(spec, 4, 9000, 7, 1);
  const FieldEnsemble b = sample_ensemble(spec, 4, 9000, 7, 3);
  const FieldEnsemble c = sample_ensemble(spec, 4, 9000, 8, 1);
  CHECK(a.coefficients() == b.coefficients());
  CHECK(a.coefficients() != c.coefficients());
  CHECK(a.seed() == 7);

  Rng r1(99), r2(99);
  CHECK(sample_mu0(spec, 4, r1).alpha == sample_mu0(spec, 4, r2).alpha);
  CHECK_THROWS_AS(sample_mu0(spec, 5, r1), std::invalid_argument);
  CHECK_THROWS_AS(sample_ensemble(spec, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("mode variances and means") {
  const FieldEnsemble& ens = ensemble6();
  for (Eigen::Index j = 0; j < 6; ++j) {
    const double lambda = ens.eigenvalues()(j);
    CHECK(fixtures::pull(fixtures::sample_mean(kSamples, [&](std::size_t s) { return std::norm(ens.coefficients()(s, j)); }),
                         1.0 / lambda) <= 3.0);
    CHECK(fixtures::pull(fixtures::sample_mean(kSamples, [&](std::size_t s) { return ens.coefficients()(s, j).real(); }), 0.0) <=
          3.0);
    CHECK(fixtures::pull(fixtures::sample_mean(kSamples, [&](std::size_t s) { return ens.coefficients()(s, j).imag(); }), 0.0) <=
          3.0);
  }
}

TEST_CASE("standardized errors are calibrated across seeds") {
  const SpectralDecomposition spec = fixtures::harmonic(3);
  constexpr std::size_t S = 5000;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const FieldEnsemble ens = sample_ensemble(spec, 3, S, seed);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double lambda = ens.eigenvalues()(j);
      const Estimate var = fixtures::sample_mean(S, [&](std::size_t s) { return std::norm(ens.coefficients()(s, j)); });
      const Estimate re = fixtures::sample_mean(S, [&](std::size_t s) { return ens.coefficients()(s, j).real(); });
      sum_sq += std::pow((var.value - 1.0 / lambda) / var.se, 2) + std::pow(re.value / re.se, 2);
      count += 2;
    }
  }
  // 240 pulls: the mean square of a unit normal sample lies within +-0.3 of 1.
  CHECK(sum_sq / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("grid functions") {
  const SpectralDecomposition spec = fixtures::harmonic(6);
  const Grid1D& grid = spec.grid();
  ModeCoefficients e0{Eigen::VectorXcd::Zero(6)};
  e0.alpha(0) = 1.0;
  const Eigen::VectorXcd u0 = to_grid(e0, spec);
  CHECK((u0.real() - spec.mode(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lr_norm(u0, grid, 2.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(lr_norm(u0, grid, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(to_grid({Eigen::VectorXcd::Zero(7)}, spec), std::invalid_argument);

  const FieldEnsemble& ens = ensemble6();
  for (std::size_t s = 0; s < 50; ++s) {
    const ModeCoefficients c = coefficients(ens, s);
    const double l2 = std::pow(lr_norm(to_grid(c, spec), grid, 2.0), 2);
    CHECK(l2 == doctest::Approx(c.alpha.squaredNorm()).epsilon(1e-10));
    CHECK(sobolev_norm(c, spec.eigenvalues(), 0.0) == doctest::Approx(c.alpha.squaredNorm()).epsilon(1e-14));
  }
}

TEST_CASE("field covariance at probe nodes") {
  const SpectralDecomposition spec = fixtures::harmonic(6);
  const FieldEnsemble& ens = ensemble6();
  const KernelDiagonal green = inverse_kernel_diag(spec);
  for (int p = 0; p < 10; ++p) {
    const std::size_t i = spec.grid().nearest_index(-2.5 + 5.0 * p / 9.0);
    const Eigen::RowVectorXcd row = spec.eigenvectors().row(static_cast<Eigen::Index>(i)).cast<std::complex<double>>();
    const Estimate e = fixtures::sample_mean(kSamples, [&](std::size_t s) { return std::norm((row * ens.sample(s))(0)); });
    CHECK(fixtures::pull(e, green.values[i]) <= 3.0);
  }
}

TEST_CASE("sobolev norm moments") {
  const SpectralDecomposition spec = fixtures::harmonic(6);
  const FieldEnsemble& ens = ensemble6();
  double inverse_squares = 0.0;
  for (std::size_t n = 0; n < 6; ++n) inverse_squares += std::pow(spec.eigenvalue(n), -2.0);
  const Estimate minus_one =
      fixtures::sample_mean(kSamples, [&](std::size_t s) { return sobolev_norm(coefficients(ens, s), spec.eigenvalues(), -1.0); });
  CHECK(fixtures::pull(minus_one, inverse_squares) <= 3.0);

  // t = 0.4: the mean follows sum lambda^{-0.6}, a divergent series.
  double previous = 0.0;
  for (std::size_t K : {2, 4, 6}) {
    const FieldEnsemble sub = sample_ensemble(spec, K, 40000, 31);
    double expected = 0.0;
    for (std::size_t n = 0; n < K; ++n) expected += std::pow(spec.eigenvalue(n), -0.6);
    const Estimate e =
        fixtures::sample_mean(40000, [&](std::size_t s) { return sobolev_norm(coefficients(sub, s), spec.eigenvalues(), 0.4); });
    CHECK(fixtures::pull(e, expected) <= 3.0);
    CHECK(e.value > previous);
    previous = e.value;
  }
}

TEST_CASE("quartic moment and exponential integrability") {
  const SpectralDecomposition spec = fixtures::harmonic(6);
  const Grid1D& grid = spec.grid();
  const FieldEnsemble& ens = ensemble6();
  const double expected = 2.0 * std::pow(inverse_kernel_diag(spec).lp_norm(2.0), 2);
  std::vector<double> l4(kSamples);
  for (std::size_t s = 0; s < kSamples; ++s) l4[s] = lr_norm(to_grid(coefficients(ens, s), spec), grid, 4.0);
  CHECK(fixtures::pull(fixtures::sample_mean(kSamples, [&](std::size_t s) { return std::pow(l4[s], 4); }), expected) <= 3.0);

  const auto probe = [&](std::size_t S) {
    return fixtures::sample_mean(S, [&](std::size_t s) { return std::exp(0.01 * l4[s] * l4[s]); });
  };
  const Estimate half = probe(kSamples / 2);
  const Estimate full = probe(kSamples);
  CHECK(std::isfinite(full.value));
  CHECK(std::abs(half.value - full.value) <= 3.0 * std::hypot(half.se, full.se));
}

TEST_CASE("exact free moments") {
  const Eigen::VectorXd lambda = fixtures::harmonic(3).eigenvalues();
  const ReducedDM one = free_dm_exact(lambda, 1);
  for (Eigen::Index n = 0; n < 3; ++n) CHECK(one.matrix(n, n).real() == doctest::Approx(1.0 / lambda(n)));
  CHECK(one.matrix(0, 1) == std::complex<double>(0.0));
  const ReducedDM single = free_dm_exact(lambda.head(1), 1);
  CHECK(single.dimension() == 1);
  CHECK(single.matrix(0, 0).real() == doctest::Approx(1.0 / lambda(0)));
  const ReducedDM two = free_dm_exact(lambda.head(2), 2);
  CHECK(two.matrix(0, 0).real() == doctest::Approx(2.0 / (lambda(0) * lambda(0))));
  CHECK(two.matrix(1, 1).real() == doctest::Approx(2.0 / (lambda(0) * lambda(1))));
  CHECK_THROWS_AS(free_dm_exact(lambda, 4), std::invalid_argument);
}

TEST_CASE("empirical moments against the exact free moments") {
  const SpectralDecomposition spec = fixtures::harmonic(2);
  const FieldEnsemble ens = sample_ensemble(spec, 2, kSamples, 55);
  for (std::size_t k : {1, 2}) {
    const DmEstimate est = empirical_dm(ens, std::nullopt, k);
    const ReducedDM exact = free_dm_exact(spec.eigenvalues(), k);
    CHECK(est.mean.hermiticity_defect() == 0.0);
    CHECK(est.effective_samples == doctest::Approx(static_cast<double>(kSamples)));
    const Eigen::MatrixXcd diff = est.mean.matrix - exact.matrix;
    CHECK((diff.real().cwiseAbs().array() <= 3.0 * est.se_real.array()).all());
    CHECK((diff.imag().cwiseAbs().array() <= 3.0 * est.se_imag.array() + 1e-300).all());
  }
}

TEST_CASE("empirical moments of a single sample") {
  const SpectralDecomposition spec = fixtures::harmonic(3);
  const FieldEnsemble ens = sample_ensemble(spec, 3, 1, 4);
  const DmEstimate est = empirical_dm(ens, std::nullopt, 1);
  const Eigen::VectorXcd a = ens.sample(0);
  CHECK((est.mean.matrix - a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(est.se_real.maxCoeff() == 0.0);
}

TEST_CASE("weighted moments") {
  const SpectralDecomposition spec = fixtures::harmonic(2);
  const FieldEnsemble ens = sample_ensemble(spec, 2, 200, 6);
  std::vector<double> w(200, 0.0);
  w[17] = 3.0;
  const DmEstimate est = empirical_dm(ens, w, 1);
  const Eigen::VectorXcd a = ens.sample(17);
  CHECK((est.mean.matrix - a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(est.effective_samples == doctest::Approx(1.0));

  CHECK_THROWS_AS(empirical_dm(ens, std::vector<double>(199, 1.0), 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical_dm(ens, std::vector<double>(200, 0.0), 1), std::invalid_argument);
  std::vector<double> bad(200, 1.0);
  bad[3] = -1.0;
  CHECK_THROWS_AS(empirical_dm(ens, bad, 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical_dm(ens, std::nullopt, 0), std::invalid_argument);
}

TEST_CASE("ensemble checkpoint round trip") {
  const SpectralDecomposition spec = fixtures::harmonic(3);
  const FieldEnsemble ens = sample_ensemble(spec, 3, 25, 12);
  std::stringstream io;
  write_ensemble_csv(io, ens);
  const FieldEnsemble back = read_ensemble_csv(io, 12, spec.eigenvalues());
  CHECK(back.coefficients() == ens.coefficients());

  std::istringstream bad_header("id,mode,re,im\n");
  CHECK_THROWS_AS(read_ensemble_csv(bad_header, 1, spec.eigenvalues()), std::runtime_error);
  std::istringstream bad_mode("sample_id,mode,re,im\n0,5,1,1\n");
  CHECK_THROWS_AS(read_ensemble_csv(bad_mode, 1, spec.eigenvalues()), std::runtime_error);
}
