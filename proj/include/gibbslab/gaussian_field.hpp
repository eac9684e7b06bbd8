#pragma once

// The free Gibbs (Gaussian) measure mu_0 with covariance h^{-1}, realised in
// the eigenbasis of h: alpha_j = (g1 + i g2) / sqrt(2 lambda_j).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "gibbslab/reduced_dm.hpp"
#include "gibbslab/schrodinger1d.hpp"
#include "gibbslab/stats.hpp"

namespace gibbslab {

using Rng = std::mt19937_64;

struct ModeCoefficients {
  Eigen::VectorXcd alpha;
};

/// i.i.d. draws from mu_0 restricted to the K lowest modes. Sample s is row s.
/// Samples are produced in fixed chunks, chunk c from its own stream seeded by
/// (seed, c), so the ensemble does not depend on the worker count.
class FieldEnsemble {
 public:
  FieldEnsemble(std::uint64_t seed, Eigen::VectorXd eigenvalues, Eigen::MatrixXcd samples);

  std::uint64_t seed() const { return seed_; }
  std::size_t samples() const { return static_cast<std::size_t>(coefficients_.rows()); }
  std::size_t modes() const { return static_cast<std::size_t>(coefficients_.cols()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXcd& coefficients() const { return coefficients_; }
  Eigen::VectorXcd sample(std::size_t s) const {
    return coefficients_.row(static_cast<Eigen::Index>(s)).transpose();
  }

 private:
  std::uint64_t seed_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd coefficients_;
};

inline constexpr std::size_t kSamplesPerChunk = 4096;

ModeCoefficients sample_mu0(const SpectralDecomposition& spectrum, std::size_t K, Rng& rng);

FieldEnsemble sample_ensemble(const SpectralDecomposition& spectrum, std::size_t K,
                              std::size_t samples, std::uint64_t seed, std::size_t workers = 1);

/// u(x_i) = sum_n alpha_n u_n(x_i).
Eigen::VectorXcd to_grid(const ModeCoefficients& coeffs, const SpectralDecomposition& spectrum);

/// sum_n lambda_n^t |alpha_n|^2.
double sobolev_norm(const ModeCoefficients& coeffs, const Eigen::VectorXd& eigenvalues, double t);

/// Grid L^r norm (sum_i |u_i|^r dx)^{1/r}, r >= 2.
double lr_norm(const Eigen::VectorXcd& grid_function, const Grid1D& grid, double r);

/// k!(h^{-1})^{(x)k} on the symmetric basis of the K lowest modes: diagonal
/// with entries k! prod_i lambda_i^{-nu_i}.
ReducedDM free_dm_exact(const Eigen::VectorXd& eigenvalues, std::size_t k);

struct DmEstimate {
  ReducedDM mean;
  Eigen::MatrixXd se_real;  // jackknife standard errors of the real parts
  Eigen::MatrixXd se_imag;  // and of the imaginary parts
  double effective_samples = 0.0;
};

/// Weighted mean of |alpha^{(x)k}><alpha^{(x)k}|. Without weights the mean is
/// uniform, i.e. an estimate of the mu_0 moment. With weights the estimator is
/// self-normalized. Standard errors by a 50-block jackknife (none if S = 1).
DmEstimate empirical_dm(const FieldEnsemble& ensemble, std::optional<std::span<const double>> weights,
                        std::size_t k);

/// Ensemble checkpoint: CSV with columns sample_id, mode, re, im.
void write_ensemble_csv(std::ostream& os, const FieldEnsemble& ensemble);
FieldEnsemble read_ensemble_csv(std::istream& is, std::uint64_t seed, Eigen::VectorXd eigenvalues);

}  // namespace gibbslab
