#pragma once

// Reference values computed without the library's numerics: closed forms,
// direct scalar sums and adaptive quadrature.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// C(n, k) by exact integer arithmetic.
std::uint64_t binomial(unsigned n, unsigned k);

/// Eigenvalues 2n + 1 of -d^2/dx^2 + x^2.
double harmonic_eigenvalue(std::size_t n);

/// n-th normalized Hermite function.
double hermite_function(std::size_t n, double x);

/// int u_0^4 dx for the harmonic ground state, 1/sqrt(2 pi).
double harmonic_ground_quartic();

/// Single-mode classical measure: weight exp(-(g/2) rho^2) against the
/// exponential law lambda exp(-lambda rho) of rho = |alpha|^2.
struct SingleModeClassical {
  double z;               // partition function
  double mean_rho;        // E_mu |alpha|^2
  double mean_f;          // E_mu F = (g/2) E_mu rho^2
  double relative_entropy;  // -E_mu F - log z
};
SingleModeClassical single_mode_classical(double lambda, double coupling_g);

/// Single-mode quantum Gibbs state with energies lambda n + (c g/2) n(n-1),
/// summed directly over 0 <= n <= n_max.
struct SingleModeQuantum {
  double log_z;
  double mean_n;           // Gamma^(1)
  double pair_moment;      // <n(n-1)>/2 = Gamma^(2)
  double tail;             // P(n >= n_max - 1)
};
SingleModeQuantum single_mode_quantum(double lambda, double g, double coupling, double temperature,
                                      std::size_t n_max);

/// Bose occupation 1/(exp(x) - 1) from the series sum_k exp(-k x).
double bose_series(double x);

/// Free-case Hilbert-Schmidt distance (sum_n (f_n/T - 1/lambda_n)^2)^{1/2}.
double free_hs_distance(const std::vector<double>& eigenvalues, double temperature);

/// Two-particle Hamiltonian h (x) 1 + 1 (x) h + c w assembled in the product
/// basis u_a (x) u_b and restricted to the normalized symmetric vectors
/// e_{mm}, e_{mn} = (u_m u_n + u_n u_m)/sqrt 2, ordered as (2,0,..), (1,1,..), ...
/// (descending lexicographic occupations). `pair(a,b,c,d)` = <ab|w|cd>.
template <class Pair>
Eigen::MatrixXd first_quantized_two_body(const std::vector<double>& eigenvalues, double coupling, Pair&& pair) {
  const std::size_t K = eigenvalues.size();
  std::vector<std::pair<std::size_t, std::size_t>> labels;
  // Descending lexicographic order of occupations with two particles.
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = m; n < K; ++n) labels.emplace_back(m, n);
  const auto D = static_cast<Eigen::Index>(K * K);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) {
      const auto r = static_cast<Eigen::Index>(a * K + b);
      H(r, r) += eigenvalues[a] + eigenvalues[b];
      for (std::size_t c = 0; c < K; ++c)
        for (std::size_t d = 0; d < K; ++d) H(r, static_cast<Eigen::Index>(c * K + d)) += coupling * pair(a, b, c, d);
    }
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(D, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [m, n] = labels[i];
    const auto col = static_cast<Eigen::Index>(i);
    if (m == n) {
      E(static_cast<Eigen::Index>(m * K + m), col) = 1.0;
    } else {
      E(static_cast<Eigen::Index>(m * K + n), col) = 1.0 / std::sqrt(2.0);
      E(static_cast<Eigen::Index>(n * K + m), col) = 1.0 / std::sqrt(2.0);
    }
  }
  return E.transpose() * H * E;
}

}  // namespace oracle
