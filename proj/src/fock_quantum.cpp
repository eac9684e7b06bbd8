#include "gibbslab/fock_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gibbslab/parallel.hpp"

namespace gibbslab {

OccupationBasis enumerate_basis(std::size_t modes, std::size_t max_particles, BasisLimits limits) {
  return OccupationBasis(modes, max_particles, limits);
}

FockOperator::FockOperator(std::shared_ptr<const OccupationBasis> basis, std::vector<Eigen::MatrixXd> blocks)
    : basis_(std::move(basis)), blocks_(std::move(blocks)) {
  if (!basis_) throw std::invalid_argument("FockOperator: missing basis");
  if (blocks_.size() != basis_->sector_count()) {
    throw std::invalid_argument("FockOperator: one block per particle sector is required");
  }
  for (std::size_t n = 0; n < blocks_.size(); ++n) {
    const auto d = static_cast<Eigen::Index>(basis_->sector(n).dimension());
    if (blocks_[n].rows() != d || blocks_[n].cols() != d) {
      throw std::invalid_argument("FockOperator: block " + std::to_string(n) + " has the wrong size");
    }
  }
}

Eigen::MatrixXd FockOperator::dense() const {
  const auto D = static_cast<Eigen::Index>(basis_->dimension());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(D, D);
  for (std::size_t n = 0; n < blocks_.size(); ++n) {
    const auto off = static_cast<Eigen::Index>(basis_->sector_offset(n));
    out.block(off, off, blocks_[n].rows(), blocks_[n].cols()) = blocks_[n];
  }
  return out;
}

double FockOperator::symmetry_defect() const {
  double defect = 0.0;
  for (const auto& b : blocks_) {
    if (b.size() > 0) defect = std::max(defect, (b - b.transpose()).cwiseAbs().maxCoeff());
  }
  return defect;
}

bool FockOperator::is_diagonal() const {
  for (const auto& b : blocks_) {
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index i = 0; i < b.rows(); ++i) {
        if (i != j && b(i, j) != 0.0) return false;
      }
  }
  return true;
}

FockOperator build_hamiltonian_fock(std::shared_ptr<const OccupationBasis> basis,
                                    const Eigen::VectorXd& eigenvalues, const InteractionTensor& tensor,
                                    double coupling, std::size_t workers) {
  if (!basis) throw std::invalid_argument("build_hamiltonian_fock: missing basis");
  const std::size_t K = basis->modes();
  if (static_cast<std::size_t>(eigenvalues.size()) < K || tensor.modes() < K) {
    throw std::invalid_argument("build_hamiltonian_fock: spectrum or tensor smaller than the basis");
  }
  if (!(coupling >= 0.0)) throw std::invalid_argument("build_hamiltonian_fock: coupling must be nonnegative");
  const bool interacting = coupling != 0.0 && !tensor.is_zero();

  std::vector<Eigen::MatrixXd> blocks(basis->sector_count());
  parallel_for(blocks.size(), workers, [&](std::size_t n) {
    const SymmetricBasis& sector = basis->sector(n);
    const auto d = static_cast<Eigen::Index>(sector.dimension());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
      const Occupation& nu = sector.state(static_cast<std::size_t>(c));
      double diag = 0.0;
      for (std::size_t i = 0; i < K; ++i) diag += eigenvalues(static_cast<Eigen::Index>(i)) * nu[i];
      H(c, c) += diag;
      if (!interacting || n < 2) continue;
      Occupation work = nu;
      for (std::size_t q = 0; q < K; ++q) {
        if (work[q] == 0) continue;
        const double a_q = std::sqrt(static_cast<double>(work[q]));
        --work[q];
        for (std::size_t p = 0; p < K; ++p) {
          if (work[p] == 0) continue;
          const double a_p = a_q * std::sqrt(static_cast<double>(work[p]));
          --work[p];
          for (std::size_t m2 = 0; m2 < K; ++m2) {
            const double c_n = a_p * std::sqrt(static_cast<double>(work[m2] + 1));
            ++work[m2];
            for (std::size_t m1 = 0; m1 < K; ++m1) {
              const double w = tensor(m1, m2, p, q);
              if (w != 0.0) {
                const double amp = c_n * std::sqrt(static_cast<double>(work[m1] + 1));
                ++work[m1];
                const auto r = sector.index_of(work);
                H(static_cast<Eigen::Index>(*r), c) += 0.5 * coupling * w * amp;
                --work[m1];
              }
            }
            --work[m2];
          }
          ++work[p];
        }
        ++work[q];
      }
    }
    blocks[n] = 0.5 * (H + H.transpose());
  });
  return FockOperator(std::move(basis), std::move(blocks));
}

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

// Scalar exp: Eigen's vectorized exp clamps -inf to a tiny positive value.
Eigen::VectorXd exp_of(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return std::exp(x); });
}

double log_sum_exp(const std::vector<Eigen::VectorXd>& values) {
  double top = kMinusInf;
  for (const auto& v : values) {
    if (v.size() > 0) top = std::max(top, v.maxCoeff());
  }
  if (top == kMinusInf) return kMinusInf;
  double sum = 0.0;
  for (const auto& v : values) sum += exp_of(v.array() - top).sum();
  return top + std::log(sum);
}

FockState diagonal_state(std::shared_ptr<const OccupationBasis> basis) {
  FockState s{basis, {}, {}};
  for (std::size_t n = 0; n < basis->sector_count(); ++n) {
    const auto d = static_cast<Eigen::Index>(basis->sector(n).dimension());
    s.vectors.push_back(Eigen::MatrixXd::Identity(d, d));
    s.log_probabilities.push_back(Eigen::VectorXd::Constant(d, kMinusInf));
  }
  return s;
}

}  // namespace

FockState FockState::vacuum(std::shared_ptr<const OccupationBasis> basis) {
  FockState s = diagonal_state(std::move(basis));
  s.log_probabilities[0](0) = 0.0;
  return s;
}

FockState FockState::maximally_mixed(std::shared_ptr<const OccupationBasis> basis) {
  FockState s = diagonal_state(basis);
  const double log_p = -std::log(static_cast<double>(basis->dimension()));
  for (auto& v : s.log_probabilities) v.setConstant(log_p);
  return s;
}

double FockState::trace() const {
  double t = 0.0;
  for (const auto& v : log_probabilities) t += exp_of(v).sum();
  return t;
}

double FockState::sector_probability(std::size_t n) const { return exp_of(log_probabilities[n]).sum(); }

Eigen::MatrixXd FockState::sector_density(std::size_t n) const {
  const Eigen::VectorXd p = exp_of(log_probabilities[n]);
  return vectors[n] * p.asDiagonal() * vectors[n].transpose();
}

double FockState::expectation(const FockOperator& op) const {
  if (op.sectors() != vectors.size()) throw std::invalid_argument("FockState::expectation: basis mismatch");
  double sum = 0.0;
  for (std::size_t n = 0; n < vectors.size(); ++n) {
    const Eigen::VectorXd p = exp_of(log_probabilities[n]);
    const Eigen::MatrixXd HV = op.block(n) * vectors[n];
    sum += (vectors[n].cwiseProduct(HV).colwise().sum().transpose().array() * p.array()).sum();
  }
  return sum;
}

double FockState::entropy() const {
  double s = 0.0;
  for (const auto& v : log_probabilities) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) != kMinusInf) s -= std::exp(v(i)) * v(i);
    }
  }
  return s;
}

double GibbsEnsemble::partition() const { return std::exp(log_partition); }

GibbsEnsemble gibbs_state(const FockOperator& hamiltonian, double temperature, double coupling,
                          std::size_t workers) {
  if (!(temperature > 0.0)) throw std::invalid_argument("gibbs_state: T must be positive");
  const std::size_t sectors = hamiltonian.sectors();
  std::vector<Eigen::VectorXd> energies(sectors);
  std::vector<Eigen::MatrixXd> vectors(sectors);
  const bool diagonal = hamiltonian.is_diagonal();
  parallel_for(sectors, workers, [&](std::size_t n) {
    const Eigen::MatrixXd& block = hamiltonian.block(n);
    if (diagonal) {
      energies[n] = block.diagonal();
      vectors[n] = Eigen::MatrixXd::Identity(block.rows(), block.cols());
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("gibbs_state: eigensolve failed in sector " + std::to_string(n));
    }
    energies[n] = solver.eigenvalues();
    vectors[n] = solver.eigenvectors();
  });
  std::vector<Eigen::VectorXd> exponents(sectors);
  for (std::size_t n = 0; n < sectors; ++n) exponents[n] = -energies[n] / temperature;
  const double log_z = log_sum_exp(exponents);
  for (auto& e : exponents) e.array() -= log_z;
  return GibbsEnsemble{temperature, coupling, log_z, std::move(energies),
                       FockState{hamiltonian.basis_ptr(), std::move(vectors), std::move(exponents)}};
}

PartitionRatio partition_ratio(const GibbsEnsemble& interacting, const GibbsEnsemble& free_ensemble,
                               const FockOperator& free_hamiltonian, const FockOperator& interacting_hamiltonian,
                               const InteractionTensor& tensor, const Eigen::VectorXd& eigenvalues) {
  if (!(interacting.basis().modes() == free_ensemble.basis().modes() &&
        interacting.basis().max_particles() == free_ensemble.basis().max_particles())) {
    throw std::invalid_argument("partition_ratio: ensembles live on different bases");
  }
  const double T = interacting.temperature;
  PartitionRatio out{};
  out.neg_log_ratio = free_ensemble.log_partition - interacting.log_partition;
  out.ratio = std::exp(-out.neg_log_ratio);
  out.peierls_bound = (free_ensemble.state.expectation(interacting_hamiltonian) -
                       free_ensemble.state.expectation(free_hamiltonian)) / T;
  const std::size_t K = interacting.basis().modes();
  out.trace_bound = interacting.coupling * T *
                    interaction_free_trace(tensor.modes() == K ? tensor : tensor.truncated(K), eigenvalues);
  constexpr double slack = 1e-12;
  out.within_bounds = out.neg_log_ratio >= -slack && out.neg_log_ratio <= out.peierls_bound + slack &&
                      out.neg_log_ratio <= out.trace_bound + slack;
  return out;
}

namespace {

void check_rdm_order(const FockState& state, std::size_t k) {
  if (k < 1 || k > 2) throw std::invalid_argument("reduced_dm: k must be 1 or 2");
  if (k > state.basis->max_particles()) throw std::invalid_argument("reduced_dm: k exceeds N_max");
}

// sqrt(n (n-1) ... (n-r+1)).
double falling_root(int n, int r) {
  double v = 1.0;
  for (int i = 0; i < r; ++i) v *= static_cast<double>(n - i);
  return std::sqrt(v);
}

}  // namespace

ReducedDM rdm_correlators(const FockState& state, std::size_t k) {
  check_rdm_order(state, k);
  const OccupationBasis& basis = *state.basis;
  const std::size_t K = basis.modes();
  SymmetricBasis kbasis(K, k);
  const auto d = static_cast<Eigen::Index>(kbasis.dimension());
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t n = k; n <= basis.max_particles(); ++n) {
    const SymmetricBasis& sector = basis.sector(n);
    const Eigen::MatrixXd rho = state.sector_density(n);
    for (Eigen::Index a = 0; a < d; ++a) {
      const Occupation& mu = kbasis.state(static_cast<std::size_t>(a));
      for (Eigen::Index b = 0; b < d; ++b) {
        const Occupation& nu = kbasis.state(static_cast<std::size_t>(b));
        // Tr[a^{+nu} a^{mu} rho] = sum_c <c - mu + nu| a^{+nu} a^{mu} |c> rho(c, c - mu + nu).
        double acc = 0.0;
        for (std::size_t c = 0; c < sector.dimension(); ++c) {
          Occupation target = sector.state(c);
          double amp = 1.0;
          bool valid = true;
          for (std::size_t i = 0; i < K && valid; ++i) {
            if (target[i] < mu[i]) {
              valid = false;
              break;
            }
            amp *= falling_root(target[i], mu[i]);
            target[i] += nu[i] - mu[i];
            amp *= falling_root(target[i], nu[i]);
          }
          if (!valid) continue;
          acc += amp * rho(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(*sector.index_of(target)));
        }
        gamma(a, b) += acc / std::sqrt(occupation_factorial(mu) * occupation_factorial(nu));
      }
    }
  }
  return ReducedDM(std::move(kbasis), gamma.cast<std::complex<double>>(), Provenance::quantum);
}

ReducedDM rdm_partial_trace(const FockState& state, std::size_t k) {
  check_rdm_order(state, k);
  const OccupationBasis& basis = *state.basis;
  const std::size_t K = basis.modes();
  SymmetricBasis kbasis(K, k);
  const auto d = static_cast<Eigen::Index>(kbasis.dimension());
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t n = k; n <= basis.max_particles(); ++n) {
    const SymmetricBasis& sector = basis.sector(n);
    const SymmetricBasis rest(K, n - k);
    const Eigen::MatrixXd rho = state.sector_density(n);
    // Splitting e_omega into e_alpha (x) e_beta has weight
    // c^2 = prod_i C(omega_i, alpha_i) / C(n, k); the binomial in front of the
    // partial trace cancels the denominator.
    for (std::size_t r = 0; r < rest.dimension(); ++r) {
      const Occupation& beta = rest.state(r);
      std::vector<Eigen::Index> rows(static_cast<std::size_t>(d));
      Eigen::VectorXd weight(d);
      for (Eigen::Index a = 0; a < d; ++a) {
        const Occupation& alpha = kbasis.state(static_cast<std::size_t>(a));
        Occupation omega(K);
        double w = 1.0;
        for (std::size_t i = 0; i < K; ++i) {
          omega[i] = alpha[i] + beta[i];
          w *= binomial(static_cast<std::size_t>(omega[i]), static_cast<std::size_t>(alpha[i]));
        }
        rows[static_cast<std::size_t>(a)] = static_cast<Eigen::Index>(*sector.index_of(omega));
        weight(a) = std::sqrt(w);
      }
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
          gamma(a, b) += weight(a) * weight(b) * rho(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
        }
    }
  }
  return ReducedDM(std::move(kbasis), gamma.cast<std::complex<double>>(), Provenance::quantum);
}

ReducedDM reduced_dm(const FockState& state, std::size_t k) {
  ReducedDM by_correlators = rdm_correlators(state, k);
  const ReducedDM by_partial_trace = rdm_partial_trace(state, k);
  const double scale = std::max(1.0, by_correlators.matrix.cwiseAbs().maxCoeff());
  const double gap = (by_correlators.matrix - by_partial_trace.matrix).cwiseAbs().maxCoeff();
  if (gap > kRouteTolerance * scale) {
    throw std::logic_error("reduced_dm: correlator and partial-trace routes differ by " + std::to_string(gap));
  }
  return by_correlators;
}

Eigen::VectorXd bose_occupations(const Eigen::VectorXd& eigenvalues, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("bose_occupations: T must be positive");
  Eigen::VectorXd f(eigenvalues.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = 1.0 / std::expm1(eigenvalues(i) / temperature);
  return f;
}

ReducedDM free_rdm_exact(const Eigen::VectorXd& eigenvalues, double temperature, std::size_t k) {
  if (k < 1 || k > 2) throw std::invalid_argument("free_rdm_exact: k must be 1 or 2");
  const Eigen::VectorXd f = bose_occupations(eigenvalues, temperature);
  SymmetricBasis basis(static_cast<std::size_t>(eigenvalues.size()), k);
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const Occupation& nu = basis.state(static_cast<std::size_t>(a));
    double v = 1.0;
    for (std::size_t i = 0; i < nu.size(); ++i) v *= std::pow(f(static_cast<Eigen::Index>(i)), nu[i]);
    m(a, a) = v;
  }
  return ReducedDM(std::move(basis), std::move(m), Provenance::exact_free);
}

double quantum_relative_entropy(const FockState& state, const FockState& reference) {
  if (state.vectors.size() != reference.vectors.size()) {
    throw std::invalid_argument("quantum_relative_entropy: states live on different bases");
  }
  for (const auto& v : reference.log_probabilities) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v(i))) throw std::domain_error("quantum_relative_entropy: reference state is not full rank");
    }
  }
  double value = -state.entropy();
  for (std::size_t n = 0; n < state.vectors.size(); ++n) {
    const Eigen::VectorXd p = exp_of(state.log_probabilities[n]);
    const Eigen::MatrixXd overlap = (reference.vectors[n].transpose() * state.vectors[n]).array().square();
    // Tr[rho log rho'] restricted to sector n.
    value -= reference.log_probabilities[n].dot(overlap * p);
  }
  return value;
}

double free_energy(const FockState& state, const FockOperator& hamiltonian, double temperature) {
  return state.expectation(hamiltonian) - temperature * state.entropy();
}

double number_moment(const FockState& state, double temperature, int power) {
  if (power < 1) throw std::invalid_argument("number_moment: power must be at least 1");
  double sum = 0.0;
  for (std::size_t n = 0; n < state.vectors.size(); ++n) {
    sum += state.sector_probability(n) * std::pow(static_cast<double>(n) / temperature, power);
  }
  return sum;
}

double truncation_diagnostic(const FockState& state) {
  const std::size_t N = state.basis->max_particles();
  double tail = 0.0;
  for (std::size_t n = (N == 0 ? 0 : N - 1); n <= N; ++n) tail += state.sector_probability(n);
  return tail;
}

double free_tail_mass(const Eigen::VectorXd& eigenvalues, double temperature, std::size_t max_particles) {
  // h[n] = complete homogeneous symmetric polynomial of degree n in x_i.
  std::vector<double> h(max_particles + 1, 0.0);
  h[0] = 1.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double x = std::exp(-eigenvalues(i) / temperature);
    for (std::size_t n = 1; n <= max_particles; ++n) h[n] += x * h[n - 1];
  }
  double total = 0.0;
  for (double v : h) total += v;
  double tail = h[max_particles];
  if (max_particles >= 1) tail += h[max_particles - 1];
  return tail / total;
}

std::size_t choose_cutoff(const Eigen::VectorXd& eigenvalues, double temperature, double target,
                          BasisLimits limits) {
  const auto K = static_cast<std::size_t>(eigenvalues.size());
  for (std::size_t N = 2;; ++N) {
    if (binomial(K - 1 + N, K - 1) > static_cast<double>(limits.max_sector_dimension) ||
        binomial(K + N, K) > static_cast<double>(limits.max_total_dimension)) {
      throw std::length_error("choose_cutoff: tail mass " + std::to_string(target) + " at T=" +
                              std::to_string(temperature) + " needs a basis beyond the dense-solve limit");
    }
    if (free_tail_mass(eigenvalues, temperature, N) < target) return N;
  }
}

nlohmann::json ensemble_metadata(const GibbsEnsemble& ensemble) {
  nlohmann::json out;
  out["K"] = ensemble.basis().modes();
  out["N_max"] = ensemble.basis().max_particles();
  out["dimension"] = ensemble.basis().dimension();
  out["T"] = ensemble.temperature;
  out["lambda"] = ensemble.coupling;
  out["log_Z"] = ensemble.log_partition;
  out["Z"] = ensemble.partition();
  out["tail_mass"] = truncation_diagnostic(ensemble.state);
  return out;
}

void write_gibbs_spectrum_csv(std::ostream& os, const GibbsEnsemble& ensemble) {
  os.precision(17);
  os << "sector,index,energy\n";
  for (std::size_t n = 0; n < ensemble.energies.size(); ++n) {
    for (Eigen::Index i = 0; i < ensemble.energies[n].size(); ++i) {
      os << n << ',' << i << ',' << ensemble.energies[n](i) << '\n';
    }
  }
}

}  // namespace gibbslab
