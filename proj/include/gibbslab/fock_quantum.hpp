#pragma once

// Truncated grand-canonical Bose gas on K modes: number-conserving
// Hamiltonians stored as particle-sector blocks, Gibbs states in their
// spectral form, and reduced density matrices.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gibbslab/interaction.hpp"
#include "gibbslab/occupation.hpp"
#include "gibbslab/reduced_dm.hpp"

namespace gibbslab {

OccupationBasis enumerate_basis(std::size_t modes, std::size_t max_particles, BasisLimits limits = {});

/// Real symmetric operator that conserves particle number, one dense block
/// per sector n = 0..N_max.
class FockOperator {
 public:
  FockOperator(std::shared_ptr<const OccupationBasis> basis, std::vector<Eigen::MatrixXd> blocks);

  const OccupationBasis& basis() const { return *basis_; }
  std::shared_ptr<const OccupationBasis> basis_ptr() const { return basis_; }
  const Eigen::MatrixXd& block(std::size_t n) const { return blocks_[n]; }
  std::size_t sectors() const { return blocks_.size(); }
  /// Full matrix on the basis (off-sector entries exactly zero).
  Eigen::MatrixXd dense() const;
  double symmetry_defect() const;
  bool is_diagonal() const;

 private:
  std::shared_ptr<const OccupationBasis> basis_;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// sum_n lambda_n a_n^+ a_n + (coupling/2) sum W_{mnpq} a_m^+ a_n^+ a_p a_q.
FockOperator build_hamiltonian_fock(std::shared_ptr<const OccupationBasis> basis,
                                    const Eigen::VectorXd& eigenvalues, const InteractionTensor& tensor,
                                    double coupling, std::size_t workers = 1);

/// A state diagonal in per-sector orthonormal bases: rho = sum_n V_n diag(p_n) V_n^T,
/// with the probabilities kept as logarithms (-inf for zero weight).
struct FockState {
  std::shared_ptr<const OccupationBasis> basis;
  std::vector<Eigen::MatrixXd> vectors;
  std::vector<Eigen::VectorXd> log_probabilities;

  static FockState vacuum(std::shared_ptr<const OccupationBasis> basis);
  static FockState maximally_mixed(std::shared_ptr<const OccupationBasis> basis);

  double trace() const;
  /// Probability of finding n particles.
  double sector_probability(std::size_t n) const;
  /// Density matrix of sector n in the occupation basis.
  Eigen::MatrixXd sector_density(std::size_t n) const;
  /// Tr[A rho] for a number-conserving operator.
  double expectation(const FockOperator& op) const;
  /// -Tr[rho log rho].
  double entropy() const;
};

struct GibbsEnsemble {
  double temperature;
  double coupling;
  double log_partition;             // log Z
  std::vector<Eigen::VectorXd> energies;  // per-sector eigenvalues of H
  FockState state;

  const OccupationBasis& basis() const { return *state.basis; }
  double partition() const;
};

/// Exact Gibbs state exp(-H/T)/Z by sector-wise dense eigensolves.
GibbsEnsemble gibbs_state(const FockOperator& hamiltonian, double temperature, double coupling = 0.0,
                          std::size_t workers = 1);

struct PartitionRatio {
  double ratio;            // Z_lambda / Z_0
  double neg_log_ratio;    // -log ratio
  double peierls_bound;    // (coupling/T) Tr[V Gamma_0]
  double trace_bound;      // coupling T sum_{m,n} W_{mnmn}/(lambda_m lambda_n)
  bool within_bounds;      // 0 <= -log ratio <= both bounds (1e-12 slack)
};

PartitionRatio partition_ratio(const GibbsEnsemble& interacting, const GibbsEnsemble& free_ensemble,
                               const FockOperator& free_hamiltonian, const FockOperator& interacting_hamiltonian,
                               const InteractionTensor& tensor, const Eigen::VectorXd& eigenvalues);

/// Gamma^(k) of a state by normally ordered correlators,
/// <mu|Gamma|nu> = Tr[a^{+nu} a^{mu} rho] / sqrt(mu! nu!).
ReducedDM rdm_correlators(const FockState& state, std::size_t k);

/// Gamma^(k) by sector-wise partial traces with binomial weights.
ReducedDM rdm_partial_trace(const FockState& state, std::size_t k);

inline constexpr double kRouteTolerance = 1e-10;

/// Both routes, cross-checked: throws std::logic_error if they differ by more
/// than kRouteTolerance relative to max(1, max |Gamma|).
ReducedDM reduced_dm(const FockState& state, std::size_t k);

/// Bose occupations f_n = 1/(exp(lambda_n/T) - 1).
Eigen::VectorXd bose_occupations(const Eigen::VectorXd& eigenvalues, double temperature);

/// (1/(e^{h/T}-1))^{(x)k} on the symmetric basis: diagonal prod_i f_i^{nu_i}.
ReducedDM free_rdm_exact(const Eigen::VectorXd& eigenvalues, double temperature, std::size_t k);

/// Tr[G (log G - log G')]. Throws std::domain_error if G' has a zero eigenvalue.
double quantum_relative_entropy(const FockState& state, const FockState& reference);

/// Tr[H rho] - T S(rho).
double free_energy(const FockState& state, const FockOperator& hamiltonian, double temperature);

/// Tr[(N/T)^l rho].
double number_moment(const FockState& state, double temperature, int power);

/// Probability of |nu| >= N_max - 1.
double truncation_diagnostic(const FockState& state);

/// sum_{n <= N_max} of the free sector weights: complete homogeneous
/// symmetric polynomials of x_i = exp(-lambda_i/T). Returns the free tail mass
/// for cutoff N_max.
double free_tail_mass(const Eigen::VectorXd& eigenvalues, double temperature, std::size_t max_particles);

/// Smallest N_max whose free tail mass is below `target` (the free state has
/// the heaviest tail of all repulsive couplings).
std::size_t choose_cutoff(const Eigen::VectorXd& eigenvalues, double temperature, double target,
                          BasisLimits limits = {});

nlohmann::json ensemble_metadata(const GibbsEnsemble& ensemble);
/// sector,index,energy
void write_gibbs_spectrum_csv(std::ostream& os, const GibbsEnsemble& ensemble);

}  // namespace gibbslab
