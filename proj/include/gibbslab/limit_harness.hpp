#pragma once

// The mean-field experiment on the K-mode model: quantum Gibbs states at
// coupling 1/T against the classical nonlinear Gibbs measure, across a grid
// of temperatures, with all bound checks.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbslab/fock_quantum.hpp"
#include "gibbslab/gibbs_classical.hpp"
#include "gibbslab/interaction.hpp"
#include "gibbslab/reduced_dm.hpp"
#include "gibbslab/schrodinger1d.hpp"

namespace gibbslab {

/// Frobenius norm of A - B. Throws std::invalid_argument on a basis mismatch.
double hs_distance(const ReducedDM& a, const ReducedDM& b);

/// l^p norm of the singular values of A - B, p >= 1.
double schatten_p_distance(const ReducedDM& a, const ReducedDM& b, double p);

struct ToleranceProfile {
  double tail_mass = 1e-6;       // largest tail mass of a certified record
  double min_ess = 10.0;
  double identity = 1e-8;        // relative free-energy identity residual
  double kernel = 1e-8;          // position-space kernel slack
  double entropy_floor = -1e-10;
  double monotone_se = 1.0;      // allowed increase of d_k in SE of the difference
  double gap_se = 3.0;           // final |Z ratio - z_r| in SE of z_r
};

struct SweepConfig {
  double half_width = 12.0;
  std::size_t grid_points = 1200;
  PotentialSpec potential = PotentialSpec::power_law(2.0, 1.0);
  InteractionSpec interaction = InteractionSpec::delta(1.0);
  std::size_t modes = 2;
  std::vector<double> temperatures{2.0, 4.0, 8.0, 16.0};
  std::size_t samples = 200000;
  std::uint64_t seed = 20240601;
  ToleranceProfile tolerance;
  std::size_t kernel_subgrid = 16;  // k = 2 kernel checked on this many points
  double kernel_window = 4.0;       // ... spread over [-window, window]
  std::size_t workers = 1;

  /// Throws std::invalid_argument (fewer than 3 temperatures, T <= 0, unsorted grid, ...).
  void validate() const;
};

/// Quantum data at one temperature: free and interacting Gibbs states on a
/// common Fock basis.
struct QuantumPoint {
  double temperature;
  double coupling;
  std::shared_ptr<const OccupationBasis> basis;
  FockOperator free_hamiltonian;
  FockOperator interacting_hamiltonian;
  GibbsEnsemble free_ensemble;
  GibbsEnsemble interacting;
  ReducedDM free_rdm1, free_rdm2;
  ReducedDM rdm1, rdm2;
};

/// N_max is chosen so the free tail mass is below tail_target / 10.
QuantumPoint quantum_point(const Eigen::VectorXd& eigenvalues, const InteractionTensor& tensor,
                           double temperature, double coupling, double tail_target, std::size_t workers = 1);

struct KernelDomination {
  double constant;          // Z_0 / Z_lambda
  double violation_k1;      // max Gamma_l(x;y) - C Gamma_0(x;y) over the grid
  double floor_k1;          // min Gamma_l(x;y)
  double violation_k2;      // same on the coarse pair grid
  double floor_k2;
  bool passed;
};

KernelDomination kernel_domination_report(const QuantumPoint& point, const SpectralDecomposition& spectrum,
                                          const std::vector<std::size_t>& subgrid, double tolerance);

/// Indices of `count` nodes spread evenly over [-window, window].
std::vector<std::size_t> kernel_subgrid(const Grid1D& grid, std::size_t count, double window);

struct BoundsRecord {
  PartitionRatio partition;
  double partition_upper;                      // exp(Tr_K[w h^-1 (x) h^-1])
  bool partition_ok;
  double hs_lhs[2], hs_rhs[2];                  // k = 1, 2
  bool hs_ok;
  double operator_radius, operator_constant;
  bool operator_ok;
  KernelDomination kernel;
  double identity_residual;
  bool identity_ok;
  double quantum_entropy;
  double classical_entropy;
  bool entropy_ok;

  bool all() const { return partition_ok && hs_ok && operator_ok && kernel.passed && identity_ok && entropy_ok; }
};

BoundsRecord bounds_report(const QuantumPoint& point, const SpectralDecomposition& spectrum,
                           const InteractionTensor& tensor, double classical_entropy, const SweepConfig& config);

struct TemperatureRecord {
  double temperature;
  double coupling;
  std::size_t max_particles;
  double ratio;
  double neg_log_ratio;
  double zr, zr_se;
  double d1, d1_se, d2, d2_se;
  double schatten1[3];  // k = 1 distance for p = 1, 1.5, 2
  double schatten2[3];  // k = 2
  double tail_mass;
  double ess;
  double number_moment;  // Tr[(N/T) Gamma]
  BoundsRecord bounds;
  bool certified;
};

struct Verdict {
  bool passed;
  std::string detail;
};

struct ConvergenceReport {
  nlohmann::json config;
  std::vector<TemperatureRecord> records;
  double variational_residual;
  std::vector<double> d1_step_se, d2_step_se;  // SE of d_k(T_{j+1}) - d_k(T_j)
  Verdict monotone_d1, monotone_d2, gap_decreasing, final_gap, bounds, certified;

  bool passed() const;
  nlohmann::json to_json() const;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json sweep_config_json(const SweepConfig& config);

ConvergenceReport convergence_sweep(const SweepConfig& config);

/// T,lambda,ratio,neg_log_ratio,zr,zr_se,d1,d2,s1_dist,tail_mass,ess,bounds_passed
void write_sweep_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace gibbslab
