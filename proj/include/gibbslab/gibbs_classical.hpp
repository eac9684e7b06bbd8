#pragma once

// The nonlinear Gibbs measure d mu = z_r^{-1} exp(-F_NL) d mu_0, represented
// by importance weights on a fixed mu_0 ensemble.

#include <cstddef>
#include <memory>
#include <vector>

#include <json.hpp>

#include "gibbslab/gaussian_field.hpp"
#include "gibbslab/interaction.hpp"
#include "gibbslab/stats.hpp"

namespace gibbslab {

/// Per-sample F_NL and weights exp(-scale * F_NL). scale = 1 is mu itself,
/// other scales give the trial measures used in the variational checks.
struct WeightedEnsemble {
  std::shared_ptr<const FieldEnsemble> field;
  std::vector<double> fnl;
  std::vector<double> weights;
  double scale = 1.0;

  std::size_t samples() const { return weights.size(); }
};

WeightedEnsemble build_ensemble(std::shared_ptr<const FieldEnsemble> field, const InteractionTensor& tensor,
                                double scale = 1.0, std::size_t workers = 1);

/// z_r = E_{mu_0}[weight].
Estimate zr_estimate(const WeightedEnsemble& ensemble);

inline constexpr double kMinEffectiveSamples = 10.0;

/// (sum w)^2 / sum w^2.
double effective_sample_size(const std::vector<double>& weights);

struct MuDmEstimate {
  DmEstimate estimate;
  bool degenerate = false;  // effective sample size below kMinEffectiveSamples
};

MuDmEstimate mu_dm_estimate(const WeightedEnsemble& ensemble, std::size_t k);

struct ClassicalEntropy {
  Estimate relative_entropy;  // H_cl(mu, mu_0) = -E_mu F_NL - log z_r
  Estimate mean_fnl;          // E_mu F_NL
  Estimate log_zr;
  bool nonnegative = true;    // relative_entropy.value >= -3 se
};

ClassicalEntropy classical_relative_entropy(const WeightedEnsemble& ensemble);

/// |(-log z_r) - (H_cl + E_mu F_NL)| from the full-sample estimators.
double variational_residual(const WeightedEnsemble& ensemble);

/// Objective H_cl(nu, mu_0) + E_nu F_NL for the trial nu ~ exp(-trial_scale F_NL) mu_0,
/// minus its minimum -log z_r, estimated jointly on the same samples.
/// trial_scale = 1 gives 0; trial_scale = 0 is nu = mu_0.
Estimate variational_gap(const WeightedEnsemble& ensemble, double trial_scale);

/// {z_r, se, H_cl, E_F_NL, ESS, gamma_mu entries with SE} for k = 1..k_max.
nlohmann::json classical_report(const WeightedEnsemble& ensemble, std::size_t k_max);

}  // namespace gibbslab
