#include "gibbslab/gibbs_classical.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gibbslab/parallel.hpp"
#include "gibbslab/report.hpp"

namespace gibbslab {

WeightedEnsemble build_ensemble(std::shared_ptr<const FieldEnsemble> field, const InteractionTensor& tensor,
                                double scale, std::size_t workers) {
  if (!field) throw std::invalid_argument("build_ensemble: missing field ensemble");
  if (field->modes() > tensor.modes()) {
    throw std::invalid_argument("build_ensemble: the tensor has fewer modes than the ensemble");
  }
  const InteractionTensor W = field->modes() == tensor.modes() ? tensor : tensor.truncated(field->modes());
  const std::size_t S = field->samples();
  WeightedEnsemble out{field, std::vector<double>(S), std::vector<double>(S), scale};
  const std::size_t chunks = (S + kSamplesPerChunk - 1) / kSamplesPerChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(S, (c + 1) * kSamplesPerChunk);
    for (std::size_t s = c * kSamplesPerChunk; s < end; ++s) {
      const double f = f_nl_modes(field->sample(s), W);
      if (!std::isfinite(f)) {
        throw std::domain_error("build_ensemble: non-finite F_NL at sample " + std::to_string(s));
      }
      // Roundoff can leave tiny negative values for a vanishing field.
      out.fnl[s] = std::max(f, 0.0);
      out.weights[s] = std::exp(-scale * out.fnl[s]);
    }
  });
  return out;
}

namespace {

// Per-block sums of an observable row produced by fill(s, row).
template <class Fill>
BlockSums accumulate(std::size_t S, Eigen::Index observables, Fill&& fill) {
  const std::size_t B = jackknife_block_count(S);
  BlockSums blocks{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), observables),
                   Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B))};
  Eigen::VectorXd row(observables);
  for (std::size_t s = 0; s < S; ++s) {
    const auto b = static_cast<Eigen::Index>(jackknife_block_of(s, S, B));
    fill(s, row);
    blocks.sums.row(b) += row.transpose();
    blocks.counts(b) += 1.0;
  }
  return blocks;
}

void require_two_samples(const WeightedEnsemble& ensemble, const char* who) {
  if (ensemble.samples() < 2) throw std::invalid_argument(std::string(who) + ": needs S >= 2");
}

}  // namespace

double effective_sample_size(const std::vector<double>& weights) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    sum += w;
    sum_sq += w * w;
  }
  return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
}

Estimate zr_estimate(const WeightedEnsemble& ensemble) {
  require_two_samples(ensemble, "zr_estimate");
  const BlockSums blocks =
      accumulate(ensemble.samples(), 1, [&](std::size_t s, Eigen::VectorXd& row) { row(0) = ensemble.weights[s]; });
  const JackknifeResult jk = jackknife(blocks, [](const Eigen::VectorXd& m) { return m; });
  return {jk.value(0), jk.se(0)};
}

MuDmEstimate mu_dm_estimate(const WeightedEnsemble& ensemble, std::size_t k) {
  require_two_samples(ensemble, "mu_dm_estimate");
  MuDmEstimate out{empirical_dm(*ensemble.field, std::span<const double>(ensemble.weights), k), false};
  out.degenerate = out.estimate.effective_samples < kMinEffectiveSamples;
  return out;
}

ClassicalEntropy classical_relative_entropy(const WeightedEnsemble& ensemble) {
  require_two_samples(ensemble, "classical_relative_entropy");
  const BlockSums blocks = accumulate(ensemble.samples(), 2, [&](std::size_t s, Eigen::VectorXd& row) {
    row(0) = ensemble.weights[s];
    row(1) = ensemble.weights[s] * ensemble.fnl[s];
  });
  // The ensemble weights are exp(-scale F); the entropy of mu against mu_0
  // picks up the same scale in front of E_mu F.
  const double scale = ensemble.scale;
  const JackknifeResult jk = jackknife(blocks, [scale](const Eigen::VectorXd& m) {
    Eigen::VectorXd out(3);
    const double mean_f = m(1) / m(0);
    const double log_z = std::log(m(0));
    out << -scale * mean_f - log_z, mean_f, log_z;
    return out;
  });
  ClassicalEntropy out;
  out.relative_entropy = {jk.value(0), jk.se(0)};
  out.mean_fnl = {jk.value(1), jk.se(1)};
  out.log_zr = {jk.value(2), jk.se(2)};
  out.nonnegative = out.relative_entropy.value >= -3.0 * out.relative_entropy.se;
  return out;
}

double variational_residual(const WeightedEnsemble& ensemble) {
  const ClassicalEntropy h = classical_relative_entropy(ensemble);
  if (ensemble.scale != 1.0) {
    throw std::invalid_argument("variational_residual: defined for the measure itself (scale 1)");
  }
  return std::abs(-h.log_zr.value - (h.relative_entropy.value + h.mean_fnl.value));
}

Estimate variational_gap(const WeightedEnsemble& ensemble, double trial_scale) {
  require_two_samples(ensemble, "variational_gap");
  if (ensemble.scale != 1.0) {
    throw std::invalid_argument("variational_gap: expects the ensemble of the measure itself");
  }
  const BlockSums blocks = accumulate(ensemble.samples(), 3, [&](std::size_t s, Eigen::VectorXd& row) {
    const double f = ensemble.fnl[s];
    const double w = ensemble.weights[s];
    const double wt = std::exp(-trial_scale * f);
    row << w, wt, wt * f;
  });
  const JackknifeResult jk = jackknife(blocks, [trial_scale](const Eigen::VectorXd& m) {
    // Trial objective (1 - kappa) E_nu F - log z_kappa against the minimum -log z_r.
    const double objective = (1.0 - trial_scale) * m(2) / m(1) - std::log(m(1));
    Eigen::VectorXd out(1);
    out << objective + std::log(m(0));
    return out;
  });
  return {jk.value(0), jk.se(0)};
}

nlohmann::json classical_report(const WeightedEnsemble& ensemble, std::size_t k_max) {
  const Estimate zr = zr_estimate(ensemble);
  const ClassicalEntropy h = classical_relative_entropy(ensemble);
  nlohmann::json out;
  out["samples"] = ensemble.samples();
  out["modes"] = ensemble.field->modes();
  out["z_r"] = zr.value;
  out["se"] = zr.se;
  out["H_cl"] = h.relative_entropy.value;
  out["H_cl_se"] = h.relative_entropy.se;
  out["H_cl_nonnegative"] = h.nonnegative;
  out["E_F_NL"] = h.mean_fnl.value;
  out["E_F_NL_se"] = h.mean_fnl.se;
  out["ESS"] = effective_sample_size(ensemble.weights);
  out["variational_residual"] = variational_residual(ensemble);
  nlohmann::json dms = nlohmann::json::array();
  for (std::size_t k = 1; k <= k_max; ++k) {
    const MuDmEstimate dm = mu_dm_estimate(ensemble, k);
    nlohmann::json entry = dm_to_json(dm.estimate.mean);
    entry["se_real"] = matrix_to_json(dm.estimate.se_real);
    entry["se_imag"] = matrix_to_json(dm.estimate.se_imag);
    entry["ESS"] = dm.estimate.effective_samples;
    entry["degenerate"] = dm.degenerate;
    dms.push_back(std::move(entry));
  }
  out["gamma_mu"] = std::move(dms);
  return out;
}

}  // namespace gibbslab
