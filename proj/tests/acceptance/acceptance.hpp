#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gibbslab/limit_harness.hpp"

namespace gibbslab::acceptance {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

struct Options {
  std::size_t workers = 1;
};

/// Shares the default convergence sweep between the criteria that read it.
class Suite {
 public:
  explicit Suite(Options options = {});

  CriterionResult spectral_oracle();
  CriterionResult gaussian_covariance();
  CriterionResult wick_identity();
  CriterionResult free_rdm_closed_form();
  CriterionResult single_mode_end_to_end();
  CriterionResult finite_k_verdict();
  CriterionResult bound_suite();
  CriterionResult trotter_domination();
  CriterionResult variational_identities();
  CriterionResult reproducibility();

  /// All criteria in order; `on_result` is called as each one finishes.
  std::vector<CriterionResult> run_all(const std::function<void(const CriterionResult&)>& on_result = {});

  const ConvergenceReport& default_sweep();
  static SweepConfig default_sweep_config();

 private:
  Options options_;
  std::unique_ptr<ConvergenceReport> sweep_;
  double sweep_seconds_ = 0.0;
};

/// "[PASS] 3 wick identity: ..." (one line, no trailing newline).
std::string format(const CriterionResult& r);

}  // namespace gibbslab::acceptance
