#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace gibbslab {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

inline constexpr std::size_t kJackknifeBlocks = 50;

/// Per-block sums of several observables over contiguous sample blocks.
/// Row b holds the sums of block b, column j the observable j.
struct BlockSums {
  Eigen::MatrixXd sums;
  Eigen::VectorXd counts;

  std::size_t blocks() const { return static_cast<std::size_t>(sums.rows()); }
  Eigen::VectorXd total_means() const;
  /// Means with block b left out.
  Eigen::VectorXd leave_out_means(std::size_t b) const;
};

/// Number of blocks used for S samples: min(S, 50).
std::size_t jackknife_block_count(std::size_t samples);
/// Block containing sample s when S samples are split into `blocks` contiguous blocks.
std::size_t jackknife_block_of(std::size_t s, std::size_t samples, std::size_t blocks);

using MeanMap = std::function<Eigen::VectorXd(const Eigen::VectorXd& means)>;

struct JackknifeResult {
  Eigen::VectorXd value;  // estimator on the full sample
  Eigen::VectorXd se;     // delete-one-block jackknife standard error
};

/// Jackknife of a smooth function of observable means (ratio estimators etc).
JackknifeResult jackknife(const BlockSums& blocks, const MeanMap& estimator);

}  // namespace gibbslab
