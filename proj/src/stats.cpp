#include "gibbslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbslab {

Eigen::VectorXd BlockSums::total_means() const {
  return sums.colwise().sum().transpose() / counts.sum();
}

Eigen::VectorXd BlockSums::leave_out_means(std::size_t b) const {
  const auto row = static_cast<Eigen::Index>(b);
  return (sums.colwise().sum() - sums.row(row)).transpose() / (counts.sum() - counts(row));
}

std::size_t jackknife_block_count(std::size_t samples) {
  return std::min(samples, kJackknifeBlocks);
}

std::size_t jackknife_block_of(std::size_t s, std::size_t samples, std::size_t blocks) {
  return s * blocks / samples;
}

JackknifeResult jackknife(const BlockSums& blocks, const MeanMap& estimator) {
  const std::size_t B = blocks.blocks();
  if (B < 2) throw std::invalid_argument("jackknife: at least two blocks are required");
  JackknifeResult out;
  out.value = estimator(blocks.total_means());
  const Eigen::Index q = out.value.size();
  Eigen::MatrixXd replicas(static_cast<Eigen::Index>(B), q);
  for (std::size_t b = 0; b < B; ++b) {
    replicas.row(static_cast<Eigen::Index>(b)) = estimator(blocks.leave_out_means(b)).transpose();
  }
  const Eigen::RowVectorXd mean = replicas.colwise().mean();
  const double factor = static_cast<double>(B - 1) / static_cast<double>(B);
  out.se = ((replicas.rowwise() - mean).array().square().colwise().sum() * factor)
               .sqrt()
               .transpose();
  return out;
}

}  // namespace gibbslab
