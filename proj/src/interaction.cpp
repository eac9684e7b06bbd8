#include "gibbslab/interaction.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

InteractionSpec InteractionSpec::delta(double a) {
  InteractionSpec spec;
  spec.delta_mass = a;
  return spec;
}

InteractionSpec InteractionSpec::gaussian(double a, double amplitude, double width, const Grid1D& grid) {
  if (!(width > 0.0)) throw std::invalid_argument("InteractionSpec::gaussian: width must be positive");
  InteractionSpec spec;
  spec.delta_mass = a;
  spec.smooth.resize(grid.points());
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double x = static_cast<double>(k) * grid.spacing();
    spec.smooth[k] = amplitude * std::exp(-x * x / (2.0 * width * width));
  }
  spec.smooth_lp = 1.0;
  return spec;
}

bool InteractionSpec::is_zero() const {
  if (delta_mass != 0.0) return false;
  for (double v : smooth) {
    if (v != 0.0) return false;
  }
  return true;
}

InteractionSpec InteractionSpec::scaled(double factor) const {
  InteractionSpec out = *this;
  out.delta_mass *= factor;
  for (double& v : out.smooth) v *= factor;
  return out;
}

void InteractionSpec::validate(const Grid1D& grid) const {
  if (!(delta_mass >= 0.0) || !std::isfinite(delta_mass)) {
    throw std::invalid_argument("interaction: delta mass must be finite and nonnegative");
  }
  if (!smooth.empty() && smooth.size() != grid.points()) {
    throw std::invalid_argument("interaction: smooth part must be tabulated on all " +
                                std::to_string(grid.points()) + " grid offsets");
  }
  for (double v : smooth) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("interaction: smooth part must be finite and nonnegative");
    }
  }
  if (!(smooth_lp >= 1.0)) throw std::invalid_argument("interaction: L^p class needs p >= 1");
}

std::vector<std::string> InteractionSpec::warnings(double exponent_s) const {
  std::vector<std::string> out;
  if (smooth.empty() || exponent_s >= 2.0) return out;
  const double p_max = 1.0 / (2.0 - exponent_s);
  if (!(smooth_lp < p_max)) {
    std::ostringstream msg;
    msg << "smooth interaction declared in L^" << smooth_lp << " but s = " << exponent_s
        << " requires p < " << p_max;
    out.push_back(msg.str());
  }
  return out;
}

double InteractionSpec::smooth_norm(const Grid1D& grid, double p) const {
  if (smooth.empty()) return 0.0;
  double sum = std::pow(std::abs(smooth[0]), p);
  for (std::size_t k = 1; k < smooth.size(); ++k) sum += 2.0 * std::pow(std::abs(smooth[k]), p);
  return std::pow(sum * grid.spacing(), 1.0 / p);
}

InteractionTensor::InteractionTensor(std::size_t modes, std::vector<double> values)
    : modes_(modes), values_(std::move(values)) {
  if (values_.size() != modes_ * modes_ * modes_ * modes_) {
    throw std::invalid_argument("InteractionTensor: expected K^4 values");
  }
}

bool InteractionTensor::is_zero() const {
  for (double v : values_) {
    if (v != 0.0) return false;
  }
  return true;
}

double InteractionTensor::symmetry_defect() const {
  const std::size_t K = modes_;
  const auto& W = *this;
  double defect = 0.0;
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = 0; n < K; ++n)
      for (std::size_t p = 0; p < K; ++p)
        for (std::size_t q = 0; q < K; ++q) {
          const double v = W(m, n, p, q);
          defect = std::max(defect, std::abs(v - W(n, m, q, p)));
          defect = std::max(defect, std::abs(v - W(p, q, m, n)));
          defect = std::max(defect, std::abs(v - W(p, n, m, q)));
        }
  return defect;
}

InteractionTensor InteractionTensor::truncated(std::size_t K) const {
  if (K > modes_) throw std::invalid_argument("InteractionTensor::truncated: K exceeds the tensor size");
  std::vector<double> out;
  out.reserve(K * K * K * K);
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = 0; n < K; ++n)
      for (std::size_t p = 0; p < K; ++p)
        for (std::size_t q = 0; q < K; ++q) out.push_back((*this)(m, n, p, q));
  return InteractionTensor(K, std::move(out));
}

namespace {

// (w2 * f)(x_i) = sum_j w2(x_i - x_j) f(x_j) dx.
Eigen::VectorXd convolve(const std::vector<double>& smooth, const Eigen::VectorXd& f, double dx) {
  const Eigen::Index M = f.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < M; ++j) acc += smooth[static_cast<std::size_t>(std::abs(i - j))] * f(j);
    out(i) = acc * dx;
  }
  return out;
}

}  // namespace

InteractionTensor interaction_tensor(const SpectralDecomposition& spectrum,
                                     const InteractionSpec& interaction) {
  const Grid1D& grid = spectrum.grid();
  interaction.validate(grid);
  const std::size_t K = spectrum.size();
  const double dx = grid.spacing();
  const Eigen::MatrixXd& u = spectrum.eigenvectors();

  // Pair densities g_{mp} = u_m u_p and their convolutions with w2.
  std::vector<Eigen::VectorXd> pair(K * K);
  std::vector<Eigen::VectorXd> smeared(K * K);
  for (std::size_t m = 0; m < K; ++m) {
    for (std::size_t p = 0; p < K; ++p) {
      pair[m * K + p] = u.col(static_cast<Eigen::Index>(m)).cwiseProduct(u.col(static_cast<Eigen::Index>(p)));
    }
  }
  const bool has_smooth = !interaction.smooth.empty();
  if (has_smooth) {
    for (std::size_t m = 0; m < K; ++m) {
      for (std::size_t p = m; p < K; ++p) {
        smeared[m * K + p] = convolve(interaction.smooth, pair[m * K + p], dx);
        smeared[p * K + m] = smeared[m * K + p];
      }
    }
  }

  std::vector<double> values(K * K * K * K, 0.0);
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = 0; n < K; ++n)
      for (std::size_t p = 0; p < K; ++p)
        for (std::size_t q = 0; q < K; ++q) {
          const Eigen::VectorXd& g_mp = pair[m * K + p];
          const Eigen::VectorXd& g_nq = pair[n * K + q];
          double v = 0.0;
          if (interaction.delta_mass != 0.0) v += interaction.delta_mass * g_mp.dot(g_nq) * dx;
          if (has_smooth) v += g_mp.dot(smeared[n * K + q]) * dx;
          values[((m * K + n) * K + p) * K + q] = v;
        }
  return InteractionTensor(K, std::move(values));
}

double f_nl(const Eigen::VectorXcd& grid_function, const Grid1D& grid, const InteractionSpec& interaction) {
  if (static_cast<std::size_t>(grid_function.size()) != grid.points()) {
    throw std::invalid_argument("f_nl: grid function does not match the grid");
  }
  if (!grid_function.allFinite()) throw std::invalid_argument("f_nl: grid function is not finite");
  const double dx = grid.spacing();
  const Eigen::VectorXd density = grid_function.cwiseAbs2();
  double value = 0.5 * interaction.delta_mass * density.squaredNorm() * dx;
  if (!interaction.smooth.empty()) {
    value += 0.5 * density.dot(convolve(interaction.smooth, density, dx)) * dx;
  }
  return value;
}

double f_nl_modes(const Eigen::VectorXcd& alpha, const InteractionTensor& tensor) {
  const std::size_t K = tensor.modes();
  if (static_cast<std::size_t>(alpha.size()) != K) {
    throw std::invalid_argument("f_nl_modes: coefficient length does not match the tensor");
  }
  // (1/2) sum_{m,n,p,q} W conj(a_m) conj(a_n) a_p a_q = (1/2) sum_{mp,nq} W rho_{mp} rho_{nq}
  // with rho_{mp} = conj(a_m) a_p.
  std::complex<double> acc = 0.0;
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t p = 0; p < K; ++p) {
      const std::complex<double> rho_mp = std::conj(alpha(static_cast<Eigen::Index>(m))) * alpha(static_cast<Eigen::Index>(p));
      for (std::size_t n = 0; n < K; ++n)
        for (std::size_t q = 0; q < K; ++q) {
          const std::complex<double> rho_nq = std::conj(alpha(static_cast<Eigen::Index>(n))) * alpha(static_cast<Eigen::Index>(q));
          acc += tensor(m, n, p, q) * rho_mp * rho_nq;
        }
    }
  return 0.5 * acc.real();
}

double interaction_free_trace(const InteractionTensor& tensor, const Eigen::VectorXd& eigenvalues) {
  const std::size_t K = tensor.modes();
  if (static_cast<std::size_t>(eigenvalues.size()) < K) {
    throw std::invalid_argument("interaction_free_trace: fewer eigenvalues than modes");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = 0; n < K; ++n) {
      sum += tensor(m, n, m, n) / (eigenvalues(static_cast<Eigen::Index>(m)) * eigenvalues(static_cast<Eigen::Index>(n)));
    }
  return sum;
}

}  // namespace gibbslab
