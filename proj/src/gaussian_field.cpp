#include "gibbslab/gaussian_field.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/parallel.hpp"

namespace gibbslab {

FieldEnsemble::FieldEnsemble(std::uint64_t seed, Eigen::VectorXd eigenvalues, Eigen::MatrixXcd samples)
    : seed_(seed), eigenvalues_(std::move(eigenvalues)), coefficients_(std::move(samples)) {
  if (coefficients_.rows() < 1) throw std::invalid_argument("FieldEnsemble: at least one sample");
  if (coefficients_.cols() != eigenvalues_.size()) {
    throw std::invalid_argument("FieldEnsemble: mode count does not match the spectrum");
  }
  if (!coefficients_.allFinite()) throw std::invalid_argument("FieldEnsemble: non-finite sample");
}

namespace {

void check_modes(const SpectralDecomposition& spectrum, std::size_t K) {
  if (K == 0 || K > spectrum.size()) {
    throw std::invalid_argument("gaussian field: K=" + std::to_string(K) +
                                " exceeds the spectrum size " + std::to_string(spectrum.size()));
  }
}

template <class Row>
void draw(Row&& out, const Eigen::VectorXd& lambda, Rng& rng, std::normal_distribution<double>& normal) {
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double g1 = normal(rng);
    const double g2 = normal(rng);
    out(j) = std::complex<double>(g1, g2) / std::sqrt(2.0 * lambda(j));
  }
}

Rng chunk_engine(std::uint64_t seed, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return Rng(seq);
}

}  // namespace

ModeCoefficients sample_mu0(const SpectralDecomposition& spectrum, std::size_t K, Rng& rng) {
  check_modes(spectrum, K);
  const Eigen::VectorXd lambda = spectrum.eigenvalues().head(static_cast<Eigen::Index>(K));
  Eigen::RowVectorXcd row(static_cast<Eigen::Index>(K));
  std::normal_distribution<double> normal;
  draw(row, lambda, rng, normal);
  return {row.transpose()};
}

FieldEnsemble sample_ensemble(const SpectralDecomposition& spectrum, std::size_t K,
                              std::size_t samples, std::uint64_t seed, std::size_t workers) {
  check_modes(spectrum, K);
  if (samples == 0) throw std::invalid_argument("sample_ensemble: S must be at least 1");
  const Eigen::VectorXd lambda = spectrum.eigenvalues().head(static_cast<Eigen::Index>(K));
  Eigen::MatrixXcd coeffs(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(K));
  const std::size_t chunks = (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng = chunk_engine(seed, c);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(samples, (c + 1) * kSamplesPerChunk);
    for (std::size_t s = c * kSamplesPerChunk; s < end; ++s) {
      draw(coeffs.row(static_cast<Eigen::Index>(s)), lambda, rng, normal);
    }
  });
  return FieldEnsemble(seed, lambda, std::move(coeffs));
}

Eigen::VectorXcd to_grid(const ModeCoefficients& coeffs, const SpectralDecomposition& spectrum) {
  const auto K = coeffs.alpha.size();
  if (static_cast<std::size_t>(K) > spectrum.size()) {
    throw std::invalid_argument("to_grid: more coefficients than modes");
  }
  return spectrum.eigenvectors().leftCols(K).cast<std::complex<double>>() * coeffs.alpha;
}

double sobolev_norm(const ModeCoefficients& coeffs, const Eigen::VectorXd& eigenvalues, double t) {
  double sum = 0.0;
  for (Eigen::Index n = 0; n < coeffs.alpha.size(); ++n) {
    sum += std::pow(eigenvalues(n), t) * std::norm(coeffs.alpha(n));
  }
  return sum;
}

double lr_norm(const Eigen::VectorXcd& grid_function, const Grid1D& grid, double r) {
  if (!(r >= 2.0)) throw std::invalid_argument("lr_norm: r must be at least 2");
  if (static_cast<std::size_t>(grid_function.size()) != grid.points()) {
    throw std::invalid_argument("lr_norm: grid function does not match the grid");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < grid_function.size(); ++i) {
    sum += std::pow(std::abs(grid_function(i)), r);
  }
  return std::pow(sum * grid.spacing(), 1.0 / r);
}

ReducedDM free_dm_exact(const Eigen::VectorXd& eigenvalues, std::size_t k) {
  if (k < 1 || k > 3) throw std::invalid_argument("free_dm_exact: k must be 1, 2 or 3");
  SymmetricBasis basis(static_cast<std::size_t>(eigenvalues.size()), k);
  const double k_factorial = std::tgamma(static_cast<double>(k) + 1.0);
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const Occupation& nu = basis.state(static_cast<std::size_t>(a));
    double v = k_factorial;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      v *= std::pow(eigenvalues(static_cast<Eigen::Index>(i)), -nu[i]);
    }
    m(a, a) = v;
  }
  return ReducedDM(std::move(basis), std::move(m), Provenance::exact_free);
}

DmEstimate empirical_dm(const FieldEnsemble& ensemble, std::optional<std::span<const double>> weights,
                        std::size_t k) {
  if (k < 1 || k > 3) throw std::invalid_argument("empirical_dm: k must be 1, 2 or 3");
  const std::size_t S = ensemble.samples();
  if (weights) {
    if (weights->size() != S) throw std::invalid_argument("empirical_dm: weight count mismatch");
    double total = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("empirical_dm: weights must be finite and nonnegative");
      }
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("empirical_dm: all weights are zero");
  }

  SymmetricBasis basis(ensemble.modes(), k);
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  // Observables: weight, then Re and Im of w c_a conj(c_b) for a <= b.
  const Eigen::Index pairs = d * (d + 1) / 2;
  const Eigen::Index P = 1 + 2 * pairs;
  const std::size_t B = jackknife_block_count(S);

  BlockSums blocks{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), P),
                   Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B))};
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double w = weights ? (*weights)[s] : 1.0;
    sum_w += w;
    sum_w2 += w * w;
    const auto b = static_cast<Eigen::Index>(jackknife_block_of(s, S, B));
    blocks.counts(b) += 1.0;
    if (w == 0.0) continue;
    const Eigen::VectorXcd c = symmetric_tensor_power(ensemble.sample(s), basis);
    auto row = blocks.sums.row(b);
    row(0) += w;
    Eigen::Index p = 0;
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index bb = a; bb < d; ++bb, ++p) {
        const std::complex<double> v = w * c(a) * std::conj(c(bb));
        row(1 + 2 * p) += v.real();
        row(2 + 2 * p) += v.imag();
      }
    }
  }

  const MeanMap ratio = [P](const Eigen::VectorXd& means) {
    Eigen::VectorXd out(P - 1);
    for (Eigen::Index j = 1; j < P; ++j) out(j - 1) = means(j) / means(0);
    return out;
  };

  Eigen::VectorXd value;
  Eigen::VectorXd se;
  if (B >= 2) {
    JackknifeResult jk = jackknife(blocks, ratio);
    value = std::move(jk.value);
    se = std::move(jk.se);
  } else {
    value = ratio(blocks.total_means());
    se = Eigen::VectorXd::Zero(P - 1);
  }

  Eigen::MatrixXcd mean(d, d);
  Eigen::MatrixXd se_re(d, d);
  Eigen::MatrixXd se_im(d, d);
  Eigen::Index p = 0;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index bb = a; bb < d; ++bb, ++p) {
      const std::complex<double> v(value(2 * p), value(2 * p + 1));
      mean(a, bb) = v;
      mean(bb, a) = std::conj(v);
      se_re(a, bb) = se_re(bb, a) = se(2 * p);
      se_im(a, bb) = se_im(bb, a) = se(2 * p + 1);
    }
    mean(a, a) = mean(a, a).real();
  }
  return DmEstimate{ReducedDM(std::move(basis), std::move(mean), Provenance::classical), se_re, se_im,
                    sum_w * sum_w / sum_w2};
}

void write_ensemble_csv(std::ostream& os, const FieldEnsemble& ensemble) {
  os.precision(17);
  os << "sample_id,mode,re,im\n";
  const Eigen::MatrixXcd& c = ensemble.coefficients();
  for (Eigen::Index s = 0; s < c.rows(); ++s) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      os << s << ',' << j << ',' << c(s, j).real() << ',' << c(s, j).imag() << '\n';
    }
  }
}

FieldEnsemble read_ensemble_csv(std::istream& is, std::uint64_t seed, Eigen::VectorXd eigenvalues) {
  std::string line;
  if (!std::getline(is, line) || line != "sample_id,mode,re,im") {
    throw std::runtime_error("read_ensemble_csv: missing header");
  }
  struct Row {
    long s, j;
    double re, im;
  };
  std::vector<Row> rows;
  long max_s = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r{};
    char c1, c2, c3;
    if (!(ls >> r.s >> c1 >> r.j >> c2 >> r.re >> c3 >> r.im)) {
      throw std::runtime_error("read_ensemble_csv: malformed row '" + line + "'");
    }
    if (r.j < 0 || r.j >= eigenvalues.size() || r.s < 0) {
      throw std::runtime_error("read_ensemble_csv: index out of range in '" + line + "'");
    }
    max_s = std::max(max_s, r.s);
    rows.push_back(r);
  }
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(max_s + 1, eigenvalues.size());
  for (const Row& r : rows) c(r.s, r.j) = {r.re, r.im};
  return FieldEnsemble(seed, std::move(eigenvalues), std::move(c));
}

}  // namespace gibbslab
