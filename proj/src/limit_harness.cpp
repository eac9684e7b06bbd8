#include "gibbslab/limit_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gibbslab/parallel.hpp"
#include "gibbslab/report.hpp"
#include "gibbslab/stats.hpp"

namespace gibbslab {

namespace {

void check_same_basis(const ReducedDM& a, const ReducedDM& b, const char* who) {
  if (a.k != b.k || !(a.basis == b.basis)) {
    throw std::invalid_argument(std::string(who) + ": density matrices live on different bases");
  }
}

double factorial(std::size_t k) { return std::tgamma(static_cast<double>(k) + 1.0); }

}  // namespace

double hs_distance(const ReducedDM& a, const ReducedDM& b) {
  check_same_basis(a, b, "hs_distance");
  return (a.matrix - b.matrix).norm();
}

double schatten_p_distance(const ReducedDM& a, const ReducedDM& b, double p) {
  check_same_basis(a, b, "schatten_p_distance");
  if (!(p >= 1.0)) throw std::invalid_argument("schatten_p_distance: p must be at least 1");
  const Eigen::MatrixXcd diff = a.matrix - b.matrix;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues();
  return std::pow(sv.array().pow(p).sum(), 1.0 / p);
}

void SweepConfig::validate() const {
  if (temperatures.size() < 3) throw std::invalid_argument("sweep: at least three temperatures are required");
  for (std::size_t j = 0; j < temperatures.size(); ++j) {
    if (!(temperatures[j] > 0.0)) throw std::invalid_argument("sweep: temperatures must be positive");
    if (j > 0 && !(temperatures[j] > temperatures[j - 1])) {
      throw std::invalid_argument("sweep: temperatures must be strictly increasing");
    }
  }
  if (modes < 1) throw std::invalid_argument("sweep: K must be at least 1");
  if (samples < 2) throw std::invalid_argument("sweep: at least two samples are required");
  if (kernel_subgrid < 1) throw std::invalid_argument("sweep: kernel sub-grid needs at least one point");
}

QuantumPoint quantum_point(const Eigen::VectorXd& eigenvalues, const InteractionTensor& tensor,
                           double temperature, double coupling, double tail_target, std::size_t workers) {
  const std::size_t N = std::max<std::size_t>(2, choose_cutoff(eigenvalues, temperature, tail_target / 10.0));
  auto basis = std::make_shared<const OccupationBasis>(static_cast<std::size_t>(eigenvalues.size()), N);
  FockOperator h0 = build_hamiltonian_fock(basis, eigenvalues, tensor, 0.0, workers);
  FockOperator hl = build_hamiltonian_fock(basis, eigenvalues, tensor, coupling, workers);
  GibbsEnsemble g0 = gibbs_state(h0, temperature, 0.0, workers);
  GibbsEnsemble gl = gibbs_state(hl, temperature, coupling, workers);
  ReducedDM f1 = reduced_dm(g0.state, 1);
  ReducedDM f2 = reduced_dm(g0.state, 2);
  ReducedDM r1 = reduced_dm(gl.state, 1);
  ReducedDM r2 = reduced_dm(gl.state, 2);
  return QuantumPoint{temperature,   coupling,      std::move(basis), std::move(h0), std::move(hl),
                      std::move(g0), std::move(gl), std::move(f1),    std::move(f2), std::move(r1),
                      std::move(r2)};
}

std::vector<std::size_t> kernel_subgrid(const Grid1D& grid, std::size_t count, double window) {
  std::vector<std::size_t> out;
  if (count == 1) {
    out.push_back(grid.nearest_index(0.0));
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double x = -window + 2.0 * window * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(grid.nearest_index(x));
  }
  return out;
}

KernelDomination kernel_domination_report(const QuantumPoint& point, const SpectralDecomposition& spectrum,
                                          const std::vector<std::size_t>& subgrid, double tolerance) {
  const auto K = static_cast<Eigen::Index>(point.basis->modes());
  KernelDomination r{};
  r.constant = std::exp(point.free_ensemble.log_partition - point.interacting.log_partition);

  const Eigen::MatrixXd modes = spectrum.eigenvectors().leftCols(K);
  const Eigen::MatrixXd g1 = position_kernel(point.rdm1, modes);
  const Eigen::MatrixXd f1 = position_kernel(point.free_rdm1, modes);
  r.violation_k1 = (g1 - r.constant * f1).maxCoeff();
  r.floor_k1 = g1.minCoeff();

  Eigen::MatrixXd sub(static_cast<Eigen::Index>(subgrid.size()), K);
  for (std::size_t i = 0; i < subgrid.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = modes.row(static_cast<Eigen::Index>(subgrid[i]));
  const Eigen::MatrixXd g2 = position_kernel(point.rdm2, sub);
  const Eigen::MatrixXd f2 = position_kernel(point.free_rdm2, sub);
  r.violation_k2 = (g2 - r.constant * f2).maxCoeff();
  r.floor_k2 = g2.minCoeff();

  r.passed = r.violation_k1 <= tolerance && r.violation_k2 <= tolerance && r.floor_k1 >= -tolerance &&
             r.floor_k2 >= -tolerance;
  return r;
}

BoundsRecord bounds_report(const QuantumPoint& point, const SpectralDecomposition& spectrum,
                           const InteractionTensor& tensor, double classical_entropy, const SweepConfig& config) {
  const double T = point.temperature;
  const std::size_t K = point.basis->modes();
  const Eigen::VectorXd lambda = spectrum.eigenvalues().head(static_cast<Eigen::Index>(K));
  BoundsRecord b{};

  b.partition = partition_ratio(point.interacting, point.free_ensemble, point.free_hamiltonian,
                                point.interacting_hamiltonian, tensor, lambda);
  b.partition_upper = std::exp(b.partition.trace_bound);
  const double inverse_ratio = 1.0 / b.partition.ratio;
  b.partition_ok = b.partition.within_bounds && inverse_ratio >= 1.0 - 1e-12 &&
                   inverse_ratio <= b.partition_upper * (1.0 + 1e-12);

  const double inv_sq = lambda.array().pow(-2.0).sum();
  const ReducedDM* rdms[2] = {&point.rdm1, &point.rdm2};
  b.hs_ok = true;
  for (int k = 1; k <= 2; ++k) {
    b.hs_lhs[k - 1] = std::pow(T, -2.0 * k) * rdms[k - 1]->matrix.squaredNorm();
    b.hs_rhs[k - 1] = inverse_ratio * inverse_ratio * std::pow(inv_sq, k);
    b.hs_ok = b.hs_ok && b.hs_lhs[k - 1] <= b.hs_rhs[k - 1];
  }

  const Eigen::VectorXd root = lambda.array().sqrt();
  const Eigen::MatrixXd scaled = root.asDiagonal() * point.rdm1.matrix.real() * root.asDiagonal() / T;
  b.operator_radius = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(scaled, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .cwiseAbs()
                          .maxCoeff();
  b.operator_constant = inverse_ratio * std::numbers::e;
  b.operator_ok = b.operator_radius <= b.operator_constant;

  b.kernel = kernel_domination_report(
      point, spectrum, kernel_subgrid(spectrum.grid(), config.kernel_subgrid, config.kernel_window),
      config.tolerance.kernel);

  b.quantum_entropy = quantum_relative_entropy(point.interacting.state, point.free_ensemble.state);
  const double interaction_energy = point.interacting.state.expectation(point.interacting_hamiltonian) -
                                    point.interacting.state.expectation(point.free_hamiltonian);
  b.identity_residual = std::abs(b.partition.neg_log_ratio - (b.quantum_entropy + interaction_energy / T));
  b.identity_ok = b.identity_residual < config.tolerance.identity;
  b.classical_entropy = classical_entropy;
  b.entropy_ok = b.quantum_entropy >= config.tolerance.entropy_floor &&
                 b.classical_entropy >= config.tolerance.entropy_floor;
  return b;
}

bool ConvergenceReport::passed() const {
  return certified.passed && monotone_d1.passed && monotone_d2.passed && gap_decreasing.passed &&
         final_gap.passed && bounds.passed;
}

nlohmann::json sweep_config_json(const SweepConfig& c) {
  nlohmann::json j;
  j["L"] = c.half_width;
  j["M"] = c.grid_points;
  j["s"] = c.potential.exponent;
  j["c"] = c.potential.strength;
  j["a"] = c.interaction.delta_mass;
  j["smooth_interaction"] = !c.interaction.smooth.empty();
  j["K"] = c.modes;
  j["T"] = c.temperatures;
  j["S"] = c.samples;
  j["seed"] = c.seed;
  j["kernel_subgrid"] = c.kernel_subgrid;
  j["kernel_window"] = c.kernel_window;
  j["tolerance"] = {{"tail_mass", c.tolerance.tail_mass},   {"min_ess", c.tolerance.min_ess},
                    {"identity", c.tolerance.identity},     {"kernel", c.tolerance.kernel},
                    {"entropy_floor", c.tolerance.entropy_floor}, {"monotone_se", c.tolerance.monotone_se},
                    {"gap_se", c.tolerance.gap_se}};
  return j;
}

namespace {

// Observables per sample: weight, then Re/Im of w c c^H for k = 1 and k = 2.
struct MomentLayout {
  Eigen::Index d1, d2;
  Eigen::Index size() const { return 1 + 2 * d1 * d1 + 2 * d2 * d2; }
  Eigen::Index offset(int k) const { return k == 1 ? 1 : 1 + 2 * d1 * d1; }
};

Eigen::MatrixXcd unpack(const Eigen::VectorXd& means, Eigen::Index offset, Eigen::Index d) {
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a) {
      const Eigen::Index p = offset + 2 * (a + d * b);
      m(a, b) = {means(p) / means(0), means(p + 1) / means(0)};
    }
  return m;
}

std::string format_list(const std::vector<std::string>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "; " : "") << items[i];
  return os.str();
}

}  // namespace

ConvergenceReport convergence_sweep(const SweepConfig& config) {
  config.validate();
  const Grid1D grid(config.half_width, config.grid_points);
  const SpectralDecomposition spectrum = eigensolve(build_hamiltonian(grid, config.potential), config.modes);
  const InteractionTensor tensor = interaction_tensor(spectrum, config.interaction);
  const Eigen::VectorXd lambda = spectrum.eigenvalues();

  auto field = std::make_shared<const FieldEnsemble>(
      sample_ensemble(spectrum, config.modes, config.samples, config.seed, config.workers));
  const WeightedEnsemble weighted = build_ensemble(field, tensor, 1.0, config.workers);
  const Estimate zr = zr_estimate(weighted);
  const ClassicalEntropy h_cl = classical_relative_entropy(weighted);
  const double ess = effective_sample_size(weighted.weights);

  const SymmetricBasis b1(config.modes, 1), b2(config.modes, 2);
  const MomentLayout layout{static_cast<Eigen::Index>(b1.dimension()), static_cast<Eigen::Index>(b2.dimension())};
  const std::size_t S = field->samples();
  const std::size_t B = jackknife_block_count(S);
  BlockSums blocks{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), layout.size()),
                   Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B))};
  for (std::size_t s = 0; s < S; ++s) {
    const auto blk = static_cast<Eigen::Index>(jackknife_block_of(s, S, B));
    const double w = weighted.weights[s];
    blocks.counts(blk) += 1.0;
    auto row = blocks.sums.row(blk);
    row(0) += w;
    const Eigen::VectorXcd alpha = field->sample(s);
    for (int k = 1; k <= 2; ++k) {
      const Eigen::VectorXcd c = symmetric_tensor_power(alpha, k == 1 ? b1 : b2);
      const Eigen::Index d = c.size();
      const Eigen::Index off = layout.offset(k);
      for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index a = 0; a < d; ++a) {
          const std::complex<double> v = w * c(a) * std::conj(c(b));
          row(off + 2 * (a + d * b)) += v.real();
          row(off + 2 * (a + d * b) + 1) += v.imag();
        }
    }
  }

  // Each temperature keeps only what the report needs; the Fock data is dropped.
  struct PointSummary {
    TemperatureRecord record;
    Eigen::MatrixXcd q1, q2;  // k!/T^k Gamma^(k)
  };
  const std::size_t J = config.temperatures.size();
  std::vector<PointSummary> summaries(J);
  parallel_for(J, config.workers, [&](std::size_t j) {
    const double T = config.temperatures[j];
    const QuantumPoint pt = quantum_point(lambda, tensor, T, 1.0 / T, config.tolerance.tail_mass);
    TemperatureRecord& r = summaries[j].record;
    r.temperature = T;
    r.coupling = pt.coupling;
    r.max_particles = pt.basis->max_particles();
    r.bounds = bounds_report(pt, spectrum, tensor, h_cl.relative_entropy.value, config);
    r.tail_mass = std::max(truncation_diagnostic(pt.interacting.state), truncation_diagnostic(pt.free_ensemble.state));
    r.number_moment = number_moment(pt.interacting.state, T, 1);
    summaries[j].q1 = pt.rdm1.matrix / T;
    summaries[j].q2 = pt.rdm2.matrix * (factorial(2) / (T * T));
  });
  std::vector<Eigen::MatrixXcd> q1(J), q2(J);
  for (std::size_t j = 0; j < J; ++j) {
    q1[j] = summaries[j].q1;
    q2[j] = summaries[j].q2;
  }
  const auto J_ = static_cast<Eigen::Index>(J);
  const MeanMap distances = [&](const Eigen::VectorXd& means) {
    const Eigen::MatrixXcd g1 = unpack(means, layout.offset(1), layout.d1);
    const Eigen::MatrixXcd g2 = unpack(means, layout.offset(2), layout.d2);
    Eigen::VectorXd out(4 * J_ - 2);
    for (Eigen::Index j = 0; j < J_; ++j) {
      out(j) = (q1[static_cast<std::size_t>(j)] - g1).norm();
      out(J_ + j) = (q2[static_cast<std::size_t>(j)] - g2).norm();
    }
    for (Eigen::Index j = 0; j + 1 < J_; ++j) {
      out(2 * J_ + j) = out(j + 1) - out(j);
      out(3 * J_ - 1 + j) = out(J_ + j + 1) - out(J_ + j);
    }
    return out;
  };
  const JackknifeResult jk = jackknife(blocks, distances);
  const Eigen::MatrixXcd gamma1 = unpack(blocks.total_means(), layout.offset(1), layout.d1);
  const Eigen::MatrixXcd gamma2 = unpack(blocks.total_means(), layout.offset(2), layout.d2);
  const ReducedDM mu1(b1, gamma1, Provenance::classical);
  const ReducedDM mu2(b2, gamma2, Provenance::classical);

  ConvergenceReport report;
  report.config = sweep_config_json(config);
  report.variational_residual = variational_residual(weighted);
  const double ps[3] = {1.0, 1.5, 2.0};
  for (std::size_t j = 0; j < J; ++j) {
    TemperatureRecord r = summaries[j].record;
    r.ratio = r.bounds.partition.ratio;
    r.neg_log_ratio = r.bounds.partition.neg_log_ratio;
    r.zr = zr.value;
    r.zr_se = zr.se;
    const auto jj = static_cast<Eigen::Index>(j);
    r.d1 = jk.value(jj);
    r.d1_se = jk.se(jj);
    r.d2 = jk.value(J_ + jj);
    r.d2_se = jk.se(J_ + jj);
    const ReducedDM s1(b1, q1[j], Provenance::quantum), s2(b2, q2[j], Provenance::quantum);
    for (int p = 0; p < 3; ++p) {
      r.schatten1[p] = schatten_p_distance(s1, mu1, ps[p]);
      r.schatten2[p] = schatten_p_distance(s2, mu2, ps[p]);
    }
    r.ess = ess;
    r.certified = r.tail_mass < config.tolerance.tail_mass && r.ess >= config.tolerance.min_ess;
    report.records.push_back(r);
  }
  for (std::size_t j = 0; j + 1 < J; ++j) {
    report.d1_step_se.push_back(jk.se(2 * J_ + static_cast<Eigen::Index>(j)));
    report.d2_step_se.push_back(jk.se(3 * J_ - 1 + static_cast<Eigen::Index>(j)));
  }

  std::vector<std::string> uncertified;
  for (const auto& r : report.records) {
    if (!r.certified) {
      std::ostringstream os;
      os << "T=" << r.temperature << " tail=" << r.tail_mass << " ESS=" << r.ess;
      uncertified.push_back(os.str());
    }
  }
  report.certified = {uncertified.empty(), uncertified.empty() ? "all records certified"
                                                                : "uncertified: " + format_list(uncertified)};

  const auto monotone = [&](int k) {
    std::vector<std::string> bad;
    const auto& step_se = k == 1 ? report.d1_step_se : report.d2_step_se;
    for (std::size_t j = 0; j + 1 < J; ++j) {
      const double step = k == 1 ? report.records[j + 1].d1 - report.records[j].d1
                                 : report.records[j + 1].d2 - report.records[j].d2;
      if (step > config.tolerance.monotone_se * step_se[j]) {
        std::ostringstream os;
        os << "d" << k << " rises by " << step << " (SE " << step_se[j] << ") from T=" << config.temperatures[j]
           << " to T=" << config.temperatures[j + 1];
        bad.push_back(os.str());
      }
    }
    std::ostringstream ok;
    ok << "d" << k << " non-increasing within " << config.tolerance.monotone_se << " SE";
    return Verdict{bad.empty(), bad.empty() ? ok.str() : format_list(bad)};
  };
  report.monotone_d1 = monotone(1);
  report.monotone_d2 = monotone(2);

  std::vector<std::string> rising;
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double g0 = std::abs(report.records[j].ratio - zr.value);
    const double g1 = std::abs(report.records[j + 1].ratio - zr.value);
    if (g1 > g0 + zr.se) {
      std::ostringstream os;
      os << "|ratio - z_r| rises from " << g0 << " to " << g1 << " at T=" << config.temperatures[j + 1];
      rising.push_back(os.str());
    }
  }
  report.gap_decreasing = {rising.empty(), rising.empty() ? "|ratio - z_r| non-increasing" : format_list(rising)};

  const TemperatureRecord& last = report.records.back();
  const double final_gap = std::abs(last.ratio - zr.value);
  const double allowed = config.tolerance.gap_se * zr.se + config.tolerance.tail_mass;
  {
    std::ostringstream os;
    os << "|ratio - z_r| = " << final_gap << " at T=" << last.temperature << ", allowed " << allowed << " ("
       << config.tolerance.gap_se << " SE = " << config.tolerance.gap_se * zr.se << " + tail tolerance " << config.tolerance.tail_mass
       << ")";
    report.final_gap = {final_gap < allowed, os.str()};
  }

  std::vector<std::string> broken;
  for (const auto& r : report.records) {
    const BoundsRecord& b = r.bounds;
    std::ostringstream os;
    os << "T=" << r.temperature << ":";
    bool any = false;
    const auto flag = [&](bool ok, const char* name) {
      if (!ok) {
        os << ' ' << name;
        any = true;
      }
    };
    flag(b.partition_ok, "partition");
    flag(b.hs_ok, "hilbert-schmidt");
    flag(b.operator_ok, "one-body-operator");
    flag(b.kernel.passed, "kernel-domination");
    flag(b.identity_ok, "free-energy-identity");
    flag(b.entropy_ok, "relative-entropy");
    if (any) broken.push_back(os.str());
  }
  report.bounds = {broken.empty(), broken.empty() ? "all bounds hold" : format_list(broken)};
  return report;
}

nlohmann::json ConvergenceReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config;
  j["variational_residual"] = variational_residual;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    const BoundsRecord& b = r.bounds;
    nlohmann::json e;
    e["T"] = r.temperature;
    e["lambda"] = r.coupling;
    e["N_max"] = r.max_particles;
    e["ratio"] = r.ratio;
    e["neg_log_ratio"] = r.neg_log_ratio;
    e["zr"] = r.zr;
    e["zr_se"] = r.zr_se;
    e["d1"] = r.d1;
    e["d1_se"] = r.d1_se;
    e["d2"] = r.d2;
    e["d2_se"] = r.d2_se;
    e["schatten_k1"] = {{"p1", r.schatten1[0]}, {"p1.5", r.schatten1[1]}, {"p2", r.schatten1[2]}};
    e["schatten_k2"] = {{"p1", r.schatten2[0]}, {"p1.5", r.schatten2[1]}, {"p2", r.schatten2[2]}};
    e["tail_mass"] = r.tail_mass;
    e["ess"] = r.ess;
    e["number_moment"] = r.number_moment;
    e["certified"] = r.certified;
    e["bounds"] = {
        {"partition",
         {{"inverse_ratio", 1.0 / b.partition.ratio},
          {"upper", b.partition_upper},
          {"peierls_bound", b.partition.peierls_bound},
          {"trace_bound", b.partition.trace_bound},
          {"passed", b.partition_ok}}},
        {"hilbert_schmidt",
         {{"lhs", {b.hs_lhs[0], b.hs_lhs[1]}}, {"rhs", {b.hs_rhs[0], b.hs_rhs[1]}}, {"passed", b.hs_ok}}},
        {"one_body_operator",
         {{"radius", b.operator_radius}, {"constant", b.operator_constant}, {"passed", b.operator_ok}}},
        {"kernel_domination",
         {{"constant", b.kernel.constant},
          {"violation_k1", b.kernel.violation_k1},
          {"floor_k1", b.kernel.floor_k1},
          {"violation_k2", b.kernel.violation_k2},
          {"floor_k2", b.kernel.floor_k2},
          {"passed", b.kernel.passed}}},
        {"free_energy_identity", {{"residual", b.identity_residual}, {"passed", b.identity_ok}}},
        {"relative_entropy",
         {{"quantum", b.quantum_entropy}, {"classical", b.classical_entropy}, {"passed", b.entropy_ok}}},
        {"passed", b.all()}};
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  j["d1_step_se"] = d1_step_se;
  j["d2_step_se"] = d2_step_se;
  const auto verdict = [](const Verdict& v) { return nlohmann::json{{"passed", v.passed}, {"detail", v.detail}}; };
  j["verdicts"] = {{"certified", verdict(certified)},   {"monotone_d1", verdict(monotone_d1)},
                   {"monotone_d2", verdict(monotone_d2)}, {"gap_decreasing", verdict(gap_decreasing)},
                   {"final_gap", verdict(final_gap)},   {"bounds", verdict(bounds)}};
  j["passed"] = passed();
  j["version"] = std::string(version());
  return j;
}

void write_sweep_csv(std::ostream& os, const ConvergenceReport& report) {
  os.precision(17);
  os << "T,lambda,ratio,neg_log_ratio,zr,zr_se,d1,d2,s1_dist,tail_mass,ess,bounds_passed\n";
  for (const auto& r : report.records) {
    os << r.temperature << ',' << r.coupling << ',' << r.ratio << ',' << r.neg_log_ratio << ',' << r.zr << ','
       << r.zr_se << ',' << r.d1 << ',' << r.d2 << ',' << r.schatten1[0] << ',' << r.tail_mass << ',' << r.ess
       << ',' << (r.bounds.all() ? 1 : 0) << '\n';
  }
}

}  // namespace gibbslab
