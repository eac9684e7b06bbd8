#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "gibbslab/fock_quantum.hpp"
#include "gibbslab/gaussian_field.hpp"
#include "gibbslab/gibbs_classical.hpp"
#include "gibbslab/limit_harness.hpp"
#include "gibbslab/report.hpp"
#include "gibbslab/schrodinger1d.hpp"
#include "gibbslab/trotter_kernels.hpp"
#include "run_config.hpp"

using namespace gibbslab;
using gibbslab::cli::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

struct Artifact {
  std::string name;
  std::string content;
};

struct Failure {
  std::string check;
  std::string detail;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  std::vector<Failure> failures;
  std::vector<std::string> summary;
};

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

nlohmann::json document(const RunConfig& rc, const std::string& kind) {
  nlohmann::json j;
  j["kind"] = kind;
  j["config"] = rc.echo();
  j["seed"] = rc.sweep.seed;
  j["version"] = std::string(version());
  return j;
}

std::string csv_preamble(const RunConfig& rc) {
  std::ostringstream os;
  os << "# gibbslab " << version() << " seed=" << rc.sweep.seed << "\n# config:";
  for (const auto& [k, v] : rc.values) os << ' ' << k << '=' << v;
  os << '\n';
  return os.str();
}

void add_json(Outcome& out, const RunConfig& rc, const std::string& name, const nlohmann::json& doc) {
  if (!rc.wants_json()) return;
  std::ostringstream os;
  write_json(os, doc);
  out.artifacts.push_back({name, os.str()});
}

template <class Writer>
void add_csv(Outcome& out, const RunConfig& rc, const std::string& name, Writer&& write) {
  if (!rc.wants_csv()) return;
  std::ostringstream os;
  os << csv_preamble(rc);
  write(os);
  out.artifacts.push_back({name, os.str()});
}

SpectralDecomposition spectrum_of(const RunConfig& rc) {
  const Grid1D grid(rc.sweep.half_width, rc.sweep.grid_points);
  return eigensolve(build_hamiltonian(grid, rc.sweep.potential), rc.sweep.modes);
}

Outcome run_spectrum(const RunConfig& rc) {
  Outcome out;
  const SpectralDecomposition spec = spectrum_of(rc);
  nlohmann::json doc = document(rc, "spectrum");
  doc["eigenvalues"] = vector_to_json(spec.eigenvalues());
  nlohmann::json traces = nlohmann::json::object();
  for (const double p : {1.0, 2.0}) {
    const SchattenTrace t = schatten_trace(spec, p);
    traces["p" + num(p)] = {{"partial_sum", t.partial_sum}, {"tail_exponent", t.tail_exponent},
                            {"convergent_like", t.convergent_like}};
  }
  doc["schatten"] = traces;
  doc["inverse_kernel_trace"] = inverse_kernel_diag(spec).integral();
  add_json(out, rc, "spectrum.json", doc);
  add_csv(out, rc, "spectrum.csv", [&](std::ostream& os) { write_eigenvalues_csv(os, spec); });
  for (std::size_t n = 0; n < spec.size(); ++n) {
    char line[64];
    std::snprintf(line, sizeof line, "lambda_%zu = %.6f", n, spec.eigenvalue(n));
    out.summary.push_back(line);
  }
  return out;
}

Outcome run_sample(const RunConfig& rc) {
  Outcome out;
  const SpectralDecomposition spec = spectrum_of(rc);
  const FieldEnsemble field = sample_ensemble(spec, rc.sweep.modes, rc.sweep.samples, rc.sweep.seed, rc.sweep.workers);
  const Eigen::VectorXd lambda = spec.eigenvalues();

  struct Row {
    std::size_t k, index;
    double empirical, se, exact, pull;
  };
  std::vector<Row> rows;
  for (std::size_t k = 1; k <= 2; ++k) {
    const DmEstimate dm = empirical_dm(field, std::nullopt, k);
    const ReducedDM exact = free_dm_exact(lambda, k);
    const double allowed = k == 1 ? 3.0 : 4.0;
    for (Eigen::Index i = 0; i < dm.mean.matrix.rows(); ++i) {
      const Row r{k, static_cast<std::size_t>(i), dm.mean.matrix(i, i).real(), dm.se_real(i, i),
                  exact.matrix(i, i).real(), 0.0};
      rows.push_back(r);
      rows.back().pull = (r.empirical - r.exact) / r.se;
      if (!(std::abs(rows.back().pull) <= allowed)) {
        out.failures.push_back({"mu0-moment", "k=" + std::to_string(k) + " index " + std::to_string(i) + " off by " +
                                                  num(rows.back().pull, 3) + " SE (allowed " + num(allowed) + ")"});
      }
    }
  }

  nlohmann::json doc = document(rc, "sample");
  doc["samples"] = field.samples();
  doc["modes"] = field.modes();
  nlohmann::json entries = nlohmann::json::array();
  for (const Row& r : rows) {
    entries.push_back({{"k", r.k}, {"index", r.index}, {"empirical", r.empirical}, {"se", r.se},
                       {"exact", r.exact}, {"pull", r.pull}});
  }
  doc["diagonal_moments"] = entries;
  doc["passed"] = out.failures.empty();
  add_json(out, rc, "sample.json", doc);
  add_csv(out, rc, "sample.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "k,index,empirical,se,exact,pull\n";
    for (const Row& r : rows) {
      os << r.k << ',' << r.index << ',' << r.empirical << ',' << r.se << ',' << r.exact << ',' << r.pull << '\n';
    }
  });
  for (const Row& r : rows) {
    if (r.k == 1) {
      out.summary.push_back("E|alpha_" + std::to_string(r.index) + "|^2 = " + num(r.empirical) + " +- " +
                            num(r.se, 2) + " (exact " + num(r.exact) + ")");
    }
  }
  return out;
}

Outcome run_measure(const RunConfig& rc) {
  Outcome out;
  const SpectralDecomposition spec = spectrum_of(rc);
  const InteractionTensor tensor = interaction_tensor(spec, rc.sweep.interaction);
  auto field = std::make_shared<const FieldEnsemble>(
      sample_ensemble(spec, rc.sweep.modes, rc.sweep.samples, rc.sweep.seed, rc.sweep.workers));
  const WeightedEnsemble weighted = build_ensemble(field, tensor, 1.0, rc.sweep.workers);

  nlohmann::json doc = document(rc, "measure");
  doc["classical"] = classical_report(weighted, 2);
  const auto& c = doc["classical"];
  const double ess = c["ESS"].get<double>();
  const double residual = c["variational_residual"].get<double>();
  if (ess < rc.sweep.tolerance.min_ess) out.failures.push_back({"effective-sample-size", "ESS " + num(ess)});
  if (!(residual < 1e-12)) out.failures.push_back({"variational-identity", "residual " + num(residual, 3)});
  if (!c["H_cl_nonnegative"].get<bool>()) {
    out.failures.push_back({"relative-entropy", "H_cl = " + num(c["H_cl"].get<double>())});
  }
  doc["passed"] = out.failures.empty();
  add_json(out, rc, "measure.json", doc);
  add_csv(out, rc, "measure_dm1.csv",
          [&](std::ostream& os) { write_dm_csv(os, mu_dm_estimate(weighted, 1).estimate.mean); });
  out.summary.push_back("z_r = " + num(c["z_r"].get<double>()) + " +- " + num(c["se"].get<double>(), 2));
  out.summary.push_back("H_cl = " + num(c["H_cl"].get<double>()) + ", ESS = " + num(ess));
  return out;
}

Outcome run_quantum(const RunConfig& rc) {
  Outcome out;
  const SpectralDecomposition spec = spectrum_of(rc);
  const InteractionTensor tensor = interaction_tensor(spec, rc.sweep.interaction);
  const Eigen::VectorXd lambda = spec.eigenvalues();

  struct Row {
    double T, coupling;
    std::size_t max_particles;
    PartitionRatio ratio;
    double tail, number;
  };
  std::vector<Row> rows;
  nlohmann::json doc = document(rc, "quantum");
  nlohmann::json points = nlohmann::json::array();
  for (const double T : rc.sweep.temperatures) {
    const QuantumPoint pt = quantum_point(lambda, tensor, T, 1.0 / T, rc.sweep.tolerance.tail_mass, rc.sweep.workers);
    const PartitionRatio ratio = partition_ratio(pt.interacting, pt.free_ensemble, pt.free_hamiltonian,
                                                 pt.interacting_hamiltonian, tensor, lambda);
    const double tail = std::max(truncation_diagnostic(pt.interacting.state), truncation_diagnostic(pt.free_ensemble.state));
    rows.push_back({T, pt.coupling, pt.basis->max_particles(), ratio, tail, number_moment(pt.interacting.state, T, 1)});
    nlohmann::json p;
    p["interacting"] = ensemble_metadata(pt.interacting);
    p["free"] = ensemble_metadata(pt.free_ensemble);
    p["partition"] = {{"ratio", ratio.ratio},
                      {"neg_log_ratio", ratio.neg_log_ratio},
                      {"peierls_bound", ratio.peierls_bound},
                      {"trace_bound", ratio.trace_bound},
                      {"within_bounds", ratio.within_bounds}};
    p["rdm1"] = dm_to_json(pt.rdm1);
    p["rdm2"] = dm_to_json(pt.rdm2);
    p["free_rdm1"] = dm_to_json(pt.free_rdm1);
    points.push_back(std::move(p));
    if (!ratio.within_bounds) out.failures.push_back({"partition-bounds", "T=" + num(T)});
    if (!(tail < rc.sweep.tolerance.tail_mass)) {
      out.failures.push_back({"tail-mass", "T=" + num(T) + " tail " + num(tail, 3)});
    }
  }
  doc["points"] = std::move(points);
  doc["passed"] = out.failures.empty();
  add_json(out, rc, "quantum.json", doc);
  add_csv(out, rc, "quantum.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "T,lambda,N_max,ratio,neg_log_ratio,tail_mass,number_moment\n";
    for (const Row& r : rows) {
      os << r.T << ',' << r.coupling << ',' << r.max_particles << ',' << r.ratio.ratio << ','
         << r.ratio.neg_log_ratio << ',' << r.tail << ',' << r.number << '\n';
    }
  });
  for (const Row& r : rows) {
    out.summary.push_back("T=" + num(r.T) + ": Z_l/Z_0 = " + num(r.ratio.ratio) + ", N_max = " +
                          std::to_string(r.max_particles) + ", tail " + num(r.tail, 2));
  }
  return out;
}

Outcome run_trotter(const RunConfig& rc) {
  Outcome out;
  const TrotterConfig& tc = rc.trotter;
  const PotentialSpec& v = rc.sweep.potential;
  const double a = rc.sweep.interaction.delta_mass;
  const Eigen::VectorXd strong =
      tc.particles == 1 ? one_body_potential(tc.grid, v) : two_body_potential(tc.grid, v, a);
  const Eigen::VectorXd weak = tc.particles == 1 ? Eigen::VectorXd::Zero(strong.size()).eval()
                                                 : two_body_potential(tc.grid, v, 0.0);
  const KernelMatrix strong_kernel = heat_kernel(tc, strong, rc.sweep.workers);
  const DominationReport dom = compare_kernels(strong_kernel, heat_kernel(tc, weak, rc.sweep.workers));

  nlohmann::json doc = document(rc, "trotter");
  doc["particles"] = tc.particles;
  doc["weak"] = tc.particles == 1 ? "free" : "no contact term";
  doc["max_violation"] = dom.max_violation;
  doc["positivity_floor"] = dom.positivity_floor;
  doc["symmetrized_violation"] = dom.symmetrized_violation;
  doc["tolerance"] = kKernelTolerance;
  doc["passed"] = dom.passed;
  if (!dom.passed) {
    out.failures.push_back({"kernel-domination", "excess " + num(dom.max_violation, 3) + ", floor " +
                                                     num(dom.positivity_floor, 3)});
  }
  add_json(out, rc, "trotter.json", doc);
  const std::size_t M = tc.grid.points();
  const std::size_t centre = tc.particles == 1 ? M / 2 : M / 2 + M * (M / 2);
  add_csv(out, rc, "trotter_kernel.csv", [&](std::ostream& os) { write_kernel_slice_csv(os, strong_kernel, centre); });
  out.summary.push_back("max excess " + num(dom.max_violation, 3) + ", floor " + num(dom.positivity_floor, 3) +
                        ", symmetrized " + num(dom.symmetrized_violation, 3));
  return out;
}

Outcome run_converge(const RunConfig& rc) {
  Outcome out;
  const ConvergenceReport report = convergence_sweep(rc.sweep);
  nlohmann::json doc = report.to_json();
  doc["kind"] = "converge";
  doc["run_config"] = rc.echo();
  doc["seed"] = rc.sweep.seed;
  add_json(out, rc, "converge.json", doc);
  add_csv(out, rc, "converge.csv", [&](std::ostream& os) { write_sweep_csv(os, report); });
  const std::pair<const char*, const Verdict*> verdicts[] = {
      {"certified", &report.certified},           {"monotone-d1", &report.monotone_d1},
      {"monotone-d2", &report.monotone_d2},       {"gap-decreasing", &report.gap_decreasing},
      {"final-gap", &report.final_gap},           {"bounds", &report.bounds}};
  for (const auto& [name, v] : verdicts) {
    if (!v->passed) out.failures.push_back({name, v->detail});
  }
  for (const auto& r : report.records) {
    out.summary.push_back("T=" + num(r.temperature) + ": d1 = " + num(r.d1, 4) + " +- " + num(r.d1_se, 2) +
                          ", d2 = " + num(r.d2, 4) + " +- " + num(r.d2_se, 2) + ", ratio " + num(r.ratio) +
                          " vs z_r " + num(r.zr));
  }
  return out;
}

Outcome run_verify_all(const RunConfig& rc) {
  Outcome out;
  acceptance::Suite suite({rc.sweep.workers});
  nlohmann::json doc = document(rc, "verify-all");
  nlohmann::json criteria = nlohmann::json::array();
  suite.run_all([&](const acceptance::CriterionResult& r) {
    if (rc.verbosity > 0) std::cout << acceptance::format(r) << std::endl;
    criteria.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    if (!r.passed) out.failures.push_back({"criterion-" + std::to_string(r.id), r.name + ": " + r.detail});
  });
  doc["criteria"] = std::move(criteria);
  doc["passed"] = out.failures.empty();
  add_json(out, rc, "verify-all.json", doc);
  out.summary.push_back(out.failures.empty() ? "all criteria passed" : "some criteria failed");
  return out;
}

void report_config_error(const std::string& message) {
  std::cerr << nlohmann::json{{"error", "config"}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field limit experiments for Bose gases in a trap"};
  app.require_subcommand(1);

  std::string config_path, output_flag;
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;
  const std::pair<const char*, Outcome (*)(const RunConfig&)> commands[] = {
      {"spectrum", run_spectrum}, {"sample", run_sample},     {"measure", run_measure},      {"quantum", run_quantum},
      {"trotter", run_trotter},   {"converge", run_converge}, {"verify-all", run_verify_all}};
  const std::map<std::string, std::string> descriptions{
      {"spectrum", "eigenvalues of the trapped operator"},
      {"sample", "moments of the free Gaussian field"},
      {"measure", "relative partition function and classical density matrices"},
      {"quantum", "grand-canonical Gibbs states and their density matrices"},
      {"trotter", "heat kernel domination"},
      {"converge", "temperature sweep comparing quantum and classical states"},
      {"verify-all", "full acceptance suite"}};
  std::map<CLI::App*, Outcome (*)(const RunConfig&)> dispatch;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--output-dir", output_flag, "artifact directory (default $GIBBSLAB_OUTPUT_DIR or .)");
    sub->add_option("--set", sets, "key=value override, repeatable");
    for (const auto& key : cli::config_keys()) {
      const std::string k = key.name;
      sub->add_option_function<std::string>(
          "--" + k, [&overrides, k](const std::string& v) { overrides[k] = v; },
          key.help + " (default " + key.fallback + ")");
    }
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  RunConfig rc;
  try {
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw cli::ConfigError("config: --set expects key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    const auto file = config_path.empty() ? std::map<std::string, std::string>{} : cli::read_config_file(config_path);
    rc = cli::resolve_config(file, overrides);
  } catch (const cli::ConfigError& e) {
    report_config_error(e.what());
    return kExitConfigError;
  }

  Outcome outcome;
  try {
    outcome = dispatch.at(app.get_subcommands().front())(rc);
  } catch (const std::invalid_argument& e) {
    report_config_error(e.what());
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    report_config_error(e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    outcome.failures.push_back({"exception", e.what()});
  }

  const std::filesystem::path dir = cli::output_directory(output_flag);
  try {
    if (!outcome.artifacts.empty()) std::filesystem::create_directories(dir);
    for (const Artifact& a : outcome.artifacts) {
      std::ofstream os(dir / a.name, std::ios::binary);
      os << a.content;
      if (!os) throw std::runtime_error("cannot write " + (dir / a.name).string());
    }
  } catch (const std::exception& e) {
    report_config_error(e.what());
    return kExitConfigError;
  }

  if (rc.verbosity > 0) {
    for (const std::string& line : outcome.summary) std::cout << line << '\n';
    if (rc.verbosity > 1) {
      for (const Artifact& a : outcome.artifacts) std::cout << "wrote " << (dir / a.name).string() << '\n';
    }
  }
  if (outcome.failures.empty()) return kExitOk;
  nlohmann::json list = nlohmann::json::array();
  for (const Failure& f : outcome.failures) list.push_back({{"check", f.check}, {"detail", f.detail}});
  std::cerr << nlohmann::json{{"failures", list}}.dump() << std::endl;
  return kExitCheckFailed;
}
