#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gibbslab/limit_harness.hpp"
#include "oracles.hpp"

using namespace gibbslab;

namespace {

const Grid1D kGrid(8.0, 400);

SpectralDecomposition modes(std::size_t K) {
  return eigensolve(build_hamiltonian(kGrid, PotentialSpec::power_law(2.0)), K);
}

SweepConfig small_sweep(std::size_t K, double a) {
  SweepConfig c;
  c.half_width = kGrid.half_width();
  c.grid_points = kGrid.points();
  c.interaction = InteractionSpec::delta(a);
  c.modes = K;
  c.temperatures = {2.0, 4.0, 8.0};
  c.samples = 20000;
  c.seed = 17;
  return c;
}

ReducedDM diagonal(const SymmetricBasis& basis, std::initializer_list<double> values) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(values.size()),
                                              static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double v : values) m(i, i) = v, ++i;
  return ReducedDM(basis, m, Provenance::classical);
}

}  // namespace

TEST_CASE("distances between density matrices") {
  const SymmetricBasis basis(2, 1);
  const ReducedDM a = diagonal(basis, {3.0, 0.0});
  const ReducedDM b = diagonal(basis, {0.0, 4.0});
  CHECK(hs_distance(a, b) == doctest::Approx(5.0));
  CHECK(schatten_p_distance(a, b, 1.0) == doctest::Approx(7.0));
  CHECK(schatten_p_distance(a, b, 2.0) == doctest::Approx(5.0));
  CHECK(schatten_p_distance(a, b, 40.0) == doctest::Approx(4.0).epsilon(0.01));
  CHECK(hs_distance(a, a) == 0.0);
  CHECK_THROWS_AS(schatten_p_distance(a, b, 0.5), std::invalid_argument);
  const ReducedDM other = diagonal(SymmetricBasis(1, 2), {1.0});
  CHECK_THROWS_AS(hs_distance(a, other), std::invalid_argument);
}

TEST_CASE("kernel subgrid") {
  const auto one = kernel_subgrid(kGrid, 1, 4.0);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(kGrid.node(one[0])) < kGrid.spacing());
  const auto five = kernel_subgrid(kGrid, 5, 4.0);
  REQUIRE(five.size() == 5);
  CHECK(std::is_sorted(five.begin(), five.end()));
  CHECK(std::abs(kGrid.node(five.front()) + 4.0) < kGrid.spacing());
  CHECK(std::abs(kGrid.node(five.back()) - 4.0) < kGrid.spacing());
  CHECK(kGrid.node(five[1]) == doctest::Approx(-kGrid.node(five[3])).epsilon(1e-12));
}

TEST_CASE("free quantum point against the Bose law") {
  const SpectralDecomposition spec = modes(2);
  const InteractionTensor tensor = interaction_tensor(spec, InteractionSpec::delta(1.0));
  for (const double T : {2.0, 6.0}) {
    const QuantumPoint pt = quantum_point(spec.eigenvalues(), tensor, T, 1.0 / T, 1e-6);
    CHECK(truncation_diagnostic(pt.free_ensemble.state) < 1e-7);
    Eigen::MatrixXcd inverse = Eigen::MatrixXcd::Zero(2, 2);
    std::vector<double> lambda;
    for (Eigen::Index n = 0; n < 2; ++n) {
      inverse(n, n) = 1.0 / spec.eigenvalue(static_cast<std::size_t>(n));
      lambda.push_back(spec.eigenvalue(static_cast<std::size_t>(n)));
    }
    const ReducedDM classical(SymmetricBasis(2, 1), inverse, Provenance::exact_free);
    // The particle cutoff removes a little occupation from the Bose law.
    CHECK(hs_distance(pt.free_rdm1.scaled(1.0 / T), classical) ==
          doctest::Approx(oracle::free_hs_distance(lambda, T)).epsilon(1e-4));
  }
}

TEST_CASE("sweep without interaction") {
  const SweepConfig c = small_sweep(2, 0.0);
  const ConvergenceReport report = convergence_sweep(c);
  REQUIRE(report.records.size() == 3);
  const SpectralDecomposition spec = modes(2);
  const std::vector<double> lambda{spec.eigenvalue(0), spec.eigenvalue(1)};
  for (const auto& r : report.records) {
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.zr == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.zr_se < 1e-12);
    CHECK(r.bounds.kernel.constant == doctest::Approx(1.0).epsilon(1e-12));
    // Equal states leave no excess, but a truncated kernel with an odd mode
    // is negative off the diagonal.
    CHECK(std::abs(r.bounds.kernel.violation_k1) < 1e-12);
    CHECK(std::abs(r.bounds.kernel.violation_k2) < 1e-12);
    CHECK(r.bounds.kernel.floor_k1 < 0.0);
    CHECK(r.bounds.partition_ok);
    CHECK(r.bounds.hs_ok);
    CHECK(r.bounds.operator_ok);
    CHECK(r.bounds.identity_ok);
    CHECK(r.bounds.entropy_ok);
    const double expected = oracle::free_hs_distance(lambda, r.temperature);
    CHECK(std::abs(r.d1 - expected) < 4.0 * r.d1_se + 1e-3);
  }
  CHECK(report.records[2].d1 < report.records[0].d1);
  CHECK(report.gap_decreasing.passed);
  CHECK(report.final_gap.passed);
}

TEST_CASE("single mode sweep") {
  SweepConfig c = small_sweep(1, 1.0);
  c.temperatures = {2.0, 4.0, 8.0, 16.0};
  const ConvergenceReport report = convergence_sweep(c);
  double previous = INFINITY;
  for (const auto& r : report.records) {
    CHECK(r.bounds.partition_ok);
    CHECK(r.bounds.hs_ok);
    CHECK(r.bounds.identity_ok);
    CHECK(r.ratio < 1.0);
    const double gap = std::abs(r.ratio - r.zr);
    CHECK(gap < previous);
    previous = gap;
  }
  // One mode makes both kernels scalar multiples of u(x)u(y).
  const KernelDomination& k = report.records[2].bounds.kernel;
  CHECK(k.constant > 1.0);
  CHECK(k.passed);
}

TEST_CASE("sweep does not depend on worker count") {
  SweepConfig c = small_sweep(2, 1.0);
  c.samples = 4000;
  const std::string one = convergence_sweep(c).to_json().dump();
  c.workers = 3;
  const std::string three = convergence_sweep(c).to_json().dump();
  CHECK(one == three);
}

TEST_CASE("sweep configuration is validated") {
  SweepConfig c = small_sweep(2, 1.0);
  c.temperatures = {2.0, 4.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.temperatures = {2.0, 2.0, 4.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.temperatures = {-1.0, 2.0, 4.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_sweep(0, 1.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_sweep(2, 1.0);
  c.samples = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_sweep(2, 1.0);
  c.kernel_subgrid = 0;
  CHECK_THROWS_AS(convergence_sweep(c), std::invalid_argument);
}

TEST_CASE("sweep report formats") {
  SweepConfig c = small_sweep(1, 1.0);
  c.samples = 2000;
  const ConvergenceReport report = convergence_sweep(c);
  std::ostringstream os;
  write_sweep_csv(os, report);
  const std::string text = os.str();
  CHECK(text.rfind("T,lambda,ratio,neg_log_ratio,zr,zr_se,d1,d2,s1_dist,tail_mass,ess,bounds_passed\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  const nlohmann::json j = report.to_json();
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["config"]["K"] == 1);
  CHECK(j["config"]["seed"] == 17);
  CHECK(j["records"].size() == 3);
  CHECK(j["records"][0]["bounds"].contains("kernel_domination"));
  CHECK(j["verdicts"].size() == 6);
  CHECK(j["passed"] == report.passed());
  CHECK(j.contains("version"));
}
