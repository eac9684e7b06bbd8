#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "gibbslab/occupation.hpp"
#include "gibbslab/stats.hpp"
#include "oracles.hpp"

using namespace gibbslab;

TEST_CASE("symmetric basis order") {
  const SymmetricBasis one(4, 1);
  REQUIRE(one.dimension() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    Occupation e(4, 0);
    e[i] = 1;
    CHECK(one.state(i) == e);
  }
  const SymmetricBasis two(2, 2);
  REQUIRE(two.dimension() == 3);
  CHECK(two.state(0) == Occupation{2, 0});
  CHECK(two.state(1) == Occupation{1, 1});
  CHECK(two.state(2) == Occupation{0, 2});
  CHECK(SymmetricBasis(3, 0).dimension() == 1);
  CHECK_THROWS_AS(SymmetricBasis(0, 2), std::invalid_argument);
}

TEST_CASE("symmetric basis dimension and lookup") {
  for (unsigned K = 1; K <= 5; ++K)
    for (unsigned k = 0; k <= 6; ++k) {
      const SymmetricBasis b(K, k);
      CHECK(b.dimension() == oracle::binomial(K + k - 1, k));
      for (std::size_t i = 0; i < b.dimension(); ++i) {
        CHECK(particle_count(b.state(i)) == static_cast<int>(k));
        CHECK(b.index_of(b.state(i)) == i);
        if (i > 0) CHECK(b.state(i - 1) > b.state(i));
      }
    }
  CHECK_FALSE(SymmetricBasis(2, 2).index_of({1, 0}).has_value());
}

TEST_CASE("product expansion is a normalized symmetrization") {
  const auto terms = product_expansion({2, 1, 0});
  CHECK(terms.size() == 3);  // 001, 010, 100 arrangements of modes {0,0,1}
  double norm = 0.0;
  for (const auto& t : terms) norm += t.coefficient * t.coefficient;
  CHECK(norm == doctest::Approx(1.0));
  std::set<std::vector<int>> distinct;
  for (const auto& t : terms) distinct.insert(t.modes);
  CHECK(distinct.size() == terms.size());

  CHECK(product_expansion({0, 3}).size() == 1);
  CHECK(product_expansion({0, 3})[0].coefficient == doctest::Approx(1.0));
  CHECK(product_expansion({1, 1, 1}).size() == 6);
}

TEST_CASE("occupation helpers") {
  CHECK(occupation_factorial({3, 0, 2}) == doctest::Approx(12.0));
  CHECK(particle_count({3, 0, 2}) == 5);
  for (unsigned n = 0; n < 40; ++n)
    for (unsigned k = 0; k <= n; ++k) CHECK(binomial(n, k) == static_cast<double>(oracle::binomial(n, k)));
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("fock basis sectors") {
  const OccupationBasis b(3, 4);
  CHECK(b.sector_count() == 5);
  CHECK(b.dimension() == oracle::binomial(7, 3));
  std::size_t offset = 0;
  for (std::size_t n = 0; n <= 4; ++n) {
    CHECK(b.sector_offset(n) == offset);
    for (std::size_t i = 0; i < b.sector(n).dimension(); ++i) {
      CHECK(b.state(offset + i) == b.sector(n).state(i));
      CHECK(b.index_of(b.sector(n).state(i)) == offset + i);
    }
    offset += b.sector(n).dimension();
  }
  CHECK_FALSE(b.index_of({5, 0, 0}).has_value());
  CHECK_THROWS_AS(OccupationBasis(0, 3), std::invalid_argument);
  BasisLimits tight;
  tight.max_sector_dimension = 10;
  CHECK_THROWS_AS(OccupationBasis(3, 4, tight), std::length_error);
}

TEST_CASE("jackknife blocks") {
  CHECK(jackknife_block_count(7) == 7);
  CHECK(jackknife_block_count(100000) == 50);
  std::vector<std::size_t> sizes(50, 0);
  for (std::size_t s = 0; s < 1234; ++s) ++sizes[jackknife_block_of(s, 1234, 50)];
  for (std::size_t b = 0; b < 50; ++b) {
    CHECK(sizes[b] >= 24);
    CHECK(sizes[b] <= 25);
  }
  BlockSums single{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1)};
  CHECK_THROWS_AS(jackknife(single, [](const Eigen::VectorXd& m) { return m; }), std::invalid_argument);
}

TEST_CASE("jackknife of a mean matches the naive standard error") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(3.0, 2.0);
  const std::size_t S = 20000, B = jackknife_block_count(S);
  BlockSums blocks{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), 2), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B))};
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double x = normal(rng);
    const auto b = static_cast<Eigen::Index>(jackknife_block_of(s, S, B));
    blocks.sums(b, 0) += x;
    blocks.sums(b, 1) += 1.0;
    blocks.counts(b) += 1.0;
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / S;
  const double naive = std::sqrt((sum2 / S - mean * mean) / S);
  const JackknifeResult jk = jackknife(blocks, [](const Eigen::VectorXd& m) {
    Eigen::VectorXd out(2);
    out << m(0), m(0) / m(1);
    return out;
  });
  CHECK(jk.value(0) == doctest::Approx(mean));
  CHECK(jk.value(1) == doctest::Approx(mean));
  // A 50-block jackknife error has roughly 10% relative scatter.
  CHECK(jk.se(0) == doctest::Approx(naive).epsilon(0.35));
  CHECK(jk.se(1) == doctest::Approx(jk.se(0)).epsilon(1e-9));
}
