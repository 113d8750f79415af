#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rbl/validation.hpp"

namespace rbl {
namespace {

TEST(DensePosterior, MatchesEliminationOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd H(9, 4);
    Eigen::VectorXd z(9), noise(9), prior(4);
    for (int i = 0; i < H.size(); ++i) H.data()[i] = g(rng);
    for (int r = 0; r < 9; ++r) {
      z(r) = g(rng);
      noise(r) = 0.5 + std::abs(g(rng));
    }
    for (int k = 0; k < 4; ++k) prior(k) = 0.5 + std::abs(g(rng));
    const Eigen::VectorXd a = dense_posterior_mean(H, z, noise, prior);
    const Eigen::VectorXd b = oracle::posterior_mean(H, z, noise, prior);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InvariantSuite, DefaultScenarioPasses) {
  const std::vector<CheckResult> results = run_invariant_suite(default_scenario(), 1);
  EXPECT_GE(results.size(), 10u);
  for (const CheckResult& r : results) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(InvariantSuite, OtherSeedsAndGeometries) {
  Scenario sc = default_scenario();
  sc.anchors = cube_anchors(7.0);
  sc.anchors.col(3) += Vec3(1.0, -2.0, 0.5);
  for (std::uint64_t seed : {2u, 3u}) {
    for (const CheckResult& r : run_invariant_suite(sc, seed))
      EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

}  // namespace
}  // namespace rbl
