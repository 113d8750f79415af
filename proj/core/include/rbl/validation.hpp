#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rbl/scenario.hpp"

namespace rbl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Closed-form posterior mean of z = H x + n, n ~ N(0, diag(noise_var)),
/// x ~ N(0, diag(prior_var)).
Eigen::VectorXd dense_posterior_mean(const Eigen::MatrixXd& H, const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& noise_var,
                                     const Eigen::VectorXd& prior_var);

/// Invariant checks of every module against the given scenario: rotation
/// algebra, noise-free system consistency, estimator exactness, GaBP against
/// the dense posterior, Procrustes round trip and genie exactness.
std::vector<CheckResult> run_invariant_suite(const Scenario& scenario, std::uint64_t seed);

}  // namespace rbl
