#pragma once

#include <Eigen/Core>

#include "rbl/geometry.hpp"
#include "rbl/linsys.hpp"
#include "rbl/scenario.hpp"

namespace rbl {

struct GabpConfig {
  int lambda_max = 100;
  double rho = 0.5;                 ///< weight on the previous iterate, in [0, 1)
  double prior_var_theta = 10.0 * kDegToRad * kDegToRad;  ///< [rad^2]
  double prior_var_t = 5.0;         ///< [m^2]
  NoiseMode noise_mode = NoiseMode::kPerRow;
  double convergence_tol = 1e-8;    ///< relative change of the consensus vector
  double variance_floor = 1e-12;    ///< lower bound on every variance that is divided by

  static GabpConfig from_prior(const TransformPrior& prior);
  void validate() const;
};

/// Per-edge message state of the factor graph. Every matrix has one row per
/// observation and one column per unknown: six columns (theta_x..theta_z,
/// t_x..t_z) in the bivariate stage, three (theta only) in the refinement.
struct GabpState {
  Eigen::MatrixXd replica;    ///< soft replicas x^_{m,k}
  Eigen::MatrixXd mse;        ///< psi_{m,k}
  Eigen::MatrixXd soft_ic;    ///< z~_{m,k} of the last completed iteration
  Eigen::MatrixXd cond_var;   ///< sigma^2_{m,k} of the last completed iteration
  Eigen::MatrixXd extr_mean;  ///< leave-one-out means
  Eigen::MatrixXd extr_var;   ///< leave-one-out variances (+inf when no other row informs k)
  int iteration = 0;          ///< completed iterations

  Eigen::Index rows() const { return replica.rows(); }
  Eigen::Index unknowns() const { return replica.cols(); }

  auto theta_replicas() const { return replica.leftCols(3); }
  auto t_replicas() const { return replica.rightCols(3); }
  auto theta_mse() const { return mse.leftCols(3); }
  auto t_mse() const { return mse.rightCols(3); }
};

struct ConsensusEstimate {
  EulerAngles theta;
  TranslationVector t = TranslationVector::Zero();
  Vec3 theta_var = Vec3::Zero();  ///< posterior variances [rad^2]
  Vec3 t_var = Vec3::Zero();      ///< [m^2]
  /// Prior-free full-sum combination of the soft-IC symbols.
  Vec3 likelihood_theta = Vec3::Zero();
  Vec3 likelihood_t = Vec3::Zero();
  int iterations_used = 0;
  bool converged = false;
};

GabpState init_state(const ParamSystem& sys, const GabpConfig& cfg);
GabpState init_refinement_state(const ReducedSystem& sys, const GabpConfig& cfg);

/// One damped message-passing sweep over (theta, t): soft interference
/// cancellation, conditional variances, leave-one-out extrinsic statistics,
/// Gaussian denoising and the damped replica/MSE update.
GabpState bivariate_iteration(GabpState state, const ParamSystem& sys, const GabpConfig& cfg);

/// The same sweep on the translation-cancelled system, theta only.
GabpState refinement_iteration(GabpState state, const ReducedSystem& sys, const GabpConfig& cfg);

/// Combines every row's soft-IC symbol for each unknown and applies the
/// Gaussian prior. Requires at least one completed iteration.
ConsensusEstimate consensus(const GabpState& state, const ParamSystem& sys, const GabpConfig& cfg);
/// Theta-only consensus of a refinement state; t fields are left zero.
ConsensusEstimate consensus(const GabpState& state, const ReducedSystem& sys, const GabpConfig& cfg);

struct DoubleGabpResult {
  /// theta from the refinement stage, t from the bivariate stage.
  ConsensusEstimate estimate;
  ConsensusEstimate stage_a;
  ConsensusEstimate stage_b;
};

/// Bivariate stage until convergence or lambda_max, translation cancellation
/// with the stage-A consensus, then theta-only refinement. Non-convergence is
/// reported through the `converged` flags, not as an error.
DoubleGabpResult run_double_gabp(const ParamSystem& sys, const GabpConfig& cfg);

/// Runs the double GaBP on every sensor's rows separately and averages the
/// per-sensor consensus estimates with equal weights.
DoubleGabpResult run_double_gabp_per_sensor(const ParamSystem& sys, const GabpConfig& cfg);

/// Genie-aided single-parameter estimates (matched-filter bound).
struct GenieEstimate {
  Vec3 theta = Vec3::Zero();  ///< [rad]
  Vec3 t = Vec3::Zero();      ///< [m]
};

/// For each of the six unknowns, removes everything else from each row with
/// ground truth: the other five parameters, the |s_n|^2 terms and the
/// linearization residual. What is left is h_k x_k plus the squared-range
/// noise d~^2 - d^2; the estimate is the scalar Gaussian posterior mean over
/// all rows.
GenieEstimate genie_bound(const ParamSystem& sys, const GroundTruth& truth,
                          const AnchorSet& anchors, const Conformation& C, const GabpConfig& cfg);

}  // namespace rbl
