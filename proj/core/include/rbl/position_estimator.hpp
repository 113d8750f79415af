#pragma once

#include <Eigen/Core>

#include "rbl/geometry.hpp"
#include "rbl/linsys.hpp"

namespace rbl {

enum class WeightMode {
  kCompositeNoise,  ///< 1 / (4 d~^2 sigma_w^2), floored
  kUnit,
};

struct PositionEstimate {
  Vec3 s_hat = Vec3::Zero();
  double s_norm_sq_hat = 0.0;
  /// Norm of y - G (s_hat, |s_hat|^2) [m^2].
  double residual_norm = 0.0;

  /// Unconstrained weighted least-squares solution (s, |s|^2) of stage one.
  Eigen::Vector4d stage1 = Eigen::Vector4d::Zero();
  /// False when the constrained refinement failed and stage one was kept.
  bool refined = true;
};

/// Two-stage range-based position estimate for one sensor.
///
/// Stage one solves the weighted least-squares problem y = G x for
/// x = (s, r) treating r = |s|^2 as a free unknown. Stage two enforces the
/// quadratic constraint by Gauss-Newton on
///
///   min_s (x1 - f(s))^T P (x1 - f(s)),   f(s) = (s, |s|^2),   P = G^T W G,
///
/// started at the stage-one position. The refined estimate reports
/// s_norm_sq_hat = |s_hat|^2. If refinement produces a non-finite value or
/// does not lower the constrained cost, the stage-one position is returned
/// with `refined = false`.
///
/// Throws ErrorKind::kDegenerateGeometry when G is rank deficient.
PositionEstimate estimate_position_two_stage(const PositionSystem& sys,
                                             const CompositeNoiseStats& noise,
                                             WeightMode weights = WeightMode::kCompositeNoise);

/// Floor applied to composite-noise variances before inverting them.
inline constexpr double kVarianceFloor = 1e-12;

}  // namespace rbl
