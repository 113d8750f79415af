#pragma once

#include "rbl/geometry.hpp"

namespace rbl {

struct PoseEstimate {
  RotationMatrix Q_hat = RotationMatrix::Identity();
  TranslationVector t_hat = TranslationVector::Zero();
  EulerAngles angles_hat;
  bool gimbal_lock = false;
  /// sqrt(sum_n |s^_n - Q^ c_n - t^|^2) [m]
  double fit_residual = 0.0;
  /// True when the unconstrained SVD solution was a reflection and had to be
  /// corrected.
  bool reflection_corrected = false;
};

/// Least-squares rigid alignment of the conformation onto estimated sensor
/// positions (orthogonal Procrustes / Kabsch with a det(Q) = +1 guard).
///
/// Needs N >= 3 and a conformation whose centred points span at least a
/// plane; throws ErrorKind::kDegenerateGeometry otherwise.
PoseEstimate procrustes_extract(const Points3& S_hat, const Conformation& C);

/// Fit residual of an arbitrary pose, same definition as `fit_residual`.
double rigid_fit_residual(const Points3& S_hat, const Conformation& C, const RotationMatrix& Q,
                          const TranslationVector& t);

}  // namespace rbl
