#pragma once

#include <Eigen/Core>

namespace rbl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RotationMatrix = Eigen::Matrix3d;
using TranslationVector = Eigen::Vector3d;

/// 3xN matrix of points, one column per sensor (or anchor).
using Points3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Conformation = Points3;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Roll/pitch/yaw angles about the x, y and z axes. Always radians inside the
/// library; use `from_degrees` / `degrees()` at the boundaries.
struct EulerAngles {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static EulerAngles from_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  static EulerAngles from_degrees(double x_deg, double y_deg, double z_deg) {
    return {x_deg * kDegToRad, y_deg * kDegToRad, z_deg * kDegToRad};
  }

  Vec3 vector() const { return {x, y, z}; }
  Vec3 degrees() const { return vector() * kRadToDeg; }

  /// Each angle wrapped into [-pi, pi].
  EulerAngles normalized() const;

  friend bool operator==(const EulerAngles&, const EulerAngles&) = default;
};

/// Wraps an angle into [-pi, pi].
double wrap_angle(double radians);
/// Wraps an angle into [-180, 180].
double wrap_degrees(double degrees);

/// Constants of the affine map vec(Q_sa(theta)) = gamma + L * theta
/// (column-major vec).
struct LinearizationConstants {
  Eigen::Matrix<double, 9, 1> gamma;
  Eigen::Matrix<double, 9, 3> L;
};

/// Q = Qz(theta_z) * Qy(theta_y) * Qx(theta_x).
RotationMatrix rotation_matrix_exact(const EulerAngles& angles);

/// First-order expansion of `rotation_matrix_exact` around zero:
///
///   [  1   -tz   ty ]
///   [  tz   1   -tx ]
///   [ -ty   tx   1  ]
///
/// The caller is responsible for the angles being small.
RotationMatrix rotation_matrix_small_angle(const EulerAngles& angles);

LinearizationConstants linearization_constants();

/// Column n of the result is Q * C.col(n) + t.
Points3 apply_rigid_transform(const RotationMatrix& Q, const TranslationVector& t,
                              const Conformation& C);

struct EulerExtraction {
  EulerAngles angles;
  /// Set when |sin(theta_y)| is within 1e-9 of one. theta_x is then fixed to
  /// zero and theta_z absorbs the remaining in-plane rotation.
  bool gimbal_lock = false;
};

/// Inverse of `rotation_matrix_exact`. Requires Q orthogonal with det 1
/// (within 1e-6); throws rbl::Error otherwise.
EulerExtraction euler_from_rotation(const RotationMatrix& Q);

/// Column-major vectorization of a 3x3 matrix.
Eigen::Matrix<double, 9, 1> vec(const Mat3& m);

}  // namespace rbl
