#include "rbl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "rbl/error.hpp"

namespace rbl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorKind::kNumericalDegeneracy: return "numerical_degeneracy";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

double wrap_angle(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);
  // remainder() yields [-pi, pi]; keep +pi rather than -pi for symmetry with inputs.
  if (r == -kPi && radians > 0.0) r = kPi;
  return r;
}

double wrap_degrees(double degrees) {
  double r = std::remainder(degrees, 360.0);
  if (r == -180.0 && degrees > 0.0) r = 180.0;
  return r;
}

EulerAngles EulerAngles::normalized() const {
  return {wrap_angle(x), wrap_angle(y), wrap_angle(z)};
}

RotationMatrix rotation_matrix_exact(const EulerAngles& a) {
  const double cx = std::cos(a.x), sx = std::sin(a.x);
  const double cy = std::cos(a.y), sy = std::sin(a.y);
  const double cz = std::cos(a.z), sz = std::sin(a.z);

  // Expanded Qz * Qy * Qx.
  RotationMatrix q;
  q << cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
       sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
       -sy,     cy * sx,                cy * cx;
  return q;
}

RotationMatrix rotation_matrix_small_angle(const EulerAngles& a) {
  RotationMatrix q;
  q << 1.0,  -a.z,  a.y,
       a.z,   1.0, -a.x,
       -a.y,  a.x,  1.0;
  return q;
}

Eigen::Matrix<double, 9, 1> vec(const Mat3& m) {
  // Eigen storage is column-major by default.
  return Eigen::Map<const Eigen::Matrix<double, 9, 1>>(m.data());
}

LinearizationConstants linearization_constants() {
  LinearizationConstants lc;
  lc.gamma = vec(Mat3::Identity());
  lc.L.setZero();
  // Column k holds vec of the skew generator for angle k.
  // theta_x: Q(2,1) = +1, Q(1,2) = -1
  lc.L(2 + 3 * 1, 0) = 1.0;
  lc.L(1 + 3 * 2, 0) = -1.0;
  // theta_y: Q(0,2) = +1, Q(2,0) = -1
  lc.L(0 + 3 * 2, 1) = 1.0;
  lc.L(2 + 3 * 0, 1) = -1.0;
  // theta_z: Q(1,0) = +1, Q(0,1) = -1
  lc.L(1 + 3 * 0, 2) = 1.0;
  lc.L(0 + 3 * 1, 2) = -1.0;
  return lc;
}

Points3 apply_rigid_transform(const RotationMatrix& Q, const TranslationVector& t,
                              const Conformation& C) {
  Points3 out = Q * C;
  out.colwise() += t;
  return out;
}

EulerExtraction euler_from_rotation(const RotationMatrix& Q) {
  if (!Q.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "euler_from_rotation: non-finite matrix");
  }
  const double ortho = (Q.transpose() * Q - Mat3::Identity()).norm();
  const double det = Q.determinant();
  if (ortho > 1e-6 || std::abs(det - 1.0) > 1e-6) {
    throw Error(ErrorKind::kInvalidArgument,
                "euler_from_rotation: matrix is not a proper rotation");
  }

  EulerExtraction out;
  const double sy = std::clamp(-Q(2, 0), -1.0, 1.0);
  if (std::abs(sy) > 1.0 - 1e-9) {
    // Q(0,1) = sy*sx*cz - sz*cx and Q(1,1) = sy*sx*sz + cz*cx; with theta_x = 0
    // these reduce to -sin(theta_z) and cos(theta_z).
    out.gimbal_lock = true;
    out.angles.x = 0.0;
    out.angles.y = sy > 0.0 ? kPi / 2.0 : -kPi / 2.0;
    out.angles.z = std::atan2(-Q(0, 1), Q(1, 1));
    return out;
  }
  out.angles.y = std::asin(sy);
  out.angles.x = std::atan2(Q(2, 1), Q(2, 2));
  out.angles.z = std::atan2(Q(1, 0), Q(0, 0));
  return out;
}

}  // namespace rbl
