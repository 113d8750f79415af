#include "rbl/baseline.hpp"

#include <algorithm>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "rbl/error.hpp"

namespace rbl {

double rigid_fit_residual(const Points3& S_hat, const Conformation& C, const RotationMatrix& Q,
                          const TranslationVector& t) {
  return (S_hat - apply_rigid_transform(Q, t, C)).norm();
}

PoseEstimate procrustes_extract(const Points3& S_hat, const Conformation& C) {
  if (S_hat.cols() != C.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "procrustes_extract: point counts differ");
  }
  if (C.cols() < 3) {
    throw Error(ErrorKind::kDegenerateGeometry, "procrustes_extract needs at least 3 sensors");
  }
  if (!S_hat.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "procrustes_extract: non-finite positions");
  }

  const Vec3 c_bar = C.rowwise().mean();
  const Vec3 s_bar = S_hat.rowwise().mean();
  const Points3 Cc = C.colwise() - c_bar;
  const Points3 Sc = S_hat.colwise() - s_bar;

  Eigen::JacobiSVD<Eigen::MatrixXd> shape(Cc);
  const auto& sv = shape.singularValues();
  if (sv.size() < 2 || sv(1) <= 1e-9 * std::max(1.0, sv(0))) {
    throw Error(ErrorKind::kDegenerateGeometry, "conformation is collinear or a single point");
  }

  // Cross-covariance S_c C_c^T = U Sigma V^T; the maximiser of tr(Q^T S_c C_c^T)
  // over SO(3) is U diag(1, 1, det(U V^T)) V^T.
  const Mat3 cross = Sc * Cc.transpose();
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  const double d = (U * V.transpose()).determinant();

  PoseEstimate pose;
  Vec3 flip(1.0, 1.0, 1.0);
  if (d < 0.0) {
    flip(2) = -1.0;
    pose.reflection_corrected = true;
  }
  pose.Q_hat = U * flip.asDiagonal() * V.transpose();
  pose.t_hat = s_bar - pose.Q_hat * c_bar;
  const EulerExtraction e = euler_from_rotation(pose.Q_hat);
  pose.angles_hat = e.angles;
  pose.gimbal_lock = e.gimbal_lock;
  pose.fit_residual = rigid_fit_residual(S_hat, C, pose.Q_hat, pose.t_hat);
  return pose;
}

}  // namespace rbl
