#include "rbl/position_estimator.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "rbl/error.hpp"

namespace rbl {
namespace {

constexpr int kMaxRefineSteps = 20;

Eigen::Vector4d lift(const Vec3& s) {
  Eigen::Vector4d f;
  f << s, s.squaredNorm();
  return f;
}

double constrained_cost(const Eigen::Vector4d& x1, const Eigen::Matrix4d& P, const Vec3& s) {
  const Eigen::Vector4d r = x1 - lift(s);
  return r.dot(P * r);
}

}  // namespace

PositionEstimate estimate_position_two_stage(const PositionSystem& sys,
                                             const CompositeNoiseStats& noise,
                                             WeightMode weights) {
  const Eigen::Index M = sys.G.rows();
  if (sys.y.size() != M || (weights == WeightMode::kCompositeNoise && noise.row_var.size() != M)) {
    throw Error(ErrorKind::kDimensionMismatch, "estimate_position_two_stage: size mismatch");
  }
  if (M < 4) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "position estimate needs at least 4 anchors, got " + std::to_string(M));
  }

  Eigen::VectorXd w(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    w(m) = weights == WeightMode::kUnit ? 1.0 : 1.0 / std::max(noise.row_var(m), kVarianceFloor);
  }
  // Normalise so the floor does not drive P to extreme magnitudes.
  w /= w.maxCoeff();

  const Eigen::VectorXd sqrt_w = w.cwiseSqrt();
  const MatrixX4 Gw = sqrt_w.asDiagonal() * sys.G;
  const Eigen::VectorXd yw = sqrt_w.asDiagonal() * sys.y;

  Eigen::ColPivHouseholderQR<MatrixX4> qr(Gw);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "position system for sensor " + std::to_string(sys.sensor_index) +
                    " is rank deficient");
  }

  PositionEstimate est;
  est.stage1 = qr.solve(yw);
  const Eigen::Matrix4d P = Gw.transpose() * Gw;

  Vec3 s = est.stage1.head<3>();
  const double start_cost = constrained_cost(est.stage1, P, s);
  double cost = start_cost;
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    Eigen::Matrix<double, 4, 3> J;
    J.topRows<3>().setIdentity();
    J.row(3) = 2.0 * s.transpose();
    const Eigen::Vector4d r = est.stage1 - lift(s);
    const Eigen::Matrix3d JtPJ = J.transpose() * P * J;
    const Vec3 delta = JtPJ.ldlt().solve(J.transpose() * P * r);
    if (!delta.allFinite()) break;
    s += delta;
    cost = constrained_cost(est.stage1, P, s);
    if (delta.norm() <= 1e-14 * std::max(1.0, s.norm())) break;
  }

  // Rounding-level increases (noise-free input starts at zero cost) still count
  // as refined.
  const double slack = 1e-9 * start_cost + 1e-15;
  if (!s.allFinite() || !std::isfinite(cost) || cost > start_cost + slack) {
    est.refined = false;
    s = est.stage1.head<3>();
  }
  est.s_hat = s;
  est.s_norm_sq_hat = s.squaredNorm();
  est.residual_norm = (sys.y - sys.G * lift(s)).norm();
  return est;
}

}  // namespace rbl
