#include "rbl/linsys.hpp"

#include <string>

#include "rbl/error.hpp"

namespace rbl {

double composite_noise_variance(double d_hat, double sigma_w) {
  return 4.0 * d_hat * d_hat * sigma_w * sigma_w;
}

CompositeNoiseStats composite_noise_for_sensor(const RangeMeasurements& ranges, Eigen::Index n) {
  if (n < 0 || n >= ranges.sensors()) {
    throw Error(ErrorKind::kInvalidArgument, "sensor index " + std::to_string(n) + " out of range");
  }
  CompositeNoiseStats stats;
  stats.row_var.resize(ranges.anchors());
  for (Eigen::Index m = 0; m < ranges.anchors(); ++m) {
    stats.row_var(m) = composite_noise_variance(ranges.d_tilde(m, n), ranges.sigma_w);
  }
  stats.n0 = stats.row_var.size() > 0 ? stats.row_var.mean() : 0.0;
  return stats;
}

PositionSystem build_position_system(const RangeMeasurements& ranges, const AnchorSet& anchors,
                                     Eigen::Index n) {
  if (n < 0 || n >= ranges.sensors()) {
    throw Error(ErrorKind::kInvalidArgument, "sensor index " + std::to_string(n) + " out of range");
  }
  if (anchors.cols() != ranges.anchors()) {
    throw Error(ErrorKind::kDimensionMismatch, "range rows do not match anchor count");
  }
  const Eigen::Index M = anchors.cols();
  PositionSystem sys;
  sys.sensor_index = n;
  sys.y.resize(M);
  sys.G.resize(M, 4);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double d = ranges.d_tilde(m, n);
    sys.y(m) = d * d - anchors.col(m).squaredNorm();
    sys.G.row(m).head<3>() = -2.0 * anchors.col(m).transpose();
    sys.G(m, 3) = 1.0;
  }
  return sys;
}

double ParamSystem::scalar_noise() const {
  return row_noise_var.size() > 0 ? row_noise_var.mean() : 0.0;
}

double ReducedSystem::scalar_noise() const {
  return row_noise_var.size() > 0 ? row_noise_var.mean() : 0.0;
}

ParamSystem build_param_system(const RangeMeasurements& ranges, const AnchorSet& anchors,
                               const Conformation& C, const Eigen::VectorXd& s_norm_sq) {
  const Eigen::Index M = anchors.cols();
  const Eigen::Index N = C.cols();
  if (ranges.anchors() != M || ranges.sensors() != N || s_norm_sq.size() != N) {
    throw Error(ErrorKind::kDimensionMismatch,
                "build_param_system: ranges are " + std::to_string(ranges.anchors()) + "x" +
                    std::to_string(ranges.sensors()) + ", expected " + std::to_string(M) + "x" +
                    std::to_string(N) + " with " + std::to_string(N) + " norms");
  }

  const LinearizationConstants lc = linearization_constants();
  const Eigen::Index R = M * N;
  ParamSystem sys;
  sys.z.resize(R);
  sys.H_theta.resize(R, 3);
  sys.H_t.resize(R, 3);
  sys.row_noise_var.resize(R);
  sys.rows.reserve(R);
  sys.s_norm_sq = s_norm_sq;

  for (Eigen::Index n = 0; n < N; ++n) {
    const Vec3 c = C.col(n);
    for (Eigen::Index m = 0; m < M; ++m) {
      const Vec3 a = anchors.col(m);
      const Eigen::Index r = n * M + m;
      // (c^T kron a^T): entry i + 3j is a_i * c_j, so that it times vec(X) is a^T X c.
      Eigen::Matrix<double, 1, 9> kron;
      for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) kron(i + 3 * j) = a(i) * c(j);
      }
      const double d = ranges.d_tilde(m, n);
      sys.z(r) = d * d - a.squaredNorm() - s_norm_sq(n) + 2.0 * (kron * lc.gamma)(0);
      sys.H_theta.row(r) = -2.0 * kron * lc.L;
      sys.H_t.row(r) = -2.0 * a.transpose();
      sys.row_noise_var(r) = composite_noise_variance(d, ranges.sigma_w);
      sys.rows.push_back({m, n});
    }
  }
  return sys;
}

ParamSystem select_rows(const ParamSystem& sys, const std::vector<Eigen::Index>& order) {
  ParamSystem out;
  const auto R = static_cast<Eigen::Index>(order.size());
  out.z.resize(R);
  out.H_theta.resize(R, 3);
  out.H_t.resize(R, 3);
  out.row_noise_var.resize(R);
  out.rows.reserve(R);
  out.s_norm_sq = sys.s_norm_sq;
  for (Eigen::Index i = 0; i < R; ++i) {
    const Eigen::Index r = order[static_cast<std::size_t>(i)];
    if (r < 0 || r >= sys.size()) {
      throw Error(ErrorKind::kInvalidArgument, "select_rows: row " + std::to_string(r) + " out of range");
    }
    out.z(i) = sys.z(r);
    out.H_theta.row(i) = sys.H_theta.row(r);
    out.H_t.row(i) = sys.H_t.row(r);
    out.row_noise_var(i) = sys.row_noise_var(r);
    out.rows.push_back(sys.rows[static_cast<std::size_t>(r)]);
  }
  return out;
}

ParamSystem sensor_rows(const ParamSystem& sys, Eigen::Index n) {
  std::vector<Eigen::Index> order;
  for (Eigen::Index r = 0; r < sys.size(); ++r) {
    if (sys.rows[static_cast<std::size_t>(r)].sensor == n) order.push_back(r);
  }
  if (order.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sensor_rows: no rows for sensor " + std::to_string(n));
  }
  return select_rows(sys, order);
}

ReducedSystem cancel_translation(const ParamSystem& sys, const TranslationVector& t_hat) {
  if (sys.H_t.rows() != sys.z.size() || sys.H_theta.rows() != sys.z.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "cancel_translation: inconsistent system");
  }
  ReducedSystem out;
  out.z = sys.z - sys.H_t * t_hat;
  out.H_theta = sys.H_theta;
  out.row_noise_var = sys.row_noise_var;
  out.rows = sys.rows;
  return out;
}

std::string_view to_string(NoiseMode mode) {
  return mode == NoiseMode::kPerRow ? "per-row" : "scalar";
}

NoiseMode parse_noise_mode(std::string_view text) {
  if (text == "per-row") return NoiseMode::kPerRow;
  if (text == "scalar") return NoiseMode::kScalar;
  throw Error(ErrorKind::kParse, "unknown noise mode '" + std::string(text) + "'");
}

Eigen::VectorXd effective_row_variance(const Eigen::VectorXd& row_var, NoiseMode mode) {
  if (mode == NoiseMode::kPerRow || row_var.size() == 0) return row_var;
  return Eigen::VectorXd::Constant(row_var.size(), row_var.mean());
}

}  // namespace rbl
