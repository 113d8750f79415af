#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code path it is used to check.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace rbl::oracle {

// Literal Qz * Qy * Qx, each factor built as its own matrix.
inline Eigen::Matrix3d three_factor_rotation(double x, double y, double z) {
  double qx[3][3] = {{1, 0, 0}, {0, std::cos(x), -std::sin(x)}, {0, std::sin(x), std::cos(x)}};
  double qy[3][3] = {{std::cos(y), 0, std::sin(y)}, {0, 1, 0}, {-std::sin(y), 0, std::cos(y)}};
  double qz[3][3] = {{std::cos(z), -std::sin(z), 0}, {std::sin(z), std::cos(z), 0}, {0, 0, 1}};
  double zy[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) zy[i][j] += qz[i][k] * qy[k][j];
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out(i, j) += zy[i][k] * qx[k][j];
  return out;
}

inline double distance(const double* a, const double* b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Posterior mean of z = H x + n with diagonal noise and prior covariances,
// via Gaussian elimination on the normal equations.
inline Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& H, const Eigen::VectorXd& z,
                                      const Eigen::VectorXd& noise_var,
                                      const Eigen::VectorXd& prior_var) {
  const int K = static_cast<int>(H.cols());
  std::vector<std::vector<double>> a(K, std::vector<double>(K + 1, 0.0));
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      double s = 0.0;
      for (int r = 0; r < H.rows(); ++r) s += H(r, i) * H(r, j) / noise_var(r);
      a[i][j] = s;
    }
    a[i][i] += 1.0 / prior_var(i);
    double b = 0.0;
    for (int r = 0; r < H.rows(); ++r) b += H(r, i) * z(r) / noise_var(r);
    a[i][K] = b;
  }
  for (int c = 0; c < K; ++c) {
    int piv = c;
    for (int r = c + 1; r < K; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < K; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k <= K; ++k) a[r][k] -= f * a[c][k];
    }
  }
  Eigen::VectorXd x(K);
  for (int i = 0; i < K; ++i) x(i) = a[i][K] / a[i][i];
  return x;
}

}  // namespace rbl::oracle
