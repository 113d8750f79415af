#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rbl/geometry.hpp"
#include "rbl/scenario.hpp"

namespace rbl {

using MatrixX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using MatrixX4 = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// Variance of the composite squared-range noise 2*d*w (the w^2 term is
/// dropped): 4 * d_hat^2 * sigma_w^2.
double composite_noise_variance(double d_hat, double sigma_w);

struct CompositeNoiseStats {
  Eigen::VectorXd row_var;  ///< per-row variance [m^4]
  double n0 = 0.0;          ///< scalar fallback: mean of row_var
};

/// Noise statistics for the M rows of sensor `n`, using measured ranges as d_hat.
CompositeNoiseStats composite_noise_for_sensor(const RangeMeasurements& ranges, Eigen::Index n);

/// Per-sensor squared-range system y = G * (s, |s|^2) + xi.
struct PositionSystem {
  Eigen::VectorXd y;  ///< d~^2 - |a_m|^2 [m^2]
  MatrixX4 G;         ///< rows (-2 a_m^T, 1)
  Eigen::Index sensor_index = 0;
};

/// `n` is zero-based.
PositionSystem build_position_system(const RangeMeasurements& ranges, const AnchorSet& anchors,
                                     Eigen::Index n);

struct RowIndex {
  Eigen::Index anchor;
  Eigen::Index sensor;
  friend bool operator==(const RowIndex&, const RowIndex&) = default;
};

/// All N per-sensor rotation/translation systems stacked into one:
/// z = H_theta * theta + H_t * t + xi, rows ordered sensor-major then anchor.
struct ParamSystem {
  Eigen::VectorXd z;
  MatrixX3 H_theta;
  MatrixX3 H_t;
  Eigen::VectorXd row_noise_var;  ///< composite-noise variance per row [m^4]
  std::vector<RowIndex> rows;
  Eigen::VectorXd s_norm_sq;      ///< the |s_n|^2 values z was built with

  Eigen::Index size() const { return z.size(); }
  /// Scalar N0: mean of the per-row variances.
  double scalar_noise() const;
};

ParamSystem build_param_system(const RangeMeasurements& ranges, const AnchorSet& anchors,
                               const Conformation& C, const Eigen::VectorXd& s_norm_sq);

/// Rows of one sensor (a per-sensor system in the same layout).
ParamSystem sensor_rows(const ParamSystem& sys, Eigen::Index n);

/// Subset of rows in the given order; used for per-sensor processing and
/// permutation tests.
ParamSystem select_rows(const ParamSystem& sys, const std::vector<Eigen::Index>& order);

/// Translation-free system z' = z - H_t * t_hat = H_theta * theta + xi.
struct ReducedSystem {
  Eigen::VectorXd z;
  MatrixX3 H_theta;
  Eigen::VectorXd row_noise_var;
  std::vector<RowIndex> rows;

  Eigen::Index size() const { return z.size(); }
  double scalar_noise() const;
};

ReducedSystem cancel_translation(const ParamSystem& sys, const TranslationVector& t_hat);

enum class NoiseMode { kPerRow, kScalar };

std::string_view to_string(NoiseMode mode);
NoiseMode parse_noise_mode(std::string_view text);

/// Row variances as seen by the estimators for the given mode.
Eigen::VectorXd effective_row_variance(const Eigen::VectorXd& row_var, NoiseMode mode);

}  // namespace rbl
