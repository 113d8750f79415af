#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rbl/geometry.hpp"

namespace rbl {

/// Random stream used for every draw in the library. Seeded explicitly; the
/// harness derives one stream per (sigma, trial) with `trial_stream`.
using Rng = std::mt19937_64;

/// Independent stream for one Monte-Carlo trial.
Rng trial_stream(std::uint64_t seed, std::uint64_t sigma_index, std::uint64_t trial_index);

/// 3xM anchor coordinates in the global frame.
using AnchorSet = Points3;

/// Throws unless M >= 4 and the anchors span 3D.
void validate_anchors(const AnchorSet& anchors);
/// Throws unless N >= 1 and all columns are finite.
void validate_conformation(const Conformation& conformation);

struct TransformPrior {
  double phi_theta_deg2 = 10.0;  ///< variance of each rotation angle [deg^2]
  double phi_t_m2 = 5.0;         ///< variance of each translation component [m^2]

  double phi_theta_rad2() const { return phi_theta_deg2 * kDegToRad * kDegToRad; }
  void validate() const;
};

enum class GeneratorMode { kExactRotation, kSmallAngleRotation };

std::string_view to_string(GeneratorMode mode);
GeneratorMode parse_generator_mode(std::string_view text);

struct GroundTruth {
  EulerAngles angles;
  TranslationVector t = TranslationVector::Zero();
  Points3 S;  ///< transformed sensor positions
  GeneratorMode generator_mode = GeneratorMode::kExactRotation;

  RotationMatrix rotation() const;
  /// Max abs deviation of S from Q(angles) * C + t under the recorded mode.
  double consistency_error(const Conformation& C) const;
};

struct RangeMeasurements {
  Eigen::MatrixXd d_tilde;  ///< M x N, row m = anchor, column n = sensor [m]
  double sigma_w = 0.0;

  Eigen::Index anchors() const { return d_tilde.rows(); }
  Eigen::Index sensors() const { return d_tilde.cols(); }
};

/// The 3x8 unit-cube sensor layout centred at the origin.
Conformation unit_cube_conformation();

/// Vertices of a cube with the given half side, same column order as
/// `unit_cube_conformation`.
AnchorSet cube_anchors(double half_side);

/// Draws theta ~ N(0, phi_theta) per angle (degrees, returned in radians) and
/// t ~ N(0, phi_t) per component.
std::pair<EulerAngles, TranslationVector> sample_transform(const TransformPrior& prior, Rng& rng);

GroundTruth make_ground_truth(const EulerAngles& angles, const TranslationVector& t,
                              const Conformation& C, GeneratorMode mode);

/// d~(m, n) = |a_m - s_n| + w(m, n), w ~ N(0, sigma_w^2) i.i.d. Negative values
/// are kept as drawn.
RangeMeasurements simulate_ranges(const Points3& S, const AnchorSet& anchors, double sigma_w,
                                  Rng& rng);

/// Noise-free pairwise distances, M x N.
Eigen::MatrixXd pairwise_distances(const AnchorSet& anchors, const Points3& S);

/// A complete simulation geometry as read from a scenario file.
struct Scenario {
  Conformation conformation;
  AnchorSet anchors;
  TransformPrior prior;
  std::vector<double> sigma_w;
  GeneratorMode generator_mode = GeneratorMode::kExactRotation;

  Eigen::Index sensors() const { return conformation.cols(); }
  Eigen::Index anchor_count() const { return anchors.cols(); }

  void validate() const;
};

/// The reference setup: unit-cube body, 20 m anchor cube, phi_theta = 10 deg^2,
/// phi_t = 5 m^2, default sigma sweep, exact-rotation generator.
Scenario default_scenario();

/// Default range-error sweep [m].
std::vector<double> default_sigma_sweep();

}  // namespace rbl
