#include "rbl/scenario.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "rbl/error.hpp"

namespace rbl {

Rng trial_stream(std::uint64_t seed, std::uint64_t sigma_index, std::uint64_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sigma_index),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32)};
  return Rng(seq);
}

void validate_anchors(const AnchorSet& anchors) {
  if (anchors.cols() < 4) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "anchor set needs at least 4 anchors, got " + std::to_string(anchors.cols()));
  }
  if (!anchors.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "anchor coordinates must be finite");
  }
  Points3 centered = anchors;
  centered.colwise() -= anchors.rowwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& sv = svd.singularValues();
  if (sv(2) <= 1e-9 * std::max(1.0, sv(0))) {
    throw Error(ErrorKind::kDegenerateGeometry, "anchors are coplanar");
  }
}

void validate_conformation(const Conformation& conformation) {
  if (conformation.cols() < 1) {
    throw Error(ErrorKind::kInvalidArgument, "conformation needs at least one sensor");
  }
  if (!conformation.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "conformation coordinates must be finite");
  }
}

void TransformPrior::validate() const {
  if (!(phi_theta_deg2 > 0.0) || !(phi_t_m2 > 0.0) || !std::isfinite(phi_theta_deg2) ||
      !std::isfinite(phi_t_m2)) {
    throw Error(ErrorKind::kInvalidArgument, "prior variances must be finite and positive");
  }
}

std::string_view to_string(GeneratorMode mode) {
  return mode == GeneratorMode::kExactRotation ? "exact-rotation" : "small-angle-rotation";
}

GeneratorMode parse_generator_mode(std::string_view text) {
  if (text == "exact-rotation" || text == "exact") return GeneratorMode::kExactRotation;
  if (text == "small-angle-rotation" || text == "small-angle") {
    return GeneratorMode::kSmallAngleRotation;
  }
  throw Error(ErrorKind::kParse, "unknown generator_mode '" + std::string(text) + "'");
}

RotationMatrix GroundTruth::rotation() const {
  return generator_mode == GeneratorMode::kExactRotation ? rotation_matrix_exact(angles)
                                                         : rotation_matrix_small_angle(angles);
}

double GroundTruth::consistency_error(const Conformation& C) const {
  if (S.cols() != C.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "ground truth and conformation sizes differ");
  }
  return (apply_rigid_transform(rotation(), t, C) - S).cwiseAbs().maxCoeff();
}

Conformation unit_cube_conformation() {
  Conformation c(3, 8);
  c << -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, 0.5,
       -0.5, -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, 0.5,
       -0.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 0.5;
  return c;
}

AnchorSet cube_anchors(double half_side) {
  if (!(half_side > 0.0) || !std::isfinite(half_side)) {
    throw Error(ErrorKind::kInvalidArgument, "cube_anchors: half_side must be positive");
  }
  return unit_cube_conformation() * (2.0 * half_side);
}

std::pair<EulerAngles, TranslationVector> sample_transform(const TransformPrior& prior, Rng& rng) {
  prior.validate();
  std::normal_distribution<double> angle(0.0, std::sqrt(prior.phi_theta_deg2));
  std::normal_distribution<double> shift(0.0, std::sqrt(prior.phi_t_m2));
  const double x = angle(rng);
  const double y = angle(rng);
  const double z = angle(rng);
  TranslationVector t;
  t.x() = shift(rng);
  t.y() = shift(rng);
  t.z() = shift(rng);
  return {EulerAngles::from_degrees(x, y, z), t};
}

GroundTruth make_ground_truth(const EulerAngles& angles, const TranslationVector& t,
                              const Conformation& C, GeneratorMode mode) {
  GroundTruth truth;
  truth.angles = angles;
  truth.t = t;
  truth.generator_mode = mode;
  truth.S = apply_rigid_transform(truth.rotation(), t, C);
  return truth;
}

Eigen::MatrixXd pairwise_distances(const AnchorSet& anchors, const Points3& S) {
  Eigen::MatrixXd d(anchors.cols(), S.cols());
  for (Eigen::Index n = 0; n < S.cols(); ++n) {
    for (Eigen::Index m = 0; m < anchors.cols(); ++m) {
      d(m, n) = (anchors.col(m) - S.col(n)).norm();
    }
  }
  return d;
}

RangeMeasurements simulate_ranges(const Points3& S, const AnchorSet& anchors, double sigma_w,
                                  Rng& rng) {
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) {
    throw Error(ErrorKind::kInvalidArgument, "simulate_ranges: sigma_w must be >= 0");
  }
  RangeMeasurements r;
  r.sigma_w = sigma_w;
  r.d_tilde = pairwise_distances(anchors, S);
  if (sigma_w > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma_w);
    // Column-major draw order: sensor-major, anchor-minor.
    for (Eigen::Index n = 0; n < r.d_tilde.cols(); ++n) {
      for (Eigen::Index m = 0; m < r.d_tilde.rows(); ++m) r.d_tilde(m, n) += noise(rng);
    }
  }
  return r;
}

std::vector<double> default_sigma_sweep() { return {0.001, 0.01, 0.05, 0.1, 0.5, 1.0}; }

void Scenario::validate() const {
  validate_conformation(conformation);
  validate_anchors(anchors);
  prior.validate();
  for (double s : sigma_w) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::kInvalidArgument, "sigma_w values must be finite and >= 0");
    }
  }
}

Scenario default_scenario() {
  Scenario s;
  s.conformation = unit_cube_conformation();
  s.anchors = cube_anchors(10.0);
  s.prior = TransformPrior{10.0, 5.0};
  s.sigma_w = default_sigma_sweep();
  s.generator_mode = GeneratorMode::kExactRotation;
  return s;
}

}  // namespace rbl
