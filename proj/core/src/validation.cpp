#include "rbl/validation.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "rbl/baseline.hpp"
#include "rbl/error.hpp"
#include "rbl/gabp.hpp"
#include "rbl/geometry.hpp"
#include "rbl/linsys.hpp"
#include "rbl/position_estimator.hpp"

namespace rbl {

Eigen::VectorXd dense_posterior_mean(const Eigen::MatrixXd& H, const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& noise_var,
                                     const Eigen::VectorXd& prior_var) {
  const Eigen::VectorXd w = noise_var.cwiseInverse();
  Eigen::MatrixXd A = H.transpose() * w.asDiagonal() * H;
  A.diagonal() += prior_var.cwiseInverse();
  return A.ldlt().solve(H.transpose() * (w.asDiagonal() * z));
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

CheckResult check(const std::string& name, double value, double bound) {
  return {name, std::isfinite(value) && value <= bound, "max " + num(value) + " <= " + num(bound)};
}

EulerAngles random_angles(Rng& rng, double max_abs) {
  std::uniform_real_distribution<double> u(-max_abs, max_abs);
  const double x = u(rng);
  const double y = u(rng);
  const double z = u(rng);
  return {x, y, z};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  std::vector<CheckResult> out;
  Rng rng(seed);
  const Conformation& C = sc.conformation;
  const AnchorSet& A = sc.anchors;
  const Eigen::Index N = C.cols();

  auto guarded = [&](const std::string& name, const std::function<CheckResult()>& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };

  guarded("geometry.orthogonality", [&] {
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const RotationMatrix Q = rotation_matrix_exact(random_angles(rng, kPi));
      worst = std::max({worst, (Q.transpose() * Q - Mat3::Identity()).norm(),
                        std::abs(Q.determinant() - 1.0)});
    }
    return check("geometry.orthogonality", worst, 1e-12);
  });

  guarded("geometry.vec_identity", [&] {
    const LinearizationConstants lc = linearization_constants();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const EulerAngles a = random_angles(rng, 1.0);
      worst = std::max(worst, (vec(rotation_matrix_small_angle(a)) - lc.gamma - lc.L * a.vector())
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    return check("geometry.vec_identity", worst, 0.0);
  });

  guarded("geometry.small_angle_bound", [&] {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.0, 0.35);
    double worst_ratio = 0.0;
    for (int i = 0; i < 10000; ++i) {
      Vec3 v(g(rng), g(rng), g(rng));
      v *= radius(rng) / v.norm();
      const EulerAngles a = EulerAngles::from_vector(v);
      const double err = (rotation_matrix_exact(a) - rotation_matrix_small_angle(a)).norm();
      const double bound = 2.0 * v.squaredNorm();
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, err / bound);
    }
    return check("geometry.small_angle_bound (err / 2|theta|^2)", worst_ratio, 1.0);
  });

  guarded("geometry.euler_round_trip", [&] {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      EulerAngles a = random_angles(rng, kPi);
      a.y = std::clamp(a.y, -85.0 * kDegToRad, 85.0 * kDegToRad);
      const EulerAngles b = euler_from_rotation(rotation_matrix_exact(a)).angles;
      worst = std::max(worst, (a.vector() - b.vector()).cwiseAbs().maxCoeff());
    }
    return check("geometry.euler_round_trip", worst, 1e-9);
  });

  auto [angles, t] = sample_transform(sc.prior, rng);
  const GroundTruth exact_truth = make_ground_truth(angles, t, C, GeneratorMode::kExactRotation);
  const GroundTruth sa_truth = make_ground_truth(angles, t, C, GeneratorMode::kSmallAngleRotation);

  guarded("scenario.noise_free_ranges", [&] {
    const RangeMeasurements r = simulate_ranges(exact_truth.S, A, 0.0, rng);
    double worst = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      for (Eigen::Index m = 0; m < A.cols(); ++m) {
        worst = std::max(worst, std::abs(r.d_tilde(m, n) - (A.col(m) - exact_truth.S.col(n)).norm()));
      }
    }
    return check("scenario.noise_free_ranges", worst, 0.0);
  });

  guarded("scenario.ground_truth_consistency", [&] {
    return check("scenario.ground_truth_consistency",
                 std::max(exact_truth.consistency_error(C), sa_truth.consistency_error(C)), 1e-12);
  });

  const RangeMeasurements clean = simulate_ranges(exact_truth.S, A, 0.0, rng);
  const RangeMeasurements clean_sa = simulate_ranges(sa_truth.S, A, 0.0, rng);

  guarded("linsys.position_system_consistency", [&] {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const PositionSystem ps = build_position_system(clean, A, n);
      Eigen::Vector4d x;
      x << exact_truth.S.col(n), exact_truth.S.col(n).squaredNorm();
      worst = std::max(worst, (ps.y - ps.G * x).cwiseAbs().maxCoeff() / std::max(1.0, ps.y.cwiseAbs().maxCoeff()));
    }
    return check("linsys.position_system_consistency (relative)", worst, 1e-12);
  });

  guarded("linsys.param_system_consistency", [&] {
    const ParamSystem sys = build_param_system(clean_sa, A, C, sa_truth.S.colwise().squaredNorm().transpose());
    const Eigen::VectorXd r = sys.z - sys.H_theta * sa_truth.angles.vector() - sys.H_t * sa_truth.t;
    return check("linsys.param_system_consistency", r.cwiseAbs().maxCoeff(), 1e-9);
  });

  guarded("position.noise_free_exact", [&] {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const PositionEstimate p = estimate_position_two_stage(build_position_system(clean, A, n),
                                                             composite_noise_for_sensor(clean, n));
      worst = std::max(worst, (p.s_hat - exact_truth.S.col(n)).norm());
    }
    return check("position.noise_free_exact", worst, 1e-9);
  });

  guarded("gabp.dense_posterior_oracle", [&] {
    RangeMeasurements noisy = simulate_ranges(exact_truth.S, A, 0.1, rng);
    const ParamSystem sys = build_param_system(noisy, A, C, exact_truth.S.colwise().squaredNorm().transpose());
    GabpConfig cfg = GabpConfig::from_prior(sc.prior);
    cfg.lambda_max = 1000;
    cfg.convergence_tol = 1e-13;
    GabpState s = init_state(sys, cfg);
    for (int i = 0; i < cfg.lambda_max; ++i) s = bivariate_iteration(std::move(s), sys, cfg);
    const ConsensusEstimate c = consensus(s, sys, cfg);
    Eigen::MatrixXd H(sys.size(), 6);
    H << sys.H_theta, sys.H_t;
    Eigen::VectorXd prior(6);
    prior << Vec3::Constant(cfg.prior_var_theta), Vec3::Constant(cfg.prior_var_t);
    const Eigen::VectorXd oracle = dense_posterior_mean(H, sys.z, sys.row_noise_var, prior);
    Eigen::VectorXd got(6);
    got << c.theta.vector(), c.t;
    return check("gabp.dense_posterior_oracle", (got - oracle).cwiseAbs().maxCoeff(), 1e-6);
  });

  guarded("gabp.noise_free_recovery", [&] {
    const ParamSystem sys = build_param_system(clean_sa, A, C, sa_truth.S.colwise().squaredNorm().transpose());
    const DoubleGabpResult r = run_double_gabp(sys, GabpConfig::from_prior(sc.prior));
    const double err = std::max((r.estimate.theta.degrees() - sa_truth.angles.degrees()).cwiseAbs().maxCoeff(),
                                (r.estimate.t - sa_truth.t).cwiseAbs().maxCoeff());
    return check("gabp.noise_free_recovery (deg, m)", err, 1e-5);
  });

  guarded("gabp.genie_noise_free", [&] {
    const ParamSystem sys = build_param_system(clean, A, C, exact_truth.S.colwise().squaredNorm().transpose());
    const GenieEstimate g = genie_bound(sys, exact_truth, A, C, GabpConfig::from_prior(sc.prior));
    const double err = std::max((g.theta - exact_truth.angles.vector()).cwiseAbs().maxCoeff(),
                                (g.t - exact_truth.t).cwiseAbs().maxCoeff());
    return check("gabp.genie_noise_free", err, 1e-9);
  });

  guarded("baseline.procrustes_round_trip", [&] {
    const PoseEstimate p = procrustes_extract(exact_truth.S, C);
    const double err = std::max((p.Q_hat - exact_truth.rotation()).cwiseAbs().maxCoeff(),
                                (p.t_hat - exact_truth.t).cwiseAbs().maxCoeff());
    return check("baseline.procrustes_round_trip", err, 1e-9);
  });

  return out;
}

}  // namespace rbl
