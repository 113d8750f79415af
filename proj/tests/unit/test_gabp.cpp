#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "rbl/error.hpp"
#include "rbl/gabp.hpp"
#include "rbl/harness.hpp"
#include "toy_systems.hpp"

namespace rbl {
namespace {

struct Cube {
  Conformation C = unit_cube_conformation();
  AnchorSet A = cube_anchors(10.0);
  GroundTruth truth;
  ParamSystem sys;
  GabpConfig cfg = GabpConfig::from_prior({});

  Cube(GeneratorMode mode, double sigma, std::uint64_t seed, double angle_scale = 1.0) {
    Rng rng(seed);
    auto [ang, t] = sample_transform({}, rng);
    ang = EulerAngles::from_vector(angle_scale * ang.vector());
    truth = make_ground_truth(ang, t, C, mode);
    const RangeMeasurements r = simulate_ranges(truth.S, A, sigma, rng);
    sys = build_param_system(r, A, C, truth.S.colwise().squaredNorm().transpose());
  }
};

Eigen::VectorXd stacked(const ConsensusEstimate& c) {
  Eigen::VectorXd x(6);
  x << c.theta.vector(), c.t;
  return x;
}

TEST(GabpConfig, Validation) {
  GabpConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rho = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c.rho = 0.5;
  c.lambda_max = 0;
  EXPECT_THROW(c.validate(), Error);
  const GabpConfig p = GabpConfig::from_prior({10.0, 5.0});
  EXPECT_DOUBLE_EQ(p.prior_var_theta, 10.0 * kDegToRad * kDegToRad);
  EXPECT_EQ(p.prior_var_t, 5.0);
}

TEST(InitState, StartsAtPrior) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 1);
  const GabpState s = init_state(f.sys, f.cfg);
  EXPECT_EQ(s.rows(), 64);
  EXPECT_EQ(s.unknowns(), 6);
  EXPECT_TRUE((s.theta_mse().array() == f.cfg.prior_var_theta).all());
  EXPECT_TRUE((s.t_mse().array() == f.cfg.prior_var_t).all());
  EXPECT_TRUE((s.replica.array() == 0.0).all());
  EXPECT_EQ(s.iteration, 0);
  const GabpState again = init_state(f.sys, f.cfg);
  EXPECT_EQ(again.replica, s.replica);
  EXPECT_EQ(again.mse, s.mse);
}

TEST(Consensus, RejectedBeforeFirstIteration) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 1);
  try {
    consensus(init_state(f.sys, f.cfg), f.sys, f.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(BivariateIteration, FullDampingFreezesState) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 2);
  GabpState s = bivariate_iteration(init_state(f.sys, f.cfg), f.sys, f.cfg);
  GabpConfig frozen = f.cfg;
  frozen.rho = 1.0;
  const GabpState next = bivariate_iteration(s, f.sys, frozen);
  EXPECT_EQ(next.replica, s.replica);
  EXPECT_EQ(next.mse, s.mse);
}

TEST(BivariateIteration, NoDampingTakesDenoisedValues) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 3);
  GabpConfig cfg = f.cfg;
  cfg.rho = 0.0;
  GabpState s = bivariate_iteration(init_state(f.sys, cfg), f.sys, cfg);
  s = bivariate_iteration(std::move(s), f.sys, cfg);
  for (int r = 0; r < s.rows(); ++r) {
    for (int k = 0; k < 6; ++k) {
      const double phi = k < 3 ? cfg.prior_var_theta : cfg.prior_var_t;
      const double v = s.extr_var(r, k);
      const double m = s.extr_mean(r, k);
      EXPECT_NEAR(s.replica(r, k), phi * m / (phi + v), 1e-12 * std::max(1.0, std::abs(m)));
      EXPECT_NEAR(s.mse(r, k), phi * v / (phi + v), 1e-12 * phi);
    }
  }
}

TEST(BivariateIteration, ExtrinsicStatisticsLeaveOneOut) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 4);
  GabpState s = bivariate_iteration(init_state(f.sys, f.cfg), f.sys, f.cfg);
  s = bivariate_iteration(std::move(s), f.sys, f.cfg);
  Eigen::MatrixXd H(f.sys.size(), 6);
  H << f.sys.H_theta, f.sys.H_t;
  for (int r = 0; r < s.rows(); r += 7) {
    for (int k = 0; k < 6; ++k) {
      double prec = 0.0, num = 0.0;
      for (int i = 0; i < s.rows(); ++i) {
        if (i == r) continue;
        prec += H(i, k) * H(i, k) / s.cond_var(i, k);
        num += H(i, k) * s.soft_ic(i, k) / s.cond_var(i, k);
      }
      EXPECT_NEAR(s.extr_var(r, k), 1.0 / prec, 1e-9 / prec);
      EXPECT_NEAR(s.extr_mean(r, k), num / prec, 1e-9 * std::max(1.0, std::abs(num / prec)));
    }
  }
}

TEST(BivariateIteration, NegativeConditionalVarianceNamesRow) {
  toy::ToyProblem p = toy::make_toy(8, 5);
  p.sys.row_noise_var(2) = -1e6;
  try {
    bivariate_iteration(init_state(p.sys, p.cfg), p.sys, p.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumericalDegeneracy);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(BivariateIteration, ShapeMismatchRejected) {
  toy::ToyProblem p = toy::make_toy(8, 5);
  toy::ToyProblem q = toy::make_toy(9, 5);
  EXPECT_THROW(bivariate_iteration(init_state(p.sys, p.cfg), q.sys, q.cfg), Error);
}

TEST(Consensus, ConvergedToyMatchesDensePosterior) {
  for (int i = 0; i < 20; ++i) {
    const int rows = 6 + (i * 5) % 11;
    const toy::ToyProblem p = toy::make_toy(rows, 100 + i);
    const ConsensusEstimate c = toy::run_to_convergence(p);
    ASSERT_TRUE(c.converged) << "instance " << i;
    const Eigen::VectorXd oracle =
        oracle::posterior_mean(p.H, p.sys.z, p.sys.row_noise_var, p.prior);
    EXPECT_LT((stacked(c) - oracle).cwiseAbs().maxCoeff(), 1e-6) << "instance " << i;
  }
}

TEST(Consensus, PosteriorVarianceBelowPrior) {
  const toy::ToyProblem p = toy::make_toy(12, 7);
  const ConsensusEstimate c = toy::run_to_convergence(p);
  for (int k = 0; k < 3; ++k) {
    EXPECT_GT(c.theta_var(k), 0.0);
    EXPECT_LT(c.theta_var(k), 1.0);
    EXPECT_GT(c.t_var(k), 0.0);
    EXPECT_LT(c.t_var(k), 1.0);
  }
}

TEST(Consensus, DampingDoesNotMoveFixedPoint) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 6);
  GabpConfig a = f.cfg, b = f.cfg;
  a.rho = 0.3;
  b.rho = 0.7;
  a.lambda_max = b.lambda_max = 2000;
  a.convergence_tol = b.convergence_tol = 1e-12;
  const DoubleGabpResult ra = run_double_gabp(f.sys, a);
  const DoubleGabpResult rb = run_double_gabp(f.sys, b);
  ASSERT_TRUE(ra.stage_a.converged);
  ASSERT_TRUE(rb.stage_a.converged);
  EXPECT_LT((stacked(ra.stage_a) - stacked(rb.stage_a)).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LT((ra.estimate.theta.vector() - rb.estimate.theta.vector()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Consensus, RowPermutationInvariant) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 7);
  std::vector<Eigen::Index> order(f.sys.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  const ParamSystem perm = select_rows(f.sys, order);
  GabpState s = init_state(f.sys, f.cfg), sp = init_state(perm, f.cfg);
  for (int i = 0; i < 30; ++i) {
    s = bivariate_iteration(std::move(s), f.sys, f.cfg);
    sp = bivariate_iteration(std::move(sp), perm, f.cfg);
  }
  const Eigen::VectorXd x = stacked(consensus(s, f.sys, f.cfg));
  const Eigen::VectorXd y = stacked(consensus(sp, perm, f.cfg));
  EXPECT_LT((x - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Consensus, NoiseFreeSmallAngleRecoversTruth) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Cube f(GeneratorMode::kSmallAngleRotation, 0.0, seed);
    GabpState s = init_state(f.sys, f.cfg);
    for (int i = 0; i < 200; ++i) s = bivariate_iteration(std::move(s), f.sys, f.cfg);
    const ConsensusEstimate c = consensus(s, f.sys, f.cfg);
    EXPECT_LT((c.theta.vector() - f.truth.angles.vector()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((c.t - f.truth.t).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Variances, StayPositiveAcrossDampingAndNoise) {
  for (double rho : {0.3, 0.5, 0.7}) {
    for (double sigma : default_sigma_sweep()) {
      Cube f(GeneratorMode::kExactRotation, sigma, 8);
      GabpConfig cfg = f.cfg;
      cfg.rho = rho;
      GabpState s = init_state(f.sys, cfg);
      for (int i = 0; i < cfg.lambda_max; ++i) {
        s = bivariate_iteration(std::move(s), f.sys, cfg);
        ASSERT_TRUE((s.mse.array() > 0.0).all()) << rho << " " << sigma;
        ASSERT_TRUE((s.cond_var.array() > 0.0).all()) << rho << " " << sigma;
        ASSERT_TRUE((s.extr_var.array() > 0.0).all()) << rho << " " << sigma;
      }
    }
  }
}

TEST(Refinement, TrueTranslationRecoversRotation) {
  Cube f(GeneratorMode::kSmallAngleRotation, 0.0, 9);
  const ReducedSystem red = cancel_translation(f.sys, f.truth.t);
  GabpState s = init_refinement_state(red, f.cfg);
  EXPECT_EQ(s.unknowns(), 3);
  for (int i = 0; i < 200; ++i) s = refinement_iteration(std::move(s), red, f.cfg);
  const ConsensusEstimate c = consensus(s, red, f.cfg);
  EXPECT_LT((c.theta.vector() - f.truth.angles.vector()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(c.t, Vec3::Zero());
}

TEST(Refinement, ToyMatchesSingleBlockPosterior) {
  for (int i = 0; i < 10; ++i) {
    const toy::ToyProblem p = toy::make_toy(6 + i, 300 + i);
    const ReducedSystem red = cancel_translation(p.sys, Vec3(0.3, -0.2, 0.1));
    GabpState s = init_refinement_state(red, p.cfg);
    for (int it = 0; it < 3000; ++it) s = refinement_iteration(std::move(s), red, p.cfg);
    const ConsensusEstimate c = consensus(s, red, p.cfg);
    const Eigen::VectorXd oracle = oracle::posterior_mean(
        Eigen::MatrixXd(red.H_theta), red.z, red.row_noise_var, Eigen::VectorXd::Ones(3));
    EXPECT_LT((c.theta.vector() - oracle).cwiseAbs().maxCoeff(), 1e-6) << "instance " << i;
  }
}

TEST(Refinement, FullDampingFreezesState) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 10);
  const ReducedSystem red = cancel_translation(f.sys, f.truth.t);
  GabpState s = refinement_iteration(init_refinement_state(red, f.cfg), red, f.cfg);
  GabpConfig frozen = f.cfg;
  frozen.rho = 1.0;
  const GabpState next = refinement_iteration(s, red, frozen);
  EXPECT_EQ(next.replica, s.replica);
  EXPECT_EQ(next.mse, s.mse);
}

TEST(DoubleGabp, NoiseFreeSmallAngleEndToEnd) {
  Cube f(GeneratorMode::kSmallAngleRotation, 0.0, 11);
  const DoubleGabpResult r = run_double_gabp(f.sys, f.cfg);
  EXPECT_LT((r.estimate.theta.vector() - f.truth.angles.vector()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.estimate.t - f.truth.t).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(r.estimate.t, r.stage_a.t);
  EXPECT_EQ(r.estimate.theta, r.stage_b.theta);
  EXPECT_EQ(r.estimate.iterations_used, r.stage_a.iterations_used + r.stage_b.iterations_used);
}

TEST(DoubleGabp, PerSensorLayoutAveragesSensorRuns) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 12);
  const DoubleGabpResult r = run_double_gabp_per_sensor(f.sys, f.cfg);
  Vec3 theta = Vec3::Zero(), t = Vec3::Zero();
  for (int n = 0; n < 8; ++n) {
    const DoubleGabpResult one = run_double_gabp(sensor_rows(f.sys, n), f.cfg);
    theta += one.estimate.theta.vector() / 8.0;
    t += one.estimate.t / 8.0;
  }
  EXPECT_LT((r.estimate.theta.vector() - theta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.estimate.t - t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DoubleGabp, SingleSensorCannotSeeRotationAboutItsOwnAxis) {
  // theta x c_n is orthogonal to c_n, so one sensor's rows carry no
  // information on a rotation about c_n; only the stacked layout is exact.
  Cube f(GeneratorMode::kSmallAngleRotation, 0.0, 12);
  for (int n = 0; n < 8; ++n) {
    const ParamSystem one = sensor_rows(f.sys, n);
    EXPECT_LT((one.H_theta * f.C.col(n)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DoubleGabp, LinearisationBiasQuartersWithHalfAngles) {
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Cube full(GeneratorMode::kExactRotation, 0.0, seed, 1.0);
    Cube half(GeneratorMode::kExactRotation, 0.0, seed, 0.5);
    const double e_full =
        (run_double_gabp(full.sys, full.cfg).estimate.theta.vector() - full.truth.angles.vector())
            .norm();
    const double e_half =
        (run_double_gabp(half.sys, half.cfg).estimate.theta.vector() - half.truth.angles.vector())
            .norm();
    ratios.push_back(e_full / e_half);
  }
  std::nth_element(ratios.begin(), ratios.begin() + 25, ratios.end());
  EXPECT_GE(ratios[25], 3.0);
  EXPECT_LE(ratios[25], 5.0);
}

TEST(DoubleGabp, RefinementSolvesRotationGivenStageATranslation) {
  Cube f(GeneratorMode::kExactRotation, 0.1, 14);
  GabpConfig cfg = f.cfg;
  cfg.lambda_max = 2000;
  cfg.convergence_tol = 1e-13;
  const DoubleGabpResult r = run_double_gabp(f.sys, cfg);
  ASSERT_TRUE(r.stage_a.converged && r.stage_b.converged);
  const ReducedSystem red = cancel_translation(f.sys, r.stage_a.t);
  const Eigen::VectorXd oracle = oracle::posterior_mean(
      Eigen::MatrixXd(red.H_theta), red.z, red.row_noise_var,
      Eigen::VectorXd::Constant(3, cfg.prior_var_theta));
  EXPECT_LT((r.stage_b.theta.vector() - oracle).cwiseAbs().maxCoeff(), 1e-9);
  // The joint posterior mean already satisfies the conditional equations for
  // theta at t = t_A, so a converged stage A is a fixed point of stage B.
  EXPECT_LT((r.stage_b.theta.vector() - r.stage_a.theta.vector()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DoubleGabp, RefinementDoesNotHurtRotation) {
  double se_a = 0.0, se_b = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Cube f(GeneratorMode::kExactRotation, 0.1, 1000 + seed);
    const DoubleGabpResult r = run_double_gabp(f.sys, f.cfg);
    se_a += (r.stage_a.theta.vector() - f.truth.angles.vector()).squaredNorm();
    se_b += (r.stage_b.theta.vector() - f.truth.angles.vector()).squaredNorm();
  }
  EXPECT_LE(se_b, se_a) << "relative gap " << (se_b - se_a) / se_a;
}

TEST(Genie, NoiseFreeSmallAngleIsExact) {
  Cube f(GeneratorMode::kSmallAngleRotation, 0.0, 13);
  const GenieEstimate g = genie_bound(f.sys, f.truth, f.A, f.C, f.cfg);
  EXPECT_LT((g.theta - f.truth.angles.vector()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((g.t - f.truth.t).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Genie, BoundsDoubleGabpPerParameterAndGrowsWithSigma) {
  ExperimentConfig cfg;
  cfg.estimators = {Estimator::kDoubleGabp, Estimator::kGenie};
  cfg.trials = 500;
  cfg.seed = 4;
  std::vector<Eigen::Matrix<double, 6, 1>> genie_rmse;
  for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
    Eigen::Matrix<double, 6, 1> se_gabp = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 1> se_genie = Eigen::Matrix<double, 6, 1>::Zero();
    for (int j = 0; j < cfg.trials; ++j) {
      const TrialOutcome t = run_trial(cfg, si, static_cast<std::size_t>(j));
      ASSERT_TRUE(t.per_estimator[0].ok && t.per_estimator[1].ok);
      for (int e = 0; e < 2; ++e) {
        Eigen::Matrix<double, 6, 1> err;
        err << t.per_estimator[e].rotation_error_deg, t.per_estimator[e].translation_error;
        (e == 0 ? se_gabp : se_genie) += err.cwiseAbs2();
      }
    }
    for (int k = 0; k < 6; ++k) EXPECT_LE(se_genie(k), se_gabp(k)) << "sigma index " << si << " k " << k;
    genie_rmse.push_back((se_genie / cfg.trials).cwiseSqrt());
  }
  for (std::size_t si = 1; si < genie_rmse.size(); ++si)
    for (int k = 0; k < 6; ++k) EXPECT_GE(genie_rmse[si](k), genie_rmse[si - 1](k));
}

}  // namespace
}  // namespace rbl
