#include "rbl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "rbl/baseline.hpp"
#include "rbl/error.hpp"
#include "rbl/linsys.hpp"

namespace rbl {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kDoubleGabp: return "double-gabp";
    case Estimator::kStageAGabp: return "stage-a-gabp";
    case Estimator::kLsProcrustes: return "ls-procrustes";
    case Estimator::kGenie: return "genie";
  }
  return "unknown";
}

std::string_view to_string(Block b) {
  switch (b) {
    case Block::kRotation: return "rotation";
    case Block::kTranslation: return "translation";
    case Block::kPosition: return "position";
  }
  return "unknown";
}

std::string_view to_string(NormSource s) { return s == NormSource::kTrue ? "true" : "estimated"; }
std::string_view to_string(SystemLayout l) {
  return l == SystemLayout::kStacked ? "stacked" : "per-sensor";
}

Estimator parse_estimator(std::string_view text) {
  for (Estimator e : {Estimator::kDoubleGabp, Estimator::kStageAGabp, Estimator::kLsProcrustes,
                      Estimator::kGenie}) {
    if (text == to_string(e)) return e;
  }
  throw Error(ErrorKind::kParse, "unknown estimator '" + std::string(text) + "'");
}

Block parse_block(std::string_view text) {
  for (Block b : kAllBlocks) {
    if (text == to_string(b)) return b;
  }
  throw Error(ErrorKind::kParse, "unknown block '" + std::string(text) + "'");
}

NormSource parse_norm_source(std::string_view text) {
  if (text == "true") return NormSource::kTrue;
  if (text == "estimated") return NormSource::kEstimated;
  throw Error(ErrorKind::kParse, "unknown norm source '" + std::string(text) + "'");
}

SystemLayout parse_layout(std::string_view text) {
  if (text == "stacked") return SystemLayout::kStacked;
  if (text == "per-sensor") return SystemLayout::kPerSensor;
  throw Error(ErrorKind::kParse, "unknown layout '" + std::string(text) + "'");
}

GabpConfig ExperimentConfig::effective_gabp() const {
  GabpConfig g = gabp;
  g.prior_var_theta = scenario.prior.phi_theta_rad2();
  g.prior_var_t = scenario.prior.phi_t_m2;
  return g;
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (trials < 1) throw Error(ErrorKind::kInvalidArgument, "trials must be >= 1");
  if (sigmas.empty()) throw Error(ErrorKind::kInvalidArgument, "sigma list is empty");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::kInvalidArgument, "sigma values must be finite and >= 0");
    }
  }
  if (estimators.empty()) throw Error(ErrorKind::kInvalidArgument, "no estimators selected");
  if (!(angle_scale > 0.0)) throw Error(ErrorKind::kInvalidArgument, "angle_scale must be positive");
  effective_gabp().validate();
}

double compute_rmse(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth) {
  if (estimates.empty()) throw Error(ErrorKind::kInvalidArgument, "compute_rmse: no estimates");
  double sum = 0.0;
  for (const Eigen::VectorXd& e : estimates) {
    if (e.size() != truth.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "compute_rmse: estimate length differs from truth");
    }
    sum += (e - truth).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

namespace {

Vec3 wrapped_error_deg(const Vec3& estimate_rad, const Vec3& truth_rad) {
  const Vec3 diff = (estimate_rad - truth_rad) * kRadToDeg;
  return {wrap_degrees(diff.x()), wrap_degrees(diff.y()), wrap_degrees(diff.z())};
}

double position_sq_error(const RotationMatrix& Q, const TranslationVector& t,
                         const Conformation& C, const Points3& S) {
  return (apply_rigid_transform(Q, t, C) - S).squaredNorm();
}

EstimatorOutcome from_pose(const EulerAngles& theta, const TranslationVector& t,
                           const GroundTruth& truth, const Conformation& C) {
  EstimatorOutcome o;
  o.ok = true;
  o.rotation_error_deg = wrapped_error_deg(theta.vector(), truth.angles.vector());
  o.translation_error = t - truth.t;
  o.position_sq_error = position_sq_error(rotation_matrix_exact(theta), t, C, truth.S);
  return o;
}

EstimatorOutcome failed(const std::string& why) {
  EstimatorOutcome o;
  o.ok = false;
  o.failure = why;
  o.converged = false;
  return o;
}

}  // namespace

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t sigma_index, std::size_t trial_index) {
  const Scenario& sc = cfg.scenario;
  const double sigma = cfg.sigmas.at(sigma_index);
  const GabpConfig gabp = cfg.effective_gabp();
  Rng rng = trial_stream(cfg.seed, sigma_index, trial_index);

  auto [angles, t] = sample_transform(sc.prior, rng);
  angles = EulerAngles::from_vector(angles.vector() * cfg.angle_scale);

  TrialOutcome out;
  out.truth = make_ground_truth(angles, t, sc.conformation, sc.generator_mode);
  const RangeMeasurements ranges = simulate_ranges(out.truth.S, sc.anchors, sigma, rng);
  const Eigen::Index N = sc.sensors();

  // Position pre-estimation is shared by the baseline and (when requested) by
  // the norms fed into the parameter system.
  Points3 S_hat(3, N);
  Eigen::VectorXd norms_hat(N);
  std::string position_failure;
  try {
    for (Eigen::Index n = 0; n < N; ++n) {
      const PositionEstimate p =
          estimate_position_two_stage(build_position_system(ranges, sc.anchors, n),
                                      composite_noise_for_sensor(ranges, n), cfg.position_weights);
      S_hat.col(n) = p.s_hat;
      norms_hat(n) = p.s_norm_sq_hat;
    }
  } catch (const Error& e) {
    position_failure = e.what();
  }

  const Eigen::VectorXd norms_true = out.truth.S.colwise().squaredNorm().transpose();

  std::optional<DoubleGabpResult> gabp_result;
  std::string gabp_failure;
  auto run_gabp = [&]() -> const DoubleGabpResult* {
    if (gabp_result) return &*gabp_result;
    if (!gabp_failure.empty()) return nullptr;
    if (cfg.norm_source == NormSource::kEstimated && !position_failure.empty()) {
      gabp_failure = "position pre-estimation failed: " + position_failure;
      return nullptr;
    }
    try {
      const ParamSystem sys = build_param_system(
          ranges, sc.anchors, sc.conformation,
          cfg.norm_source == NormSource::kTrue ? norms_true : norms_hat);
      gabp_result = cfg.layout == SystemLayout::kStacked ? run_double_gabp(sys, gabp)
                                                         : run_double_gabp_per_sensor(sys, gabp);
      return &*gabp_result;
    } catch (const Error& e) {
      gabp_failure = e.what();
      return nullptr;
    }
  };

  out.per_estimator.reserve(cfg.estimators.size());
  for (Estimator est : cfg.estimators) {
    switch (est) {
      case Estimator::kDoubleGabp:
      case Estimator::kStageAGabp: {
        const DoubleGabpResult* r = run_gabp();
        if (r == nullptr) {
          out.per_estimator.push_back(failed(gabp_failure));
          break;
        }
        const ConsensusEstimate& c = est == Estimator::kDoubleGabp ? r->estimate : r->stage_a;
        EstimatorOutcome o = from_pose(c.theta, c.t, out.truth, sc.conformation);
        o.iterations = c.iterations_used;
        o.converged = c.converged;
        out.per_estimator.push_back(o);
        break;
      }
      case Estimator::kLsProcrustes: {
        if (!position_failure.empty()) {
          out.per_estimator.push_back(failed(position_failure));
          break;
        }
        try {
          const PoseEstimate pose = procrustes_extract(S_hat, sc.conformation);
          EstimatorOutcome o = from_pose(pose.angles_hat, pose.t_hat, out.truth, sc.conformation);
          o.position_sq_error =
              position_sq_error(pose.Q_hat, pose.t_hat, sc.conformation, out.truth.S);
          out.per_estimator.push_back(o);
        } catch (const Error& e) {
          out.per_estimator.push_back(failed(e.what()));
        }
        break;
      }
      case Estimator::kGenie: {
        try {
          const ParamSystem sys =
              build_param_system(ranges, sc.anchors, sc.conformation, norms_true);
          const GenieEstimate g = genie_bound(sys, out.truth, sc.anchors, sc.conformation, gabp);
          out.per_estimator.push_back(
              from_pose(EulerAngles::from_vector(g.theta), g.t, out.truth, sc.conformation));
        } catch (const Error& e) {
          out.per_estimator.push_back(failed(e.what()));
        }
        break;
      }
    }
  }
  return out;
}

const ReportRow& RmseReport::at(Estimator e, Block b, double sigma) const {
  for (const ReportRow& r : rows) {
    if (r.estimator == e && r.block == b && r.sigma == sigma) return r;
  }
  throw Error(ErrorKind::kInvalidArgument, "report has no row for " + std::string(to_string(e)) +
                                               "/" + std::string(to_string(b)) + " at sigma " +
                                               std::to_string(sigma));
}

std::optional<ReportRow> RmseReport::find(Estimator e, Block b, double sigma) const {
  for (const ReportRow& r : rows) {
    if (r.estimator == e && r.block == b && r.sigma == sigma) return r;
  }
  return std::nullopt;
}

RmseReport run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t S = cfg.sigmas.size();
  const auto E = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = S * E;
  const double sensors = static_cast<double>(cfg.scenario.sensors());

  // Outcomes are stored by index and reduced in index order, so the report
  // does not depend on the thread count.
  std::vector<TrialOutcome> outcomes(total);
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(total)));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < total; i += workers) outcomes[i] = run_trial(cfg, i / E, i % E);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  RmseReport report;
  for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
    for (Block block : kAllBlocks) {
      for (std::size_t si = 0; si < S; ++si) {
        ReportRow row;
        row.estimator = cfg.estimators[ei];
        row.block = block;
        row.sigma = cfg.sigmas[si];
        row.trials = cfg.trials;
        double sum = 0.0;
        double iters = 0.0;
        int ok = 0;
        int converged = 0;
        for (std::size_t j = 0; j < E; ++j) {
          const EstimatorOutcome& o = outcomes[si * E + j].per_estimator[ei];
          if (!o.ok) continue;
          ++ok;
          iters += o.iterations;
          converged += o.converged ? 1 : 0;
          switch (block) {
            case Block::kRotation: sum += o.rotation_error_deg.squaredNorm(); break;
            case Block::kTranslation: sum += o.translation_error.squaredNorm(); break;
            case Block::kPosition: sum += o.position_sq_error / sensors; break;
          }
        }
        row.failures = cfg.trials - ok;
        row.rmse = ok > 0 ? std::sqrt(sum / ok) : std::nan("");
        row.mean_iters = ok > 0 ? iters / ok : 0.0;
        row.converged_frac = ok > 0 ? static_cast<double>(converged) / ok : 0.0;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace rbl
