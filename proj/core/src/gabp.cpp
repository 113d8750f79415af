#include "rbl/gabp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rbl/error.hpp"

namespace rbl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Thin view over a linear system H x = z + noise with per-column prior
// variances; shared by the bivariate and the refinement stage.
struct FactorGraph {
  Eigen::MatrixXd H;
  const Eigen::VectorXd* z;
  Eigen::VectorXd noise;  // effective per-row N0
  Eigen::VectorXd prior;  // per-column prior variance
};

FactorGraph bivariate_graph(const ParamSystem& sys, const GabpConfig& cfg) {
  FactorGraph g;
  g.H.resize(sys.size(), 6);
  g.H << sys.H_theta, sys.H_t;
  g.z = &sys.z;
  g.noise = effective_row_variance(sys.row_noise_var, cfg.noise_mode);
  g.prior.resize(6);
  g.prior << Vec3::Constant(cfg.prior_var_theta), Vec3::Constant(cfg.prior_var_t);
  return g;
}

FactorGraph refinement_graph(const ReducedSystem& sys, const GabpConfig& cfg) {
  FactorGraph g;
  g.H = sys.H_theta;
  g.z = &sys.z;
  g.noise = effective_row_variance(sys.row_noise_var, cfg.noise_mode);
  g.prior = Eigen::VectorXd::Constant(3, cfg.prior_var_theta);
  return g;
}

GabpState initial_state(const FactorGraph& g) {
  const Eigen::Index R = g.H.rows();
  const Eigen::Index K = g.H.cols();
  GabpState s;
  s.replica = Eigen::MatrixXd::Zero(R, K);
  s.mse = g.prior.transpose().replicate(R, 1);
  s.soft_ic = Eigen::MatrixXd::Zero(R, K);
  s.cond_var = Eigen::MatrixXd::Zero(R, K);
  s.extr_mean = Eigen::MatrixXd::Zero(R, K);
  s.extr_var = g.prior.transpose().replicate(R, 1);
  s.iteration = 0;
  return s;
}

void check_shapes(const GabpState& s, const FactorGraph& g) {
  if (s.replica.rows() != g.H.rows() || s.replica.cols() != g.H.cols() ||
      s.mse.rows() != g.H.rows() || s.mse.cols() != g.H.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "GaBP state is " + std::to_string(s.replica.rows()) + "x" +
                    std::to_string(s.replica.cols()) + ", system is " +
                    std::to_string(g.H.rows()) + "x" + std::to_string(g.H.cols()));
  }
}

// Soft-IC symbols and conditional variances from the current replicas.
void factor_messages(GabpState& s, const FactorGraph& g, double floor) {
  const Eigen::Index R = g.H.rows();
  const Eigen::Index K = g.H.cols();
  const Eigen::VectorXd& z = *g.z;
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index k = 0; k < K; ++k) {
      double interference = 0.0;
      double residual_var = g.noise(r);
      for (Eigen::Index i = 0; i < K; ++i) {
        if (i == k) continue;
        const double h = g.H(r, i);
        interference += h * s.replica(r, i);
        residual_var += h * h * s.mse(r, i);
      }
      if (!(residual_var >= 0.0) || !std::isfinite(residual_var)) {
        throw Error(ErrorKind::kNumericalDegeneracy,
                    "GaBP conditional variance is " + std::to_string(residual_var) + " at row " +
                        std::to_string(r) + ", unknown " + std::to_string(k));
      }
      s.soft_ic(r, k) = z(r) - interference;
      s.cond_var(r, k) = std::max(residual_var, floor);
    }
  }
}

// Leave-one-out combination, Gaussian denoising and damping.
void variable_messages(GabpState& s, const FactorGraph& g, double rho) {
  const Eigen::Index R = g.H.rows();
  const Eigen::Index K = g.H.cols();
  for (Eigen::Index k = 0; k < K; ++k) {
    double info = 0.0;
    double weighted = 0.0;
    for (Eigen::Index r = 0; r < R; ++r) {
      const double h = g.H(r, k);
      info += h * h / s.cond_var(r, k);
      weighted += h * s.soft_ic(r, k) / s.cond_var(r, k);
    }
    const double phi = g.prior(k);
    for (Eigen::Index r = 0; r < R; ++r) {
      const double h = g.H(r, k);
      const double prec = std::max(info - h * h / s.cond_var(r, k), 0.0);
      const double num = weighted - h * s.soft_ic(r, k) / s.cond_var(r, k);

      s.extr_var(r, k) = prec > 0.0 ? 1.0 / prec : kInf;
      s.extr_mean(r, k) = prec > 0.0 ? num / prec : 0.0;

      // phi * mean / (phi + v) and phi * v / (phi + v), written in precision
      // form so that an uninformed edge falls back to the prior.
      const double denom = phi * prec + 1.0;
      const double denoised = phi * num / denom;
      const double denoised_mse = phi / denom;

      s.replica(r, k) = rho * s.replica(r, k) + (1.0 - rho) * denoised;
      s.mse(r, k) = rho * s.mse(r, k) + (1.0 - rho) * denoised_mse;
    }
  }
}

GabpState step(GabpState s, const FactorGraph& g, const GabpConfig& cfg) {
  check_shapes(s, g);
  factor_messages(s, g, cfg.variance_floor);
  variable_messages(s, g, cfg.rho);
  ++s.iteration;
  return s;
}

struct Combined {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::VectorXd likelihood;
};

Combined combine(const GabpState& s, const FactorGraph& g) {
  if (s.iteration < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "consensus requires at least one completed GaBP iteration");
  }
  check_shapes(s, g);
  const Eigen::Index K = g.H.cols();
  Combined c{Eigen::VectorXd(K), Eigen::VectorXd(K), Eigen::VectorXd(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    double info = 0.0;
    double weighted = 0.0;
    for (Eigen::Index r = 0; r < g.H.rows(); ++r) {
      const double h = g.H(r, k);
      info += h * h / s.cond_var(r, k);
      weighted += h * s.soft_ic(r, k) / s.cond_var(r, k);
    }
    const double post_prec = info + 1.0 / g.prior(k);
    c.mean(k) = weighted / post_prec;
    c.var(k) = 1.0 / post_prec;
    c.likelihood(k) = info > 0.0 ? weighted / info : 0.0;
  }
  return c;
}

bool settled(const Eigen::VectorXd& prev, const Eigen::VectorXd& cur, double tol) {
  const double scale = std::max(cur.norm(), std::numeric_limits<double>::min());
  return (cur - prev).norm() <= tol * scale;
}

// Iterates until the consensus settles or lambda_max is reached.
GabpState iterate(GabpState s, const FactorGraph& g, const GabpConfig& cfg, bool& converged) {
  converged = false;
  Eigen::VectorXd prev;
  for (int lambda = 0; lambda < cfg.lambda_max; ++lambda) {
    s = step(std::move(s), g, cfg);
    const Eigen::VectorXd cur = combine(s, g).mean;
    if (prev.size() == cur.size() && settled(prev, cur, cfg.convergence_tol)) {
      converged = true;
      break;
    }
    prev = cur;
  }
  return s;
}

}  // namespace

GabpConfig GabpConfig::from_prior(const TransformPrior& prior) {
  prior.validate();
  GabpConfig cfg;
  cfg.prior_var_theta = prior.phi_theta_rad2();
  cfg.prior_var_t = prior.phi_t_m2;
  return cfg;
}

void GabpConfig::validate() const {
  if (lambda_max < 1) throw Error(ErrorKind::kInvalidArgument, "lambda_max must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::kInvalidArgument, "rho must be in [0, 1)");
  if (!(prior_var_theta > 0.0) || !(prior_var_t > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "prior variances must be positive");
  }
  if (!(convergence_tol >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "convergence_tol must be >= 0");
  if (!(variance_floor > 0.0)) throw Error(ErrorKind::kInvalidArgument, "variance_floor must be > 0");
}

GabpState init_state(const ParamSystem& sys, const GabpConfig& cfg) {
  cfg.validate();
  return initial_state(bivariate_graph(sys, cfg));
}

GabpState init_refinement_state(const ReducedSystem& sys, const GabpConfig& cfg) {
  cfg.validate();
  return initial_state(refinement_graph(sys, cfg));
}

// rho == 1 is allowed here (it freezes the replicas); only the driver
// requires rho < 1.
GabpState bivariate_iteration(GabpState state, const ParamSystem& sys, const GabpConfig& cfg) {
  return step(std::move(state), bivariate_graph(sys, cfg), cfg);
}

GabpState refinement_iteration(GabpState state, const ReducedSystem& sys, const GabpConfig& cfg) {
  return step(std::move(state), refinement_graph(sys, cfg), cfg);
}

ConsensusEstimate consensus(const GabpState& state, const ParamSystem& sys, const GabpConfig& cfg) {
  const Combined c = combine(state, bivariate_graph(sys, cfg));
  ConsensusEstimate out;
  out.theta = EulerAngles::from_vector(c.mean.head<3>());
  out.t = c.mean.tail<3>();
  out.theta_var = c.var.head<3>();
  out.t_var = c.var.tail<3>();
  out.likelihood_theta = c.likelihood.head<3>();
  out.likelihood_t = c.likelihood.tail<3>();
  out.iterations_used = state.iteration;
  return out;
}

ConsensusEstimate consensus(const GabpState& state, const ReducedSystem& sys, const GabpConfig& cfg) {
  const Combined c = combine(state, refinement_graph(sys, cfg));
  ConsensusEstimate out;
  out.theta = EulerAngles::from_vector(c.mean.head<3>());
  out.theta_var = c.var.head<3>();
  out.likelihood_theta = c.likelihood.head<3>();
  out.iterations_used = state.iteration;
  return out;
}

DoubleGabpResult run_double_gabp(const ParamSystem& sys, const GabpConfig& cfg) {
  cfg.validate();
  DoubleGabpResult result;

  const FactorGraph joint = bivariate_graph(sys, cfg);
  bool converged_a = false;
  GabpState a = iterate(initial_state(joint), joint, cfg, converged_a);
  result.stage_a = consensus(a, sys, cfg);
  result.stage_a.converged = converged_a;

  const ReducedSystem reduced = cancel_translation(sys, result.stage_a.t);
  const FactorGraph rotation_only = refinement_graph(reduced, cfg);
  bool converged_b = false;
  GabpState b = iterate(initial_state(rotation_only), rotation_only, cfg, converged_b);
  result.stage_b = consensus(b, reduced, cfg);
  result.stage_b.converged = converged_b;

  result.estimate = result.stage_b;
  result.estimate.t = result.stage_a.t;
  result.estimate.t_var = result.stage_a.t_var;
  result.estimate.likelihood_t = result.stage_a.likelihood_t;
  result.estimate.iterations_used = result.stage_a.iterations_used + result.stage_b.iterations_used;
  result.estimate.converged = converged_a && converged_b;
  return result;
}

DoubleGabpResult run_double_gabp_per_sensor(const ParamSystem& sys, const GabpConfig& cfg) {
  Eigen::Index sensors = 0;
  for (const RowIndex& r : sys.rows) sensors = std::max(sensors, r.sensor + 1);
  if (sensors == 0) throw Error(ErrorKind::kInvalidArgument, "empty parameter system");

  auto accumulate = [](ConsensusEstimate& into, const ConsensusEstimate& from, double w) {
    into.theta = EulerAngles::from_vector(into.theta.vector() + w * from.theta.vector());
    into.t += w * from.t;
    into.theta_var += w * w * from.theta_var;
    into.t_var += w * w * from.t_var;
    into.likelihood_theta += w * from.likelihood_theta;
    into.likelihood_t += w * from.likelihood_t;
    into.iterations_used += from.iterations_used;
    into.converged = into.converged && from.converged;
  };

  DoubleGabpResult out;
  out.estimate.converged = out.stage_a.converged = out.stage_b.converged = true;
  const double w = 1.0 / static_cast<double>(sensors);
  for (Eigen::Index n = 0; n < sensors; ++n) {
    const DoubleGabpResult one = run_double_gabp(sensor_rows(sys, n), cfg);
    accumulate(out.estimate, one.estimate, w);
    accumulate(out.stage_a, one.stage_a, w);
    accumulate(out.stage_b, one.stage_b, w);
  }
  return out;
}

GenieEstimate genie_bound(const ParamSystem& sys, const GroundTruth& truth,
                          const AnchorSet& anchors, const Conformation& C, const GabpConfig& cfg) {
  if (truth.S.cols() != C.cols() || sys.s_norm_sq.size() != C.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "genie_bound: truth and system sizes differ");
  }
  const Eigen::VectorXd noise = effective_row_variance(sys.row_noise_var, cfg.noise_mode);
  Eigen::Matrix<double, 6, 1> x_true;
  x_true << truth.angles.vector(), truth.t;

  // Squared-range noise d~^2 - d^2 per row, recovered from z by removing the
  // exact noise-free model and the norm provenance.
  Eigen::VectorXd eps(sys.size());
  for (Eigen::Index r = 0; r < sys.size(); ++r) {
    const RowIndex idx = sys.rows[static_cast<std::size_t>(r)];
    const Vec3 a = anchors.col(idx.anchor);
    const Vec3 c = C.col(idx.sensor);
    const Vec3 s = truth.S.col(idx.sensor);
    const double clean = (a - s).squaredNorm() - a.squaredNorm() - s.squaredNorm() + 2.0 * a.dot(c);
    eps(r) = sys.z(r) + sys.s_norm_sq(idx.sensor) - s.squaredNorm() - clean;
  }

  Eigen::Matrix<double, 6, 1> est;
  for (int k = 0; k < 6; ++k) {
    const double prior = k < 3 ? cfg.prior_var_theta : cfg.prior_var_t;
    double info = 0.0;
    double weighted = 0.0;
    for (Eigen::Index r = 0; r < sys.size(); ++r) {
      const double h = k < 3 ? sys.H_theta(r, k) : sys.H_t(r, k - 3);
      const double v = std::max(noise(r), cfg.variance_floor);
      info += h * h / v;
      weighted += h * (h * x_true(k) + eps(r)) / v;
    }
    est(k) = weighted / (info + 1.0 / prior);
  }
  return {est.head<3>(), est.tail<3>()};
}

}  // namespace rbl
