#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rbl/gabp.hpp"
#include "rbl/position_estimator.hpp"
#include "rbl/scenario.hpp"

namespace rbl {

enum class Estimator { kDoubleGabp, kStageAGabp, kLsProcrustes, kGenie };
enum class Block { kRotation, kTranslation, kPosition };
enum class NormSource { kTrue, kEstimated };
enum class SystemLayout { kStacked, kPerSensor };

std::string_view to_string(Estimator e);
std::string_view to_string(Block b);
std::string_view to_string(NormSource s);
std::string_view to_string(SystemLayout l);
Estimator parse_estimator(std::string_view text);
Block parse_block(std::string_view text);
NormSource parse_norm_source(std::string_view text);
SystemLayout parse_layout(std::string_view text);

inline constexpr Block kAllBlocks[] = {Block::kRotation, Block::kTranslation, Block::kPosition};

struct ExperimentConfig {
  Scenario scenario = default_scenario();
  std::vector<double> sigmas = default_sigma_sweep();
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators = {Estimator::kDoubleGabp, Estimator::kStageAGabp,
                                       Estimator::kLsProcrustes, Estimator::kGenie};
  NormSource norm_source = NormSource::kEstimated;
  SystemLayout layout = SystemLayout::kStacked;
  /// Priors are taken from the scenario; the remaining fields are overrides.
  GabpConfig gabp;
  WeightMode position_weights = WeightMode::kCompositeNoise;
  /// Angle scale multiplier applied to every sampled rotation (1 = prior).
  double angle_scale = 1.0;
  unsigned threads = 1;

  /// GaBP configuration with the scenario's priors filled in.
  GabpConfig effective_gabp() const;
  void validate() const;
};

/// sqrt( (1/E) * sum_j |x^_j - x|^2 ). Throws on an empty list or a length
/// mismatch.
double compute_rmse(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth);

/// Per-estimator result of a single Monte-Carlo trial.
struct EstimatorOutcome {
  bool ok = false;
  std::string failure;
  Vec3 rotation_error_deg = Vec3::Zero();  ///< wrapped to [-180, 180]
  Vec3 translation_error = Vec3::Zero();   ///< [m]
  double position_sq_error = 0.0;          ///< sum over sensors of |s^_n - s_n|^2
  int iterations = 0;
  bool converged = true;
};

struct TrialOutcome {
  GroundTruth truth;
  std::vector<EstimatorOutcome> per_estimator;  ///< parallel to config.estimators
};

/// One trial at sigma index `sigma_index`: sample, simulate, pre-estimate,
/// build the systems and run every configured estimator. Deterministic in
/// (config, sigma_index, trial_index).
TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t sigma_index, std::size_t trial_index);

struct ReportRow {
  Estimator estimator = Estimator::kDoubleGabp;
  Block block = Block::kRotation;
  double sigma = 0.0;
  double rmse = 0.0;
  int trials = 0;    ///< attempted
  int failures = 0;  ///< attempted - succeeded
  double mean_iters = 0.0;
  double converged_frac = 0.0;
};

struct RmseReport {
  std::vector<ReportRow> rows;

  /// Throws if the row is absent.
  const ReportRow& at(Estimator e, Block b, double sigma) const;
  std::optional<ReportRow> find(Estimator e, Block b, double sigma) const;
};

/// Runs the full sweep. Rows are ordered by estimator (config order), block,
/// then sigma (config order).
RmseReport run_monte_carlo(const ExperimentConfig& cfg);

}  // namespace rbl
