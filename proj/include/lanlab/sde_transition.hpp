#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "lanlab/kde.hpp"
#include "lanlab/levy_noise.hpp"
#include "lanlab/sde_model.hpp"
#include "lanlab/transition_model.hpp"

namespace lanlab {

/// Densities below this are treated as zero before taking logs.
inline constexpr double kDensityFloor = 1e-300;

/// Transition model of the observed SDE with p estimated by a Gaussian KDE
/// over simulated endpoints and g by a central difference of log p in theta.
///
/// Without a frozen tape every `evaluate` call records a fresh noise tape from
/// its stream and replays it at all requested parameters. With a frozen tape
/// the estimates are deterministic functions of (theta, x, y), which makes
/// y-quadrature meaningful; endpoint batches are then cached per (theta, x).
class SdeTransitionModel final : public TransitionModel {
 public:
  SdeTransitionModel(std::shared_ptr<const DriftFamily> drift,
                     std::shared_ptr<const LevyNoise> noise, double h, double dt,
                     KdeScoreConfig cfg, std::shared_ptr<const NoiseTape> frozen = nullptr);

  /// Same model with every estimate driven by `tape`.
  SdeTransitionModel with_frozen_tape(std::shared_ptr<const NoiseTape> tape) const;

  ReferenceMeasure reference_measure() const override { return ReferenceMeasure::Lebesgue; }
  ParameterInterval theta_interval() const override { return drift_->theta_interval(); }
  bool is_exact() const override { return false; }
  double moment_limit() const override;

  TransitionEval evaluate(double theta, double x, double y, std::span<const double> shifted_thetas,
                          CounterStream& rng) const override;
  double sample_next(double theta, double x, CounterStream& rng) const override;
  DiscreteSample sample_path(double theta, double x0, std::size_t n,
                             CounterStream& rng) const override;
  /// Trapezoid grid covering the frozen-tape endpoints at (theta, x). Requires
  /// a frozen tape.
  std::vector<QuadratureNode> integration_nodes(double theta, double x) const override;

  const DriftFamily& drift() const noexcept { return *drift_; }
  const LevyNoise& noise() const noexcept { return *noise_; }
  const KdeScoreConfig& config() const noexcept { return cfg_; }
  double h() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }

 private:
  using Batch = std::shared_ptr<const std::vector<double>>;
  struct EndpointCache {
    std::shared_mutex mutex;
    std::map<std::pair<double, double>, Batch> batches;
  };

  Batch frozen_endpoints(double theta, double x) const;

  std::shared_ptr<const DriftFamily> drift_;
  std::shared_ptr<const LevyNoise> noise_;
  double h_;
  double dt_;
  KdeScoreConfig cfg_;
  std::shared_ptr<const NoiseTape> frozen_;
  std::shared_ptr<EndpointCache> cache_;
};

/// ghat(theta; x, y) from a fresh set of M simulated endpoints.
double estimated_score(const DriftFamily& drift, const LevyNoise& noise, double theta, double x,
                       double y, double h, double dt, const KdeScoreConfig& cfg,
                       CounterStream& rng);

}  // namespace lanlab
