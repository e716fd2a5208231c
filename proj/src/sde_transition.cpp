#include "lanlab/sde_transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "lanlab/errors.hpp"

namespace lanlab {

namespace {

const double kLogFloor = std::log(kDensityFloor);

void require_inside(const ParameterInterval& interval, double theta, const char* what) {
  if (!interval.contains(theta)) {
    std::ostringstream msg;
    msg << what << ": theta = " << theta << " outside (" << interval.lo << ", " << interval.hi
        << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

SdeTransitionModel::SdeTransitionModel(std::shared_ptr<const DriftFamily> drift,
                                       std::shared_ptr<const LevyNoise> noise, double h, double dt,
                                       KdeScoreConfig cfg, std::shared_ptr<const NoiseTape> frozen)
    : drift_(std::move(drift)),
      noise_(std::move(noise)),
      h_(h),
      dt_(dt),
      cfg_(cfg),
      frozen_(std::move(frozen)),
      cache_(std::make_shared<EndpointCache>()) {
  if (!drift_ || !noise_) throw std::invalid_argument("SdeTransitionModel: null drift or noise");
  if (!(h_ > 0.0) || !(dt_ > 0.0)) throw InvalidScheme("SdeTransitionModel: need h, dt > 0");
  if (cfg_.M < 100) throw std::invalid_argument("KdeScoreConfig: M must be >= 100");
  if (!(cfg_.fd_step > 0.0)) throw std::invalid_argument("KdeScoreConfig: fd_step must be > 0");
  if (frozen_ && frozen_->cells() != cells_per_step(h_, dt_)) {
    throw std::invalid_argument("SdeTransitionModel: frozen tape has a different cell count");
  }
}

SdeTransitionModel SdeTransitionModel::with_frozen_tape(
    std::shared_ptr<const NoiseTape> tape) const {
  KdeScoreConfig cfg = cfg_;
  cfg.M = std::max<std::size_t>(cfg.M, tape->samples());
  SdeTransitionModel out(drift_, noise_, h_, dt_, cfg, std::move(tape));
  return out;
}

double SdeTransitionModel::moment_limit() const {
  return 4.0 + noise_->measure().spec().beta;
}

SdeTransitionModel::Batch SdeTransitionModel::frozen_endpoints(double theta, double x) const {
  const auto key = std::make_pair(theta, x);
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->batches.find(key);
    if (it != cache_->batches.end()) return it->second;
  }
  auto batch = std::make_shared<std::vector<double>>(frozen_->samples());
  replay_endpoints(*drift_, theta, x, *frozen_, *batch);
  std::unique_lock lock(cache_->mutex);
  auto [it, inserted] = cache_->batches.emplace(key, std::move(batch));
  return it->second;
}

TransitionEval SdeTransitionModel::evaluate(double theta, double x, double y,
                                            std::span<const double> shifted_thetas,
                                            CounterStream& rng) const {
  const ParameterInterval& interval = drift_->theta_interval();
  const double d = cfg_.fd_step;
  // Layout: theta, theta - d, theta + d, [theta - 2d, theta + 2d], shifted...
  std::vector<double> thetas{theta, theta - d, theta + d};
  if (cfg_.richardson) {
    thetas.push_back(theta - 2.0 * d);
    thetas.push_back(theta + 2.0 * d);
  }
  for (double t : thetas) require_inside(interval, t, "estimated score");
  const std::size_t n_base = thetas.size();
  for (double t : shifted_thetas) {
    require_inside(interval, t, "shifted density");
    thetas.push_back(t);
  }

  std::vector<Batch> batches(thetas.size());
  if (frozen_) {
    for (std::size_t i = 0; i < thetas.size(); ++i) batches[i] = frozen_endpoints(thetas[i], x);
  } else {
    NoiseTape tape = NoiseTape::record(*noise_, h_, dt_, cfg_.M, rng);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      if (i > 0 && !cfg_.common_random_numbers) {
        tape = NoiseTape::record(*noise_, h_, dt_, cfg_.M, rng);
      }
      auto out = std::make_shared<std::vector<double>>(cfg_.M);
      replay_endpoints(*drift_, thetas[i], x, tape, *out);
      batches[i] = std::move(out);
    }
  }

  const double b = select_bandwidth(*batches[0], cfg_);
  std::vector<double> logs(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) logs[i] = log_kde(*batches[i], y, b, cfg_.log_bias_correction);
  for (std::size_t i = 0; i < n_base; ++i) {
    if (!(logs[i] >= kLogFloor)) {
      std::ostringstream msg;
      msg << "estimated density below floor at y = " << y << " (x = " << x
          << ", theta = " << thetas[i] << ")";
      throw ScoreUndefined(y, msg.str());
    }
  }

  TransitionEval out;
  out.log_density = logs[0];
  const double d1 = (logs[2] - logs[1]) / (2.0 * d);
  if (cfg_.richardson) {
    const double d2 = (logs[4] - logs[3]) / (4.0 * d);
    out.score = (4.0 * d1 - d2) / 3.0;
  } else {
    out.score = d1;
  }
  out.score_derivative = (logs[2] - 2.0 * logs[0] + logs[1]) / (d * d);
  out.shifted_log_densities.reserve(shifted_thetas.size());
  for (std::size_t i = n_base; i < thetas.size(); ++i) {
    out.shifted_log_densities.push_back(logs[i] >= kLogFloor
                                            ? logs[i]
                                            : -std::numeric_limits<double>::infinity());
  }
  return out;
}

double SdeTransitionModel::sample_next(double theta, double x, CounterStream& rng) const {
  require_inside(drift_->theta_interval(), theta, "sample_next");
  const NoiseTape tape = NoiseTape::record(*noise_, h_, dt_, 1, rng);
  double out = 0.0;
  replay_endpoints(*drift_, theta, x, tape, std::span<double>(&out, 1));
  return out;
}

DiscreteSample SdeTransitionModel::sample_path(double theta, double x0, std::size_t n,
                                               CounterStream& rng) const {
  const double cell = h_ / static_cast<double>(cells_per_step(h_, dt_));
  const Path path = simulate_path(*drift_, theta, *noise_, x0, h_ * static_cast<double>(n), cell, rng);
  return observe(path, ObservationScheme{h_, n, x0});
}

std::vector<QuadratureNode> SdeTransitionModel::integration_nodes(double theta, double x) const {
  if (!frozen_) {
    throw std::logic_error("integration_nodes: Lebesgue quadrature needs a frozen noise tape");
  }
  const Batch batch = frozen_endpoints(theta, x);
  const auto [lo_it, hi_it] = std::minmax_element(batch->begin(), batch->end());
  const double b = select_bandwidth(*batch, cfg_);
  const double lo = *lo_it - 10.0 * b;
  const double hi = *hi_it + 10.0 * b;
  const std::size_t count = 4001;
  const double step = (hi - lo) / static_cast<double>(count - 1);
  std::vector<QuadratureNode> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    nodes[i].y = lo + step * static_cast<double>(i);
    nodes[i].weight = (i == 0 || i + 1 == count) ? 0.5 * step : step;
  }
  return nodes;
}

double estimated_score(const DriftFamily& drift, const LevyNoise& noise, double theta, double x,
                       double y, double h, double dt, const KdeScoreConfig& cfg,
                       CounterStream& rng) {
  const SdeTransitionModel model(
      std::shared_ptr<const DriftFamily>(&drift, [](const DriftFamily*) {}),
      std::shared_ptr<const LevyNoise>(&noise, [](const LevyNoise*) {}), h, dt, cfg);
  return model.evaluate(theta, x, y, {}, rng).score;
}

}  // namespace lanlab
