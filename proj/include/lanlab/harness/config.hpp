#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lanlab/finite_chain.hpp"
#include "lanlab/kde.hpp"
#include "lanlab/lan_analysis.hpp"
#include "lanlab/levy_noise.hpp"
#include "lanlab/sde_model.hpp"
#include "lanlab/sde_transition.hpp"

namespace lanlab::harness {

enum class ModelType { Chain, Sde };

struct ChainConfig {
  /// "symmetric_two_state", "softmax_three_state" or "constant".
  std::string name = "symmetric_two_state";
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<std::vector<double>> matrix;
};

struct NoiseConfig {
  LevyMeasureSpec spec;
  IncrementSamplerConfig sampler;
  /// When no delta_trunc is given, delta comes from choose_truncation(h, tol).
  bool delta_given = false;
  double truncation_tol = 1e-6;
};

struct DriftConfig {
  /// "affine" or "sine_perturbed".
  std::string name = "affine";
  double b0 = 0.0;
  ParameterInterval theta_interval{0.1, 3.0};
  ParameterInterval theta_window{0.5, 1.5};
};

struct ModelConfig {
  ModelType type = ModelType::Chain;
  ChainConfig chain;
  NoiseConfig noise;
  DriftConfig drift;
  std::size_t steps_per_h = 16;
};

struct SchemeConfig {
  double h = 0.5;
  std::size_t n = 1000;
  std::vector<std::size_t> n_grid;
  double x0 = 0.0;
};

struct LanConfig {
  std::vector<double> u_list{-2.0, -1.0, 1.0, 2.0};
  std::size_t R = 200;
  double p_exponent = 4.0;
  double N_sup = 2.0;
  std::size_t v_points = 17;
  FisherMode fisher_mode = FisherMode::Exact;
  std::size_t fisher_R = 200;
  std::size_t condition_R = 200;
  double max_discard_fraction = 0.05;
  /// Extra sample sizes for the Psi_n-against-n figure; scheme.n is always run.
  std::vector<std::size_t> psi_n_grid;
};

struct EstimationConfig {
  KdeScoreConfig kde;
  /// Draws for the score martingale residual.
  std::size_t martingale_M = 100000;
};

struct ErgodicsConfig {
  std::vector<double> T_list{250.0, 500.0, 1000.0, 2000.0};
  std::vector<std::size_t> batch_lens{100, 200, 400, 800};
  std::vector<std::size_t> lag_grid{1, 2, 3, 4, 5, 6, 8, 10};
  std::vector<double> p_list{1.0, 2.0, 4.0};
  /// Observations in the stationary sample used by sigma2 / batch means / mixing.
  std::size_t path_length = 100000;
  double burn_in_fraction = 0.1;
  /// Growth grid for I_n / n.
  std::vector<std::size_t> fisher_n_grid;
};

struct ChecksConfig {
  std::optional<double> beta;
  std::vector<double> c0_probe_grid{0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> eps_grid{1e-1, 1e-2, 1e-3};
  std::vector<double> x_grid;
  std::vector<double> theta_grid;
  double radius = 1.0;
  /// Moment check: exponent, time grid and path count.
  double moment_p = 3.0;
  std::vector<double> moment_t_grid{1.0, 5.0, 20.0};
  std::size_t moment_paths = 2000;
};

struct ExperimentConfig {
  ModelConfig model;
  double theta0 = 0.3;
  SchemeConfig scheme;
  LanConfig lan;
  EstimationConfig estimation;
  ErgodicsConfig ergodics;
  ChecksConfig checks;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  /// Exact bytes the configuration was parsed from.
  std::string source;
};

/// Parses and validates a configuration. Throws ConfigError naming the
/// offending JSON path, with line and column for syntax errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Model objects built from a configuration.
struct BuiltModel {
  std::shared_ptr<const TransitionModel> model;
  /// Set for chain models.
  std::shared_ptr<const FiniteChainModel> chain;
  /// Set for SDE models.
  std::shared_ptr<const SdeTransitionModel> sde;
  std::shared_ptr<const DriftFamily> drift;
  std::shared_ptr<const LevyNoise> noise;
};

BuiltModel build_model(const ExperimentConfig& config);

}  // namespace lanlab::harness
