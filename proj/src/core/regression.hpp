#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/gaussian_bp.hpp"
#include "core/graph.hpp"
#include "core/random.hpp"

namespace colltrain {

/// Noisy sample of z = k x taken by the sensor at (pos_x, pos_y).
struct FieldObservation {
  double pos_x = 0.0;
  double pos_y = 0.0;
  double z_obs = 0.0;
};

struct RegressionConfig {
  std::size_t num_sensors = 50;
  double radius = 0.2;
  double true_slope = 1.0;
  double noise_scale = 1.0;  // noise variance at x is noise_scale^2 sin^2(2 pi x)
  std::size_t bootstrap_reps = 100;
  double lambda_sq = 1e-8;
  std::uint64_t seed = 7;
  std::size_t test_grid_size = 100;
  BpConfig bp{};
};

struct RoundMetrics {
  std::size_t round = 0;
  double test_error = 0.0;
  double estimate_variance = 0.0;
};

/// Variance assigned to sensors whose accessible data cannot identify a slope.
inline constexpr double kUninformativeVariance = 1e12;
inline constexpr double kBootstrapVarianceFloor = 1e-12;

/// Noise standard deviation at abscissa x: noise_scale |sin(2 pi x)|.
double noise_sd(double noise_scale, double x);

/// true_slope x plus one Gaussian draw scaled by noise_sd.
double observe_field(double x, const RegressionConfig& cfg, Rng& rng);

/// Positions uniform in the unit square (stream "regression/positions"),
/// noise from stream "regression/noise".
std::vector<FieldObservation> generate_field(const RegressionConfig& cfg);

/// Observation of s followed by those of its neighbors, in neighbor order.
std::vector<FieldObservation> accessible_data(std::span<const FieldObservation> obs,
                                              const Topology& topo, SensorId s);

/// Least squares through the origin: sum(x z) / sum(x^2). Throws
/// InvalidArgument when every x is zero.
double slope_through_origin(std::span<const FieldObservation> data);

struct SlopePotential {
  GaussianPotential potential;
  bool identifiable = true;
};

/// B resamples with replacement of the data, each fitted through the origin.
/// Mean and unbiased variance of those slopes, variance floored at 1e-12.
/// A resample whose x values are all zero is redrawn. Data whose x values
/// are all zero yields mean 0, variance kUninformativeVariance and
/// identifiable = false.
SlopePotential bootstrap_slope_potential(std::span<const FieldObservation> data,
                                         std::size_t reps, std::uint64_t seed);

/// Mean over the grid x = i/G, i = 0..G, of (k_hat x - k x)^2.
double slope_test_error(double estimate, double true_slope, std::size_t grid_size);

struct RegressionResult {
  Topology topology;
  std::vector<FieldObservation> observations;
  std::vector<GaussianPotential> potentials;
  std::vector<SensorId> unidentifiable;
  /// Round 0 uses the local potentials alone; round r >= 1 the marginals
  /// implied by the messages after r synchronous rounds.
  std::vector<RoundMetrics> rounds;
  std::vector<GaussianMarginal> marginals;
  BpReport report;
  double centralized_slope = 0.0;
  double centralized_test_error = 0.0;
};

/// Geometric topology over the field positions, bootstrap potentials from
/// accessible data (stream "regression/bootstrap", index s), Gaussian BP with
/// uniform smoothness cfg.lambda_sq, per-round metrics.
RegressionResult run_regression_experiment(const RegressionConfig& cfg);

/// Pooled least squares through the origin over all observations.
double centralized_baseline(std::span<const FieldObservation> obs);

}  // namespace colltrain
