#include "core/regression.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain {

double noise_sd(double noise_scale, double x) {
  return noise_scale * std::abs(std::sin(2.0 * std::numbers::pi * x));
}

double observe_field(double x, const RegressionConfig& cfg, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  return cfg.true_slope * x + noise_sd(cfg.noise_scale, x) * gauss(rng);
}

std::vector<FieldObservation> generate_field(const RegressionConfig& cfg) {
  if (cfg.num_sensors < 1) throw InvalidArgument("regression: need at least one sensor");
  Rng pos_rng(derive_seed(cfg.seed, "regression/positions"));
  Rng noise_rng(derive_seed(cfg.seed, "regression/noise"));
  std::vector<FieldObservation> out(cfg.num_sensors);
  for (auto& o : out) {
    o.pos_x = uniform01(pos_rng);
    o.pos_y = uniform01(pos_rng);
  }
  for (auto& o : out) o.z_obs = observe_field(o.pos_x, cfg, noise_rng);
  return out;
}

std::vector<FieldObservation> accessible_data(std::span<const FieldObservation> obs,
                                              const Topology& topo, SensorId s) {
  if (obs.size() != topo.num_sensors()) {
    throw InvalidArgument("accessible_data: observation count does not match topology");
  }
  const auto nbrs = topo.neighbors(s);
  std::vector<FieldObservation> out{obs[s]};
  for (SensorId t : nbrs) out.push_back(obs[t]);
  return out;
}

double slope_through_origin(std::span<const FieldObservation> data) {
  double sxz = 0.0, sxx = 0.0;
  for (const auto& o : data) {
    sxz += o.pos_x * o.z_obs;
    sxx += o.pos_x * o.pos_x;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("slope unidentifiable: every x is zero");
  return sxz / sxx;
}

SlopePotential bootstrap_slope_potential(std::span<const FieldObservation> data,
                                         std::size_t reps, std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("bootstrap_slope_potential: empty data");
  if (reps < 2) throw InvalidArgument("bootstrap_slope_potential: need at least 2 resamples");
  bool any_x = false;
  for (const auto& o : data) any_x |= o.pos_x != 0.0;
  if (!any_x) return {GaussianPotential{0.0, kUninformativeVariance}, false};

  Rng rng(seed);
  const std::size_t n = data.size();
  std::vector<double> slopes;
  slopes.reserve(reps);
  while (slopes.size() < reps) {
    double sxz = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = data[uniform_index(rng, n)];
      sxz += o.pos_x * o.z_obs;
      sxx += o.pos_x * o.pos_x;
    }
    if (sxx > 0.0) slopes.push_back(sxz / sxx);
  }
  double mean = 0.0;
  for (double k : slopes) mean += k;
  mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double k : slopes) ss += (k - mean) * (k - mean);
  const double var = std::max(ss / static_cast<double>(reps - 1), kBootstrapVarianceFloor);
  return {GaussianPotential{mean, var}, true};
}

double slope_test_error(double estimate, double true_slope, std::size_t grid_size) {
  if (grid_size == 0) throw InvalidArgument("slope_test_error: grid size must be >= 1");
  const double d = estimate - true_slope;
  double sum = 0.0;
  for (std::size_t i = 0; i <= grid_size; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid_size);
    sum += (d * x) * (d * x);
  }
  return sum / static_cast<double>(grid_size + 1);
}

namespace {

template <class Estimates>
RoundMetrics metrics_of(std::size_t round, const Estimates& means, const RegressionConfig& cfg) {
  RoundMetrics m{round, 0.0, 0.0};
  const double n = static_cast<double>(means.size());
  double avg = 0.0;
  for (double k : means) {
    m.test_error += slope_test_error(k, cfg.true_slope, cfg.test_grid_size);
    avg += k;
  }
  m.test_error /= n;
  avg /= n;
  for (double k : means) m.estimate_variance += (k - avg) * (k - avg);
  m.estimate_variance /= n;
  return m;
}

}  // namespace

RegressionResult run_regression_experiment(const RegressionConfig& cfg) {
  if (cfg.bootstrap_reps < 2) throw InvalidArgument("regression: bootstrap_reps must be >= 2");
  if (!(cfg.radius >= 0.0)) throw InvalidArgument("regression: radius must be >= 0");
  if (!(cfg.lambda_sq >= 0.0)) throw InvalidArgument("regression: lambda_sq must be >= 0");

  RegressionResult res;
  res.observations = generate_field(cfg);
  std::vector<Point> pos;
  for (const auto& o : res.observations) pos.push_back(Point{o.pos_x, o.pos_y});
  res.topology = Topology::from_positions(std::move(pos), cfg.radius);

  for (SensorId s = 0; s < cfg.num_sensors; ++s) {
    const auto data = accessible_data(res.observations, res.topology, s);
    const auto sp = bootstrap_slope_potential(data, cfg.bootstrap_reps,
                                              derive_seed(cfg.seed, "regression/bootstrap", s));
    res.potentials.push_back(sp.potential);
    if (!sp.identifiable) res.unidentifiable.push_back(s);
  }

  std::vector<double> means;
  for (const auto& p : res.potentials) means.push_back(p.mean);
  res.rounds.push_back(metrics_of(0, means, cfg));

  const std::vector<EdgeSmoothness> smooth(res.topology.num_edges(), EdgeSmoothness{cfg.lambda_sq});
  auto observer = [&](std::size_t round, std::span<const GaussianMarginal> marg) {
    std::vector<double> est;
    for (const auto& m : marg) est.push_back(map_estimate(m));
    res.rounds.push_back(metrics_of(round, est, cfg));
  };
  BpResult bp = run_gaussian_bp(res.topology, res.potentials, smooth, cfg.bp, observer);
  res.marginals = std::move(bp.marginals);
  res.report = std::move(bp.report);

  res.centralized_slope = centralized_baseline(res.observations);
  res.centralized_test_error =
      slope_test_error(res.centralized_slope, cfg.true_slope, cfg.test_grid_size);
  return res;
}

double centralized_baseline(std::span<const FieldObservation> obs) {
  return slope_through_origin(obs);
}

}  // namespace colltrain
