#include "core/gaussian_bp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace colltrain {
namespace {

void check_potential(const GaussianPotential& p, std::size_t s) {
  if (!std::isfinite(p.mean) || !(p.variance > 0.0) || !std::isfinite(p.variance)) {
    throw InvalidArgument("gaussian bp: potential of sensor " + std::to_string(s) +
                          " needs finite mean and finite positive variance");
  }
}

// Directed edge slots: 2e carries a -> b, 2e + 1 carries b -> a for edge e = {a, b}.
struct Port {
  SensorId neighbor;
  std::size_t in_slot;   // neighbor -> self
  std::size_t out_slot;  // self -> neighbor
  std::size_t edge;
};

std::vector<std::vector<Port>> build_ports(const Topology& topo) {
  std::vector<std::vector<Port>> ports(topo.num_sensors());
  const auto edges = topo.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    ports[edges[e].a].push_back(Port{edges[e].b, 2 * e + 1, 2 * e, e});
    ports[edges[e].b].push_back(Port{edges[e].a, 2 * e, 2 * e + 1, e});
  }
  for (auto& p : ports) {
    std::sort(p.begin(), p.end(),
              [](const Port& x, const Port& y) { return x.neighbor < y.neighbor; });
  }
  return ports;
}

}  // namespace

GaussianMessage gaussian_message_update(const GaussianPotential& local,
                                        std::span<const GaussianMessage> incoming,
                                        EdgeSmoothness edge) {
  double precision = 1.0 / local.variance;
  double weighted = local.mean / local.variance;
  for (const GaussianMessage& m : incoming) {
    precision += 1.0 / m.variance;
    weighted += m.mean / m.variance;
  }
  GaussianMessage out{weighted / precision, edge.lambda_sq + 1.0 / precision};
  if (!std::isfinite(out.mean) || !std::isfinite(out.variance) || !(out.variance > 0.0)) {
    throw NumericalError("non-finite gaussian message");
  }
  return out;
}

GaussianMarginal gaussian_marginal(const GaussianPotential& local,
                                   std::span<const GaussianMessage> incoming) {
  const GaussianMessage fused = gaussian_message_update(local, incoming, EdgeSmoothness{0.0});
  return GaussianMarginal{fused.mean, fused.variance};
}

BpResult run_gaussian_bp(const Topology& topo, std::span<const GaussianPotential> potentials,
                         std::span<const EdgeSmoothness> smoothness, const BpConfig& cfg,
                         const BpRoundObserver& observer) {
  const std::size_t m = topo.num_sensors();
  if (potentials.size() != m) {
    throw InvalidArgument("gaussian bp: need one potential per sensor");
  }
  if (smoothness.size() != topo.num_edges()) {
    throw InvalidArgument("gaussian bp: need one smoothness value per edge");
  }
  if (cfg.max_rounds < 1) throw InvalidArgument("gaussian bp: max_rounds must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) {
    throw InvalidArgument("gaussian bp: convergence_tol must be > 0");
  }
  if (!(cfg.initial_message.variance > 0.0) || !std::isfinite(cfg.initial_message.variance)) {
    throw InvalidArgument("gaussian bp: initial message variance must be finite and > 0");
  }
  for (std::size_t s = 0; s < m; ++s) check_potential(potentials[s], s);
  for (std::size_t e = 0; e < smoothness.size(); ++e) {
    if (!(smoothness[e].lambda_sq >= 0.0) || !std::isfinite(smoothness[e].lambda_sq)) {
      throw InvalidArgument("gaussian bp: lambda_sq of edge " + std::to_string(e) +
                            " must be finite and >= 0");
    }
  }

  const auto ports = build_ports(topo);
  const std::size_t slots = 2 * topo.num_edges();
  std::vector<GaussianMessage> current(slots, cfg.initial_message);
  std::vector<GaussianMessage> next = current;
  std::vector<GaussianMessage> scratch;

  auto compute = [&](SensorId t, const Port& out, const std::vector<GaussianMessage>& table) {
    scratch.clear();
    for (const Port& p : ports[t]) {
      if (p.neighbor != out.neighbor) scratch.push_back(table[p.in_slot]);
    }
    try {
      return gaussian_message_update(potentials[t], scratch, smoothness[out.edge]);
    } catch (const NumericalError&) {
      throw NumericalError("gaussian bp: non-finite message on edge " + std::to_string(t) +
                           " -> " + std::to_string(out.neighbor));
    }
  };

  auto marginals_of = [&](const std::vector<GaussianMessage>& table) {
    std::vector<GaussianMarginal> out(m);
    std::vector<GaussianMessage> in;
    for (SensorId t = 0; t < m; ++t) {
      in.clear();
      for (const Port& p : ports[t]) in.push_back(table[p.in_slot]);
      out[t] = gaussian_marginal(potentials[t], in);
    }
    return out;
  };

  BpResult result;
  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    double delta = 0.0;
    if (cfg.schedule == BpSchedule::kSynchronous) {
      for (SensorId t = 0; t < m; ++t) {
        for (const Port& out : ports[t]) next[out.out_slot] = compute(t, out, current);
      }
      for (std::size_t i = 0; i < slots; ++i) {
        delta = std::max(delta, std::abs(next[i].mean - current[i].mean) +
                                    std::abs(next[i].variance - current[i].variance));
      }
      current.swap(next);
    } else {
      for (SensorId t = 0; t < m; ++t) {
        for (const Port& out : ports[t]) {
          const GaussianMessage updated = compute(t, out, current);
          GaussianMessage& slot = current[out.out_slot];
          delta = std::max(delta, std::abs(updated.mean - slot.mean) +
                                      std::abs(updated.variance - slot.variance));
          slot = updated;
        }
      }
    }
    result.report.rounds = round;
    result.report.delta_trace.push_back(delta);
    if (observer) observer(round, marginals_of(current));
    if (delta < cfg.convergence_tol) {
      result.report.converged = true;
      break;
    }
  }
  result.marginals = marginals_of(current);
  return result;
}

double precision_weighted_average(std::span<const GaussianPotential> potentials) {
  if (potentials.empty()) {
    throw InvalidArgument("precision_weighted_average: empty potential list");
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : potentials) {
    num += p.mean / p.variance;
    den += 1.0 / p.variance;
  }
  return num / den;
}

}  // namespace colltrain
