#include "core/discrete_bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"

namespace colltrain {
namespace {

// Messages and beliefs are kept as log-weights, shifted so the larger entry
// is 0. Products of many tiny likelihoods therefore never underflow, and a
// zero weight is represented exactly by -inf.
using Msg = std::array<double, 2>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize(Msg& m) {
  const double hi = std::max(m[0], m[1]);
  if (hi == kNegInf) return;
  m[0] -= hi;
  m[1] -= hi;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void absorb(Msg& acc, const Msg& m) {
  acc[0] += m[0];
  acc[1] += m[1];
  normalize(acc);
}

}  // namespace

std::vector<std::array<double, 2>> discrete_bp_marginals(
    const Topology& topo, std::span<const DiscretePotential> potentials, double relaxation) {
  const std::size_t m = topo.num_sensors();
  if (potentials.size() != m) {
    throw InvalidArgument("discrete bp: need one potential per sensor");
  }
  if (!(relaxation >= 0.0 && relaxation <= 1.0)) {
    throw InvalidArgument("discrete bp: relaxation must lie in [0, 1]");
  }
  for (std::size_t s = 0; s < m; ++s) {
    const auto& p = potentials[s];
    if (!(p.weight0 >= 0.0) || !(p.weight1 >= 0.0) || !(p.weight0 + p.weight1 > 0.0) ||
        !std::isfinite(p.weight0 + p.weight1)) {
      throw InvalidArgument("discrete bp: sensor " + std::to_string(s) +
                            " needs finite non-negative weights with positive sum");
    }
  }
  if (!topo.is_tree()) {
    throw LoopyGraphError("discrete bp: exact inference requires a loop-free topology");
  }

  // Root every component at its lowest sensor; BFS order gives parents first.
  constexpr auto kNone = static_cast<SensorId>(-1);
  std::vector<SensorId> parent(m, kNone);
  std::vector<bool> seen(m, false);
  std::vector<SensorId> order;
  order.reserve(m);
  for (SensorId root = 0; root < m; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::size_t head = order.size();
    order.push_back(root);
    while (head < order.size()) {
      SensorId u = order[head++];
      for (SensorId v : topo.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          parent[v] = u;
          order.push_back(v);
        }
      }
    }
  }

  auto local = [&](SensorId s) {
    Msg out{std::log(potentials[s].weight0), std::log(potentials[s].weight1)};
    normalize(out);
    return out;
  };
  const double log_d = std::log(relaxation);
  auto through_edge = [&](const Msg& belief) {
    Msg out{log_add(belief[0], log_d + belief[1]), log_add(log_d + belief[0], belief[1])};
    normalize(out);
    return out;
  };

  // up[v]: message v -> parent(v). down[v]: message parent(v) -> v.
  std::vector<Msg> up(m, Msg{0.0, 0.0});
  std::vector<Msg> down(m, Msg{0.0, 0.0});
  std::vector<Msg> inward(m);  // local potential times all messages from children
  for (SensorId s = 0; s < m; ++s) inward[s] = local(s);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const SensorId v = *it;
    if (parent[v] == kNone) continue;
    up[v] = through_edge(inward[v]);
    absorb(inward[parent[v]], up[v]);
  }

  std::vector<Msg> marginal(m);
  for (SensorId v : order) {
    Msg belief = inward[v];
    if (parent[v] != kNone) absorb(belief, down[v]);
    marginal[v] = belief;
    for (SensorId c : topo.neighbors(v)) {
      if (parent[c] != v) continue;
      // Everything v knows except what came from c.
      Msg excl = local(v);
      if (parent[v] != kNone) absorb(excl, down[v]);
      for (SensorId other : topo.neighbors(v)) {
        if (other != c && parent[other] == v) absorb(excl, up[other]);
      }
      down[c] = through_edge(excl);
    }
  }
  return marginal;
}

std::vector<Hypothesis> discrete_bp_map(const Topology& topo,
                                        std::span<const DiscretePotential> potentials,
                                        double relaxation) {
  const auto marginals = discrete_bp_marginals(topo, potentials, relaxation);
  std::vector<Hypothesis> out(marginals.size());
  for (std::size_t s = 0; s < marginals.size(); ++s) {
    out[s] = marginals[s][1] > marginals[s][0] ? Hypothesis::kH1 : Hypothesis::kH0;
  }
  return out;
}

}  // namespace colltrain
