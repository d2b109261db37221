#include "queuetoll/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace queuetoll {

namespace {

void check_dims(const SystemSpec& spec, const RoutingMatrix& routing) {
  if (routing.num_classes() != spec.num_classes() || routing.num_queues() != spec.num_queues())
    throw std::invalid_argument("routing matrix dimensions do not match the spec");
}

}  // namespace

FlowVector aggregate_rates(const SystemSpec& spec, const RoutingMatrix& routing) {
  check_dims(spec, routing);
  FlowVector f;
  f.gamma.assign(spec.num_queues(), 0.0);
  for (int i = 0; i < spec.num_classes(); ++i) {
    const double w = spec.work_rate(i);
    for (int j = 0; j < spec.num_queues(); ++j) f.gamma[j] += w * routing(i, j);
  }
  return f;
}

double social_cost(const SystemSpec& spec, const RoutingMatrix& routing) {
  check_dims(spec, routing);
  const FlowVector flows = aggregate_rates(spec, routing);
  double total = 0.0;
  for (int j = 0; j < spec.num_queues(); ++j) {
    double class_weight = 0.0;  // sum_i sensitivity_i * size_i * rate_i * p_ij
    for (int i = 0; i < spec.num_classes(); ++i) {
      const auto& c = spec.cls(i);
      class_weight += c.sensitivity * c.mean_job_size * c.rate * routing(i, j);
    }
    if (class_weight == 0.0) continue;  // nothing routed here, cost irrelevant
    const double d = spec.queue(j).cost(flows.gamma[j]);
    if (d == kInfiniteCost) return kInfiniteCost;
    total += class_weight * d;
  }
  return total;
}

Matrix social_cost_gradient(const SystemSpec& spec, const RoutingMatrix& routing) {
  check_dims(spec, routing);
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  const FlowVector flows = aggregate_rates(spec, routing);

  std::vector<double> delay(n), marginal(n), externality(n);
  for (int j = 0; j < n; ++j) {
    delay[j] = spec.queue(j).cost(flows.gamma[j]);
    marginal[j] = spec.queue(j).derivative(flows.gamma[j]);
    if (delay[j] == kInfiniteCost || marginal[j] == kInfiniteCost)
      throw std::invalid_argument("social_cost_gradient: routing saturates queue " +
                                  std::to_string(j));
    double w = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& c = spec.cls(i);
      w += c.sensitivity * c.mean_job_size * c.rate * routing(i, j);
    }
    externality[j] = w * marginal[j];
  }

  Matrix g(m, n);
  for (int i = 0; i < m; ++i) {
    const auto& c = spec.cls(i);
    const double own = c.sensitivity * c.mean_job_size * c.rate;
    const double work = c.rate * c.mean_job_size;
    for (int j = 0; j < n; ++j) g(i, j) = own * delay[j] + work * externality[j];
  }
  return g;
}

SystemSpec effective_spec(const SystemSpec& spec) {
  std::vector<ClassSpec> scaled;
  scaled.reserve(spec.num_classes());
  for (const auto& c : spec.classes())
    scaled.push_back({c.rate * c.mean_job_size, c.sensitivity * c.mean_job_size, 1.0});
  std::stable_sort(scaled.begin(), scaled.end(),
                   [](const ClassSpec& a, const ClassSpec& b) {
                     return a.sensitivity > b.sensitivity;
                   });
  for (std::size_t i = 1; i < scaled.size(); ++i)
    if (scaled[i - 1].sensitivity == scaled[i].sensitivity)
      throw std::invalid_argument(
          "effective_spec: scaled sensitivities tie exactly; merge the classes instead");
  return {std::move(scaled), spec.queues()};
}

SystemSpec permute_queues(const SystemSpec& spec, std::span<const int> order) {
  if (static_cast<int>(order.size()) != spec.num_queues())
    throw std::invalid_argument("permute_queues: order length mismatch");
  std::vector<CostModel> queues;
  queues.reserve(order.size());
  std::vector<char> seen(order.size(), 0);
  for (int src : order) {
    if (src < 0 || src >= spec.num_queues() || seen[src])
      throw std::invalid_argument("permute_queues: not a permutation");
    seen[src] = 1;
    queues.push_back(spec.queue(src));
  }
  return {spec.classes(), std::move(queues)};
}

RoutingMatrix permute_columns(const RoutingMatrix& routing, std::span<const int> order) {
  if (static_cast<int>(order.size()) != routing.num_queues())
    throw std::invalid_argument("permute_columns: order length mismatch");
  std::vector<double> d;
  d.reserve(routing.data().size());
  for (int i = 0; i < routing.num_classes(); ++i)
    for (int k = 0; k < routing.num_queues(); ++k) d.push_back(routing(i, order[k]));
  return {std::move(d), routing.num_classes(), routing.num_queues()};
}

}  // namespace queuetoll
