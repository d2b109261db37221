#include "queuetoll/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "queuetoll/wardrop.hpp"

namespace queuetoll {

PriceVector QueuePrices::sorted_prices() const {
  if (!strictly_decreasing)
    throw std::invalid_argument(
        "QueuePrices: prices are not strictly decreasing in delay order (routing is not an "
        "interior optimum)");
  std::vector<double> used;
  used.reserve(sorted.size() - unused_queues.size());
  for (std::size_t k = 0; k + unused_queues.size() < sorted.size(); ++k)
    used.push_back(sorted[k]);
  return PriceVector(std::move(used));
}

QueuePrices pigouvian_prices(const SystemSpec& spec, const RoutingMatrix& routing) {
  if (routing.num_classes() != spec.num_classes() || routing.num_queues() != spec.num_queues())
    throw std::invalid_argument("pigouvian_prices: routing dimensions mismatch");
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  const FlowVector flows = aggregate_rates(spec, routing);

  QueuePrices out;
  out.by_queue.assign(n, 0.0);
  std::vector<double> delay(n);
  std::vector<bool> unused(n, false);
  for (int j = 0; j < n; ++j) {
    if (flows.gamma[j] >= spec.queue(j).capacity())
      throw std::invalid_argument("pigouvian_prices: queue " + std::to_string(j) +
                                  " is at or beyond capacity");
    delay[j] = spec.queue(j).cost(flows.gamma[j]);
    double weight = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& c = spec.cls(i);
      weight += c.sensitivity * c.mean_job_size * c.rate * routing(i, j);
    }
    if (weight == 0.0) {
      unused[j] = true;
      out.unused_queues.push_back(j);
      continue;
    }
    out.by_queue[j] = weight * spec.queue(j).derivative(flows.gamma[j]);
  }

  // Used queues by ascending delay (ties broken by index), unused last.
  out.delay_order.resize(n);
  std::iota(out.delay_order.begin(), out.delay_order.end(), 0);
  std::sort(out.delay_order.begin(), out.delay_order.end(), [&](int a, int b) {
    if (unused[a] != unused[b]) return !unused[a];
    if (delay[a] != delay[b]) return delay[a] < delay[b];
    return a < b;
  });
  out.sorted.reserve(n);
  for (int j : out.delay_order) out.sorted.push_back(out.by_queue[j]);

  out.strictly_decreasing = true;
  const std::size_t used_count = out.sorted.size() - out.unused_queues.size();
  for (std::size_t k = 1; k < used_count; ++k)
    if (!(out.sorted[k - 1] > out.sorted[k])) out.strictly_decreasing = false;
  return out;
}

Certification certify_prices(const SystemSpec& spec, const RoutingMatrix& routing,
                             std::span<const double> prices_by_queue, double tol,
                             double support_tol) {
  const double r = wardrop_residual(spec, prices_by_queue, routing, support_tol);
  return {r <= tol, r, tol};
}

Certification certify_prices(const SystemSpec& spec, const RoutingMatrix& routing,
                             const QueuePrices& prices, double tol, double support_tol) {
  return certify_prices(spec, routing, std::span<const double>(prices.by_queue), tol,
                        support_tol);
}

PriceVector price_shift(const PriceVector& prices, double delta) {
  std::vector<double> shifted = prices.values();
  for (double& c : shifted) {
    c += delta;
    if (c < 0.0)
      throw std::invalid_argument("price_shift: shift would make a price negative");
  }
  return PriceVector(std::move(shifted));
}

}  // namespace queuetoll
