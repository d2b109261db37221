#pragma once

#include <span>
#include <vector>

#include "queuetoll/model.hpp"

namespace queuetoll {

// Marginal-externality admission prices evaluated at a routing matrix:
//   c_n = sum_m sensitivity_m * size_m * rate_m * p_mn * D'_n(gamma_n).
// Unused queues price at zero.  Reported both by original queue index and in
// delay-sorted order (used queues by ascending delay, then unused ones).
struct QueuePrices {
  std::vector<double> by_queue;    // original indexing
  std::vector<int> delay_order;    // original index of each sorted position
  std::vector<double> sorted;      // by_queue re-indexed through delay_order
  std::vector<int> unused_queues;  // original indices with no traffic
  // True when the used-queue prices strictly decrease along delay order, as
  // they must at an optimal routing.  Left false (never "fixed") otherwise.
  bool strictly_decreasing = false;

  // The sorted used-queue prices as a validated PriceVector; throws if the
  // strict ordering fails.
  [[nodiscard]] PriceVector sorted_prices() const;
};

[[nodiscard]] QueuePrices pigouvian_prices(const SystemSpec& spec,
                                           const RoutingMatrix& routing);

struct Certification {
  bool certified = false;
  double residual = 0.0;
  double tol = 0.0;
};

// Checks that `routing` is an equilibrium of the admission-price game at the
// given per-queue prices (original indexing): certified iff the equilibrium
// residual is within tol.
[[nodiscard]] Certification certify_prices(const SystemSpec& spec, const RoutingMatrix& routing,
                                           std::span<const double> prices_by_queue, double tol,
                                           double support_tol = 1e-7);
[[nodiscard]] Certification certify_prices(const SystemSpec& spec, const RoutingMatrix& routing,
                                           const QueuePrices& prices, double tol,
                                           double support_tol = 1e-7);

// Uniform shift of all prices; equilibria are invariant to it.  Throws if any
// shifted price would be negative.
[[nodiscard]] PriceVector price_shift(const PriceVector& prices, double delta);

}  // namespace queuetoll
