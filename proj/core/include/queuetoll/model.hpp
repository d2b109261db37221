#pragma once

#include <span>
#include <vector>

#include "queuetoll/system.hpp"

namespace queuetoll {

// Plain dense M x N array used for gradients and solver workspaces (no
// stochasticity constraint, unlike RoutingMatrix).
struct Matrix {
  std::vector<double> data;
  int rows = 0;
  int cols = 0;

  Matrix() = default;
  Matrix(int r, int c) : data(static_cast<std::size_t>(r) * c, 0.0), rows(r), cols(c) {}

  [[nodiscard]] double& operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  [[nodiscard]] double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
};

// Work flow per queue: gamma_j = sum_i rate_i * size_i * p_ij.
[[nodiscard]] FlowVector aggregate_rates(const SystemSpec& spec, const RoutingMatrix& routing);

// Aggregate delay-cost rate
//   U(P) = sum_ij sensitivity_i * size_i * rate_i * p_ij * D_j(gamma_j);
// +inf as soon as any queue with positive flow is at or beyond capacity.
[[nodiscard]] double social_cost(const SystemSpec& spec, const RoutingMatrix& routing);

// dU/dp_ij.  Throws if the routing is infeasible (some gamma_j >= capacity).
[[nodiscard]] Matrix social_cost_gradient(const SystemSpec& spec, const RoutingMatrix& routing);

// Rewrites an instance with heterogeneous job sizes as a unit-size instance:
// rates and sensitivities are both scaled by the class mean job size, then
// classes are re-sorted by the scaled sensitivity.  Exact ties after scaling
// are rejected.
[[nodiscard]] SystemSpec effective_spec(const SystemSpec& spec);

// Queue reindexing helpers: `order[k]` is the original index of the queue
// that becomes position k.
[[nodiscard]] SystemSpec permute_queues(const SystemSpec& spec, std::span<const int> order);
[[nodiscard]] RoutingMatrix permute_columns(const RoutingMatrix& routing,
                                            std::span<const int> order);

}  // namespace queuetoll
