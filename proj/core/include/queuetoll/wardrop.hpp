#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "queuetoll/model.hpp"

namespace queuetoll {

struct EquilibriumOptions {
  int max_iters = 10000;      // sweep budget
  double tol = 1e-6;          // convergence threshold on the residual
  double support_tol = 1e-7;  // mass below this does not count as "using" a queue
  double relaxation = 1.0;    // initial weight on each class's best response
};

struct EquilibriumResult {
  RoutingMatrix routing;
  FlowVector flows;
  double residual = 0.0;
  std::vector<double> per_class_cost;  // realized cost of each class's best queue
  int iterations = 0;
  bool converged = false;
};

// Largest profitable deviation: max over classes i, used queues j, and
// alternatives k of [ (c_j + beta_i D_j) - (c_k + beta_i D_k) ]_+ .  Zero
// exactly at an equilibrium of the admission-price game.
[[nodiscard]] double wardrop_residual(const SystemSpec& spec, std::span<const double> prices,
                                      const RoutingMatrix& routing, double support_tol = 1e-7);
[[nodiscard]] double wardrop_residual(const SystemSpec& spec, const PriceVector& prices,
                                      const RoutingMatrix& routing, double support_tol = 1e-7);

// Relaxed Gauss-Seidel sweeps of exact per-class best responses: each class
// in turn water-fills its mass against the other classes' current flows so
// that every queue it uses sits at a common game cost.  A sweep that fails
// to shrink the residual halves the relaxation weight.  Convergence is
// checked on the residual, not guaranteed; a non-converged result carries
// the best iterate seen.
[[nodiscard]] EquilibriumResult solve_equilibrium(const SystemSpec& spec,
                                                  const PriceVector& prices,
                                                  const EquilibriumOptions& options = {});

}  // namespace queuetoll
