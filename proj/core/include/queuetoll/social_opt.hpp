#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "queuetoll/model.hpp"

namespace queuetoll {

struct SocialOptOptions {
  int restarts = 32;
  int max_iters = 4000;      // projected-gradient iterations per restart
  double kkt_tol = 1e-8;
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct OptimumResult {
  RoutingMatrix routing;
  FlowVector flows;
  double cost = 0.0;
  // max over classes of (largest gradient entry on the support minus the
  // smallest gradient entry overall); NaN when not evaluated (grid search).
  double kkt_residual = 0.0;
  int restarts_used = 0;
  bool converged = false;
};

// Projected gradient descent with Armijo backtracking on the product of
// per-class simplices, multi-start.  The objective is non-convex, so restarts
// matter; the first start splits every class proportionally to queue
// capacity, the rest are Dirichlet draws.
[[nodiscard]] OptimumResult solve_social_optimum(const SystemSpec& spec,
                                                 const SocialOptOptions& options = {});

// Exhaustive search over routing matrices with rows on a uniform simplex
// grid.  Intended as an independent cross-check at small sizes: requires
// M <= 3 and N <= 3 and refuses grids with more than 1e8 cost evaluations.
[[nodiscard]] OptimumResult grid_oracle(const SystemSpec& spec, double resolution);

struct StructureViolation {
  int high_class = -1;   // lower index = higher sensitivity
  int low_class = -1;
  int high_queue = -1;   // queue used by high_class
  int low_queue = -1;
  std::string what;
};

// Structural sanity report for a candidate optimum: queues sorted by delay,
// per-class contiguous usage blocks, and the pairwise exchange conditions an
// optimal routing must satisfy.
struct StructureReport {
  std::vector<int> queue_order;       // original queue indices, delay ascending
  std::vector<int> block_lo;          // per class, first used position in queue_order
  std::vector<int> block_hi;          // per class, last used position
  std::vector<StructureViolation> violations;
  bool consistent = false;
};

[[nodiscard]] StructureReport check_optimal_structure(const SystemSpec& spec,
                                                      const RoutingMatrix& routing,
                                                      double tol = 1e-6);

}  // namespace queuetoll
