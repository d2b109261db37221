#pragma once

#include <cstdint>
#include <vector>

#include "queuetoll/pricing.hpp"
#include "queuetoll/system.hpp"

namespace queuetoll {

// Sensitivity distribution of a continuum of customers.
class SensitivityDistribution {
 public:
  enum class Family { kUniform, kTruncatedExponential };

  static SensitivityDistribution uniform(double lower, double upper);
  // Exponential(rate) conditioned on [0, upper].
  static SensitivityDistribution truncated_exponential(double rate, double upper);

  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] double support_lo() const { return lo_; }
  [[nodiscard]] double support_hi() const { return hi_; }
  [[nodiscard]] double rate() const { return rate_; }

  [[nodiscard]] double cdf(double beta) const;
  [[nodiscard]] double quantile(double u) const;
  [[nodiscard]] double density(double beta) const;
  // int_{lo}^{hi} beta dF(beta), clamped to the support.
  [[nodiscard]] double partial_mean(double lo, double hi) const;
  [[nodiscard]] double mean() const { return partial_mean(lo_, hi_); }

 private:
  SensitivityDistribution() = default;
  Family family_ = Family::kUniform;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double rate_ = 1.0;  // truncated-exponential only
};

// A continuum of customers arriving at `total_rate`, with sensitivities drawn
// from `distribution`, to be split across `queues`.
class ContinuumSpec {
 public:
  ContinuumSpec(double total_rate, SensitivityDistribution distribution,
                std::vector<CostModel> queues);

  [[nodiscard]] double total_rate() const { return rate_; }
  [[nodiscard]] const SensitivityDistribution& distribution() const { return dist_; }
  [[nodiscard]] const std::vector<CostModel>& queues() const { return queues_; }
  [[nodiscard]] int num_queues() const { return static_cast<int>(queues_.size()); }
  [[nodiscard]] const CostModel& queue(int j) const { return queues_[j]; }

 private:
  double rate_;
  SensitivityDistribution dist_;
  std::vector<CostModel> queues_;
};

// Threshold routing: customers with sensitivity in [thresholds[k],
// thresholds[k-1]) go to used_queues[k] (thresholds[-1] = +inf).  Thresholds
// strictly decrease and end at the support infimum; used_queues lists
// original queue indices, fastest (lowest delay) first.
struct ThresholdAllocation {
  std::vector<int> used_queues;
  std::vector<double> thresholds;
  FlowVector flows;  // all queues, original indexing; zero when unused

  [[nodiscard]] int num_used() const { return static_cast<int>(used_queues.size()); }
};

// Recomputes flows from thresholds (also validates shape/monotonicity).
[[nodiscard]] FlowVector threshold_flows(const ContinuumSpec& spec,
                                         const ThresholdAllocation& alloc);

// Aggregate cost rate  sum_k D_k(gamma_k) * rate * E[beta; interval k].
[[nodiscard]] double continuum_cost(const ContinuumSpec& spec,
                                    const ThresholdAllocation& alloc);

struct ContinuumOptOptions {
  int max_iters = 6000;
  double tol = 1e-11;  // tangent-stationarity target in quantile space
};

// Global optimum over threshold allocations: enumerates the used subset and
// its delay order (N <= 6), then runs projected gradient descent on interval
// masses in quantile space.
[[nodiscard]] ThresholdAllocation solve_continuum_optimum(const ContinuumSpec& spec,
                                                          const ContinuumOptOptions& options = {});

struct ContinuumEqOptions {
  double tol = 1e-8;        // indifference residual target
  int scan_points = 128;    // bracket scan for the outer bisection
};

// Equilibrium of the admission-price game with a price per queue (aligned
// with the spec's queue order, strictly decreasing).  Queues that attract no
// mass are dropped from the returned allocation.
[[nodiscard]] ThresholdAllocation solve_continuum_equilibrium(
    const ContinuumSpec& spec, const PriceVector& prices,
    const ContinuumEqOptions& options = {});

// Marginal-externality prices at an allocation:
//   c_k = D'_k(gamma_k) * rate * E[beta; interval k],  zero for unused queues.
[[nodiscard]] QueuePrices continuum_pigouvian_prices(const ContinuumSpec& spec,
                                                     const ThresholdAllocation& alloc);

// Max violation of the marginal-customer indifference equations at the
// interior thresholds of `alloc` under the given prices (original indexing).
[[nodiscard]] double continuum_indifference_residual(const ContinuumSpec& spec,
                                                     std::span<const double> prices_by_queue,
                                                     const ThresholdAllocation& alloc);

}  // namespace queuetoll
