#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace queuetoll {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

// Per-queue congestion cost D(gamma) as a function of the aggregate flow
// routed to the queue.  Every family is strictly increasing on [0, capacity)
// and returns +inf once the flow reaches capacity, which acts as a feasibility
// wall for the optimizers.
class CostModel {
 public:
  enum class Family {
    kMm1MeanDelay,        // 1 / (mu - gamma)
    kMm1TailProbability,  // (gamma/mu) * exp((gamma - mu) * T)
    kPsLoad,              // 1 / (1 - rho), unit-rate server
    kTabulated,           // monotone cubic through (flow, cost) samples
  };

  static CostModel mm1_mean_delay(double mu);
  static CostModel mm1_tail_probability(double mu, double tail_threshold);
  static CostModel ps_load();
  // Grids must be strictly increasing in both coordinates.
  static CostModel tabulated(std::vector<double> flows, std::vector<double> costs);

  [[nodiscard]] double cost(double gamma) const;
  // d/dgamma of cost(); finite only on [0, capacity).
  [[nodiscard]] double derivative(double gamma) const;
  [[nodiscard]] double capacity() const { return capacity_; }
  [[nodiscard]] Family family() const { return family_; }

  // Service rate of the physical server this model describes; empty for
  // tabulated curves, which carry no queueing interpretation.
  [[nodiscard]] std::optional<double> service_rate() const;
  // The T in P(wait > T); empty unless the family is a tail probability.
  [[nodiscard]] std::optional<double> tail_threshold() const;

  [[nodiscard]] std::string describe() const;

  // Knot accessors, only meaningful for tabulated curves.
  [[nodiscard]] const std::vector<double>& tabulated_flows() const { return grid_x_; }
  [[nodiscard]] const std::vector<double>& tabulated_costs() const { return grid_y_; }

 private:
  CostModel() = default;

  Family family_ = Family::kPsLoad;
  double capacity_ = 1.0;
  double mu_ = 1.0;
  double tail_threshold_ = 0.0;
  // Tabulated state: knots plus Fritsch-Carlson tangents.
  std::vector<double> grid_x_;
  std::vector<double> grid_y_;
  std::vector<double> tangents_;
};

}  // namespace queuetoll
