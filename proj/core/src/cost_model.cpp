#include "queuetoll/cost_model.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace queuetoll {

CostModel CostModel::mm1_mean_delay(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mm1_mean_delay: mu must be > 0");
  CostModel m;
  m.family_ = Family::kMm1MeanDelay;
  m.mu_ = mu;
  m.capacity_ = mu;
  return m;
}

CostModel CostModel::mm1_tail_probability(double mu, double tail_threshold) {
  if (!(mu > 0.0)) throw std::invalid_argument("mm1_tail_probability: mu must be > 0");
  if (!(tail_threshold > 0.0))
    throw std::invalid_argument("mm1_tail_probability: threshold must be > 0");
  CostModel m;
  m.family_ = Family::kMm1TailProbability;
  m.mu_ = mu;
  m.tail_threshold_ = tail_threshold;
  m.capacity_ = mu;
  return m;
}

CostModel CostModel::ps_load() {
  CostModel m;
  m.family_ = Family::kPsLoad;
  m.mu_ = 1.0;
  m.capacity_ = 1.0;
  return m;
}

CostModel CostModel::tabulated(std::vector<double> flows, std::vector<double> costs) {
  if (flows.size() != costs.size())
    throw std::invalid_argument("tabulated: flow and cost grids differ in length");
  if (flows.size() < 2) throw std::invalid_argument("tabulated: need at least two knots");
  if (flows.front() != 0.0)
    throw std::invalid_argument("tabulated: flow grid must start at 0");
  for (std::size_t k = 1; k < flows.size(); ++k) {
    if (!(flows[k] > flows[k - 1]))
      throw std::invalid_argument("tabulated: flow grid must be strictly increasing");
    if (!(costs[k] > costs[k - 1]))
      throw std::invalid_argument("tabulated: cost grid must be strictly increasing");
  }
  if (!(costs.front() >= 0.0)) throw std::invalid_argument("tabulated: costs must be >= 0");

  CostModel m;
  m.family_ = Family::kTabulated;
  m.capacity_ = flows.back();
  m.grid_x_ = std::move(flows);
  m.grid_y_ = std::move(costs);

  // Fritsch-Carlson tangents: guarantees the cubic interpolant is monotone
  // when the data are.  All secants are positive here, so no sign checks.
  const std::size_t n = m.grid_x_.size();
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    secant[k] = (m.grid_y_[k + 1] - m.grid_y_[k]) / (m.grid_x_[k + 1] - m.grid_x_[k]);
  m.tangents_.assign(n, 0.0);
  m.tangents_.front() = secant.front();
  m.tangents_.back() = secant.back();
  for (std::size_t k = 1; k + 1 < n; ++k)
    m.tangents_[k] = 0.5 * (secant[k - 1] + secant[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = m.tangents_[k] / secant[k];
    const double b = m.tangents_[k + 1] / secant[k];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m.tangents_[k] = tau * a * secant[k];
      m.tangents_[k + 1] = tau * b * secant[k];
    }
  }
  return m;
}

namespace {

// Hermite segment evaluation; returns value and derivative.
struct HermiteEval {
  double value;
  double slope;
};

HermiteEval eval_hermite(double x, double x0, double x1, double y0, double y1, double m0,
                         double m1) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const double dh00 = (6 * t2 - 6 * t) / h;
  const double dh10 = (3 * t2 - 4 * t + 1) / h;
  const double dh01 = (-6 * t2 + 6 * t) / h;
  const double dh11 = (3 * t2 - 2 * t) / h;
  return {h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1,
          dh00 * y0 + dh10 * h * m0 + dh01 * y1 + dh11 * h * m1};
}

}  // namespace

double CostModel::cost(double gamma) const {
  if (gamma < 0.0) throw std::invalid_argument("cost: flow must be >= 0");
  if (gamma >= capacity_) return kInfiniteCost;
  switch (family_) {
    case Family::kMm1MeanDelay:
      return 1.0 / (mu_ - gamma);
    case Family::kMm1TailProbability:
      return (gamma / mu_) * std::exp((gamma - mu_) * tail_threshold_);
    case Family::kPsLoad:
      return 1.0 / (1.0 - gamma);
    case Family::kTabulated: {
      const auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), gamma);
      const std::size_t k = static_cast<std::size_t>(it - grid_x_.begin()) - 1;
      return eval_hermite(gamma, grid_x_[k], grid_x_[k + 1], grid_y_[k], grid_y_[k + 1],
                          tangents_[k], tangents_[k + 1])
          .value;
    }
  }
  return kInfiniteCost;
}

double CostModel::derivative(double gamma) const {
  if (gamma < 0.0) throw std::invalid_argument("derivative: flow must be >= 0");
  if (gamma >= capacity_) return kInfiniteCost;
  switch (family_) {
    case Family::kMm1MeanDelay: {
      const double d = mu_ - gamma;
      return 1.0 / (d * d);
    }
    case Family::kMm1TailProbability:
      return ((1.0 + gamma * tail_threshold_) / mu_) *
             std::exp((gamma - mu_) * tail_threshold_);
    case Family::kPsLoad: {
      const double d = 1.0 - gamma;
      return 1.0 / (d * d);
    }
    case Family::kTabulated: {
      const auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), gamma);
      const std::size_t k = static_cast<std::size_t>(it - grid_x_.begin()) - 1;
      return eval_hermite(gamma, grid_x_[k], grid_x_[k + 1], grid_y_[k], grid_y_[k + 1],
                          tangents_[k], tangents_[k + 1])
          .slope;
    }
  }
  return kInfiniteCost;
}

std::optional<double> CostModel::service_rate() const {
  switch (family_) {
    case Family::kMm1MeanDelay:
    case Family::kMm1TailProbability:
      return mu_;
    case Family::kPsLoad:
      return 1.0;
    case Family::kTabulated:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> CostModel::tail_threshold() const {
  if (family_ == Family::kMm1TailProbability) return tail_threshold_;
  return std::nullopt;
}

std::string CostModel::describe() const {
  switch (family_) {
    case Family::kMm1MeanDelay:
      return "mm1_mean_delay(mu=" + std::to_string(mu_) + ")";
    case Family::kMm1TailProbability:
      return "mm1_tail_probability(mu=" + std::to_string(mu_) +
             ", T=" + std::to_string(tail_threshold_) + ")";
    case Family::kPsLoad:
      return "ps_load";
    case Family::kTabulated:
      return "tabulated(" + std::to_string(grid_x_.size()) + " knots)";
  }
  return "unknown";
}

}  // namespace queuetoll
