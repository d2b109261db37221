#include "queuetoll/wardrop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace queuetoll {

namespace {

void check_prices(const SystemSpec& spec, std::span<const double> prices) {
  if (static_cast<int>(prices.size()) != spec.num_queues())
    throw std::invalid_argument("prices length does not match the number of queues");
  for (double c : prices)
    if (!(c >= 0.0)) throw std::invalid_argument("prices must be >= 0");
}

std::vector<double> queue_delays(const SystemSpec& spec, const FlowVector& flows) {
  std::vector<double> d(spec.num_queues());
  for (int j = 0; j < spec.num_queues(); ++j) d[j] = spec.queue(j).cost(flows.gamma[j]);
  return d;
}

}  // namespace

double wardrop_residual(const SystemSpec& spec, std::span<const double> prices,
                        const RoutingMatrix& routing, double support_tol) {
  check_prices(spec, prices);
  if (routing.num_classes() != spec.num_classes() || routing.num_queues() != spec.num_queues())
    throw std::invalid_argument("wardrop_residual: routing dimensions mismatch");

  const FlowVector flows = aggregate_rates(spec, routing);
  const std::vector<double> delay = queue_delays(spec, flows);
  double worst = 0.0;
  for (int i = 0; i < spec.num_classes(); ++i) {
    const double beta = spec.cls(i).sensitivity;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < spec.num_queues(); ++k)
      best = std::min(best, prices[k] + beta * delay[k]);
    for (int j = 0; j < spec.num_queues(); ++j)
      if (routing(i, j) > support_tol)
        worst = std::max(worst, prices[j] + beta * delay[j] - best);
  }
  return worst;
}

double wardrop_residual(const SystemSpec& spec, const PriceVector& prices,
                        const RoutingMatrix& routing, double support_tol) {
  return wardrop_residual(spec, std::span<const double>(prices.values()), routing, support_tol);
}

namespace {

// Exact best response of one class against fixed background flows: water-fill
// its work mass so that every queue it uses sits at the common game cost nu
// and every unused queue costs at least nu.  Returns per-queue work amounts.
std::vector<double> water_fill(const SystemSpec& spec, std::span<const double> prices,
                               int cls_index, double mass,
                               const std::vector<double>& background) {
  const int n = spec.num_queues();
  const double beta = spec.cls(cls_index).sensitivity;

  auto game_cost = [&](int j, double x) {
    return prices[j] + beta * spec.queue(j).cost(background[j] + x);
  };
  // Mass the class places on queue j when its common cost level is nu.
  auto mass_at = [&](int j, double nu) {
    const double room = spec.queue(j).capacity() - background[j];
    if (!(room > 0.0) || game_cost(j, 0.0) >= nu) return 0.0;
    if (spec.queue(j).family() == CostModel::Family::kMm1MeanDelay) {
      // c + beta / (mu - b - x) = nu
      const double x = room - beta / (nu - prices[j]);
      return std::clamp(x, 0.0, room);
    }
    double lo = 0.0, hi = room;
    if (game_cost(j, hi) < nu) return hi;  // cost wall reached before nu
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (game_cost(j, mid) < nu ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto total_at = [&](double nu) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += mass_at(j, nu);
    return s;
  };

  double nu_lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) nu_lo = std::min(nu_lo, game_cost(j, 0.0));
  // Feasibility of the spec leaves strictly more free capacity than `mass`,
  // so a bracketing level always exists.
  double step = std::max(1.0, std::abs(nu_lo));
  double nu_hi = nu_lo + step;
  for (int grow = 0; grow < 200 && total_at(nu_hi) < mass; ++grow) {
    step *= 2.0;
    nu_hi = nu_lo + step;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (nu_lo + nu_hi);
    (total_at(mid) < mass ? nu_lo : nu_hi) = mid;
  }

  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = mass_at(j, nu_hi);
  return x;
}

}  // namespace

EquilibriumResult solve_equilibrium(const SystemSpec& spec, const PriceVector& prices,
                                    const EquilibriumOptions& options) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  check_prices(spec, prices.values());

  // Row i holds class i's per-queue work; start from an even split.
  std::vector<std::vector<double>> work(m);
  for (int i = 0; i < m; ++i) work[i].assign(n, spec.work_rate(i) / n);

  auto as_matrix = [&](const std::vector<std::vector<double>>& w) {
    std::vector<double> fractions(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += w[i][j];
      for (int j = 0; j < n; ++j) fractions[static_cast<std::size_t>(i) * n + j] = w[i][j] / s;
    }
    return RoutingMatrix(fractions, m, n);
  };
  auto residual_of = [&](const std::vector<std::vector<double>>& w) {
    return wardrop_residual(spec, prices, as_matrix(w), options.support_tol);
  };

  std::vector<std::vector<double>> best_w = work;
  double best_residual = residual_of(work);
  double eta = std::clamp(options.relaxation, 1e-3, 1.0);
  int sweep = 0;
  int since_improve = 0;

  for (; sweep < options.max_iters && best_residual > options.tol; ++sweep) {
    for (int i = 0; i < m; ++i) {
      std::vector<double> background(n, 0.0);
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        for (int j = 0; j < n; ++j) background[j] += work[k][j];
      }
      const std::vector<double> br =
          water_fill(spec, prices.values(), i, spec.work_rate(i), background);
      for (int j = 0; j < n; ++j) work[i][j] = (1.0 - eta) * work[i][j] + eta * br[j];
    }
    const double swept = residual_of(work);
    if (swept < best_residual) {
      best_residual = swept;
      best_w = work;
      since_improve = 0;
      continue;
    }
    // A long stretch without a new best means the sweep is orbiting the fixed
    // point; damp the relaxation and restart from the best iterate.  Give up
    // once damping has already hit the floor.
    if (++since_improve >= 30) {
      since_improve = 0;
      if (eta <= 1.0001e-3) break;
      eta = std::max(0.5 * eta, 1e-3);
      work = best_w;
    }
  }

  RoutingMatrix routing = as_matrix(best_w);
  FlowVector flows = aggregate_rates(spec, routing);
  const std::vector<double> delay = queue_delays(spec, flows);
  std::vector<double> class_cost(m);
  for (int i = 0; i < m; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      best = std::min(best, prices[j] + spec.cls(i).sensitivity * delay[j]);
    class_cost[i] = best;
  }
  return {std::move(routing),     std::move(flows), best_residual,
          std::move(class_cost), sweep,            best_residual <= options.tol};
}

}  // namespace queuetoll
