#include "queuetoll/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace queuetoll {

namespace {
constexpr double kZeroFlow = 1e-12;
}

SensitivityDistribution SensitivityDistribution::uniform(double lower, double upper) {
  if (!(lower >= 0.0) || !(upper > lower))
    throw std::invalid_argument("uniform: need 0 <= lower < upper");
  SensitivityDistribution d;
  d.family_ = Family::kUniform;
  d.lo_ = lower;
  d.hi_ = upper;
  return d;
}

SensitivityDistribution SensitivityDistribution::truncated_exponential(double rate,
                                                                       double upper) {
  if (!(rate > 0.0) || !(upper > 0.0))
    throw std::invalid_argument("truncated_exponential: need rate > 0 and upper > 0");
  SensitivityDistribution d;
  d.family_ = Family::kTruncatedExponential;
  d.lo_ = 0.0;
  d.hi_ = upper;
  d.rate_ = rate;
  return d;
}

double SensitivityDistribution::cdf(double beta) const {
  if (beta <= lo_) return 0.0;
  if (beta >= hi_) return 1.0;
  if (family_ == Family::kUniform) return (beta - lo_) / (hi_ - lo_);
  return -std::expm1(-rate_ * beta) / -std::expm1(-rate_ * hi_);
}

double SensitivityDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u outside [0,1]");
  if (family_ == Family::kUniform) return lo_ + u * (hi_ - lo_);
  const double z = -std::expm1(-rate_ * hi_);
  return -std::log1p(-u * z) / rate_;
}

double SensitivityDistribution::density(double beta) const {
  if (beta < lo_ || beta > hi_) return 0.0;
  if (family_ == Family::kUniform) return 1.0 / (hi_ - lo_);
  const double z = -std::expm1(-rate_ * hi_);
  return rate_ * std::exp(-rate_ * beta) / z;
}

double SensitivityDistribution::partial_mean(double lo, double hi) const {
  lo = std::max(lo, lo_);
  hi = std::min(hi, hi_);
  if (!(hi > lo)) return 0.0;
  if (family_ == Family::kUniform) return (hi * hi - lo * lo) / (2.0 * (hi_ - lo_));
  // antiderivative of beta * rate * exp(-rate beta) is -(beta + 1/rate) e^{-rate beta}
  const double z = -std::expm1(-rate_ * hi_);
  auto anti = [&](double b) { return -(b + 1.0 / rate_) * std::exp(-rate_ * b); };
  return (anti(hi) - anti(lo)) / z;
}

ContinuumSpec::ContinuumSpec(double total_rate, SensitivityDistribution distribution,
                             std::vector<CostModel> queues)
    : rate_(total_rate), dist_(distribution), queues_(std::move(queues)) {
  if (!(rate_ > 0.0)) throw std::invalid_argument("ContinuumSpec: total rate must be > 0");
  if (queues_.empty()) throw std::invalid_argument("ContinuumSpec: need at least one queue");
  double cap = 0.0;
  for (const auto& q : queues_) cap += q.capacity();
  if (!(rate_ < cap))
    throw std::invalid_argument("infeasible: total load exceeds capacity (offered rate " +
                                std::to_string(rate_) + " vs " + std::to_string(cap) + ")");
}

namespace {

void validate_alloc_shape(const ContinuumSpec& spec, const ThresholdAllocation& alloc) {
  const int m = alloc.num_used();
  if (m < 1 || m > spec.num_queues())
    throw std::invalid_argument("ThresholdAllocation: bad used-queue count");
  if (static_cast<int>(alloc.thresholds.size()) != m)
    throw std::invalid_argument("ThresholdAllocation: thresholds must match used queues");
  std::vector<char> seen(spec.num_queues(), 0);
  for (int q : alloc.used_queues) {
    if (q < 0 || q >= spec.num_queues() || seen[q])
      throw std::invalid_argument("ThresholdAllocation: used queues must be distinct indices");
    seen[q] = 1;
  }
  const auto& dist = spec.distribution();
  for (int k = 0; k < m; ++k) {
    const double t = alloc.thresholds[k];
    if (!(t >= dist.support_lo() - 1e-9) || !(t <= dist.support_hi() + 1e-9))
      throw std::invalid_argument("ThresholdAllocation: threshold outside the support");
    if (k > 0 && !(alloc.thresholds[k - 1] > t))
      throw std::invalid_argument("ThresholdAllocation: thresholds must strictly decrease");
  }
  if (std::abs(alloc.thresholds.back() - dist.support_lo()) > 1e-9)
    throw std::invalid_argument(
        "ThresholdAllocation: last threshold must sit at the support infimum");
}

}  // namespace

FlowVector threshold_flows(const ContinuumSpec& spec, const ThresholdAllocation& alloc) {
  validate_alloc_shape(spec, alloc);
  FlowVector f;
  f.gamma.assign(spec.num_queues(), 0.0);
  double upper_cdf = 1.0;  // F(threshold above the current interval)
  for (int k = 0; k < alloc.num_used(); ++k) {
    const double lower_cdf = spec.distribution().cdf(alloc.thresholds[k]);
    f.gamma[alloc.used_queues[k]] = spec.total_rate() * (upper_cdf - lower_cdf);
    upper_cdf = lower_cdf;
  }
  return f;
}

double continuum_cost(const ContinuumSpec& spec, const ThresholdAllocation& alloc) {
  const FlowVector flows = threshold_flows(spec, alloc);
  double total = 0.0;
  double upper = spec.distribution().support_hi();
  for (int k = 0; k < alloc.num_used(); ++k) {
    const int q = alloc.used_queues[k];
    const double pm = spec.distribution().partial_mean(alloc.thresholds[k], upper);
    upper = alloc.thresholds[k];
    if (pm <= 0.0) continue;
    const double d = spec.queue(q).cost(flows.gamma[q]);
    if (d == kInfiniteCost) return kInfiniteCost;
    total += d * spec.total_rate() * pm;
  }
  return total;
}

namespace {

// ---- optimum solver ------------------------------------------------------

struct MassProblem {
  const ContinuumSpec* spec;
  std::vector<int> queues;  // ordering under optimization

  // masses -> cost; +inf past any capacity wall
  double cost(const std::vector<double>& w) const {
    const auto& dist = spec->distribution();
    double u_hi = 1.0;
    double total = 0.0;
    for (std::size_t k = 0; k < queues.size(); ++k) {
      const double u_lo = std::max(0.0, u_hi - w[k]);
      const double gamma = spec->total_rate() * w[k];
      if (w[k] > 0.0) {
        const double d = spec->queue(queues[k]).cost(gamma);
        if (d == kInfiniteCost) return kInfiniteCost;
        total += d * spec->total_rate() *
                 dist.partial_mean(dist.quantile(u_lo), dist.quantile(u_hi));
      }
      u_hi = u_lo;
    }
    return total;
  }

  // free gradient at a simplex point
  std::vector<double> gradient(const std::vector<double>& w) const {
    const auto& dist = spec->distribution();
    const int m = static_cast<int>(queues.size());
    const double lambda = spec->total_rate();
    std::vector<double> u(m + 1), beta(m + 1), delay(m), dprime(m), pm(m);
    u[0] = 1.0;
    for (int k = 0; k < m; ++k) u[k + 1] = std::max(0.0, u[k] - w[k]);
    for (int k = 0; k <= m; ++k) beta[k] = dist.quantile(u[k]);
    for (int k = 0; k < m; ++k) {
      const double gamma = lambda * w[k];
      delay[k] = spec->queue(queues[k]).cost(gamma);
      dprime[k] = spec->queue(queues[k]).derivative(gamma);
      pm[k] = dist.partial_mean(beta[k + 1], beta[k]);
    }
    std::vector<double> g(m);
    double tail = 0.0;  // sum_{j>i} D_j (beta_{j+1} - beta_j), accumulated backwards
    for (int i = m - 1; i >= 0; --i) {
      g[i] = lambda * (lambda * dprime[i] * pm[i] + delay[i] * beta[i + 1] + tail);
      tail += delay[i] * (beta[i + 1] - beta[i]);
    }
    return g;
  }
};

void project_simplex_vec(std::vector<double>& v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(0.0, x - theta);
    sum += x;
  }
  if (sum > 0.0)
    for (double& x : v) x /= sum;
}

// Projected gradient with Armijo backtracking on interval masses.
double optimize_masses(const MassProblem& prob, std::vector<double>& w, int max_iters) {
  double cost = prob.cost(w);
  if (cost == kInfiniteCost) return cost;
  double step = 1.0 / std::max(1.0, prob.spec->total_rate());
  for (int iter = 0; iter < max_iters; ++iter) {
    const std::vector<double> g = prob.gradient(w);
    bool accepted = false;
    double moved = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> cand = w;
      for (std::size_t k = 0; k < cand.size(); ++k) cand[k] -= step * g[k];
      project_simplex_vec(cand);
      double dist2 = 0.0;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        const double d = cand[k] - w[k];
        dist2 += d * d;
      }
      const double cand_cost = prob.cost(cand);
      if (cand_cost <= cost - 1e-4 / step * dist2) {
        w = std::move(cand);
        cost = cand_cost;
        moved = std::sqrt(dist2);
        accepted = true;
        step = std::min(step * 1.25, 1e4);
        break;
      }
      step *= 0.5;
    }
    if (!accepted || moved < 1e-15) break;
  }
  return cost;
}

// Newton refinement of an interior stationary point: drive the reduced
// gradient g_k - g_last to zero on the active masses.  The Jacobian is a
// finite difference of the analytic gradient; steps are accepted only when
// they shrink the reduced-gradient norm, so a bad basin just leaves the
// projected-gradient answer untouched.
void newton_polish(const MassProblem& prob, std::vector<double>& w) {
  const int m = static_cast<int>(w.size());
  std::vector<int> active;
  for (int k = 0; k < m; ++k)
    if (w[k] > 1e-9) active.push_back(k);
  const int p = static_cast<int>(active.size());
  if (p < 2) return;
  const int last = active[p - 1];

  auto reduced = [&](const std::vector<double>& x) {
    const std::vector<double> g = prob.gradient(x);
    std::vector<double> r(p - 1);
    for (int k = 0; k < p - 1; ++k) r[k] = g[active[k]] - g[last];
    return r;
  };
  auto norm_inf = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  };

  std::vector<double> r = reduced(w);
  double rnorm = norm_inf(r);
  for (int iter = 0; iter < 12 && rnorm > 1e-12; ++iter) {
    const double h = 1e-7;
    std::vector<std::vector<double>> jac(p - 1, std::vector<double>(p - 1));
    bool usable = true;
    for (int col = 0; col < p - 1 && usable; ++col) {
      std::vector<double> hi = w, lo = w;
      hi[active[col]] += h;
      hi[last] -= h;
      lo[active[col]] -= h;
      lo[last] += h;
      if (lo[active[col]] <= 0.0 || hi[last] <= 0.0) {
        usable = false;
        break;
      }
      const std::vector<double> rp = reduced(hi);
      const std::vector<double> rm = reduced(lo);
      for (int row = 0; row < p - 1; ++row) jac[row][col] = (rp[row] - rm[row]) / (2.0 * h);
    }
    if (!usable) return;

    // solve jac * delta = -r by Gaussian elimination with partial pivoting
    std::vector<double> rhs(p - 1);
    for (int k = 0; k < p - 1; ++k) rhs[k] = -r[k];
    for (int col = 0; col < p - 1; ++col) {
      int pivot = col;
      for (int row = col + 1; row < p - 1; ++row)
        if (std::abs(jac[row][col]) > std::abs(jac[pivot][col])) pivot = row;
      if (std::abs(jac[pivot][col]) < 1e-14) return;
      std::swap(jac[col], jac[pivot]);
      std::swap(rhs[col], rhs[pivot]);
      for (int row = col + 1; row < p - 1; ++row) {
        const double f = jac[row][col] / jac[col][col];
        for (int c2 = col; c2 < p - 1; ++c2) jac[row][c2] -= f * jac[col][c2];
        rhs[row] -= f * rhs[col];
      }
    }
    std::vector<double> delta(p - 1);
    for (int row = p - 2; row >= 0; --row) {
      double s = rhs[row];
      for (int c2 = row + 1; c2 < p - 1; ++c2) s -= jac[row][c2] * delta[c2];
      delta[row] = s / jac[row][row];
    }

    bool accepted = false;
    double step = 1.0;
    for (int bt = 0; bt < 25; ++bt, step *= 0.5) {
      std::vector<double> cand = w;
      double shift = 0.0;
      bool inside = true;
      for (int k = 0; k < p - 1; ++k) {
        cand[active[k]] += step * delta[k];
        shift += step * delta[k];
        if (cand[active[k]] <= 0.0 || cand[active[k]] >= 1.0) inside = false;
      }
      cand[last] -= shift;
      if (!inside || cand[last] <= 0.0 || cand[last] >= 1.0) continue;
      if (prob.cost(cand) == kInfiniteCost) continue;
      const std::vector<double> rc = reduced(cand);
      const double cnorm = norm_inf(rc);
      if (cnorm < rnorm) {
        w = std::move(cand);
        r = rc;
        rnorm = cnorm;
        accepted = true;
        break;
      }
    }
    if (!accepted) return;
  }
}

void ordered_subsets(int n, int m, std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == m) {
      out.push_back(cur);
      return;
    }
    for (int q = 0; q < n; ++q) {
      if (used[q]) continue;
      used[q] = 1;
      cur.push_back(q);
      self(self);
      cur.pop_back();
      used[q] = 0;
    }
  };
  rec(rec);
}

ThresholdAllocation alloc_from_masses(const ContinuumSpec& spec, const std::vector<int>& queues,
                                      const std::vector<double>& w) {
  const auto& dist = spec.distribution();
  ThresholdAllocation alloc;
  double u = 1.0;
  for (std::size_t k = 0; k < queues.size(); ++k) {
    if (w[k] <= kZeroFlow) continue;  // dropped: attracts no mass
    u = std::max(0.0, u - w[k]);
    alloc.used_queues.push_back(queues[k]);
    alloc.thresholds.push_back(dist.quantile(u));
  }
  if (alloc.used_queues.empty())
    throw std::runtime_error("continuum optimum: no queue received mass");
  alloc.thresholds.back() = dist.support_lo();
  alloc.flows = threshold_flows(spec, alloc);
  return alloc;
}

}  // namespace

ThresholdAllocation solve_continuum_optimum(const ContinuumSpec& spec,
                                            const ContinuumOptOptions& options) {
  const int n = spec.num_queues();
  if (n > 6)
    throw std::invalid_argument(
        "solve_continuum_optimum: exhaustive ordering enumeration supports at most 6 queues");

  double best_cost = kInfiniteCost;
  std::vector<int> best_queues;
  std::vector<double> best_w;

  for (int m = 1; m <= n; ++m) {
    std::vector<std::vector<int>> orderings;
    ordered_subsets(n, m, orderings);
    for (const auto& queues : orderings) {
      double cap = 0.0;
      for (int q : queues) cap += spec.queue(q).capacity();
      if (!(spec.total_rate() < cap)) continue;

      MassProblem prob{&spec, queues};
      // start from capacity shares; always feasible given the subset fits
      std::vector<double> w(m);
      for (int k = 0; k < m; ++k) w[k] = spec.queue(queues[k]).capacity() / cap;
      double cost = optimize_masses(prob, w, options.max_iters);
      if (cost < best_cost - 1e-15) {
        best_cost = cost;
        best_queues = queues;
        best_w = w;
      }
    }
  }
  if (best_queues.empty())
    throw std::runtime_error("solve_continuum_optimum: no feasible allocation");

  newton_polish(MassProblem{&spec, best_queues}, best_w);
  ThresholdAllocation alloc = alloc_from_masses(spec, best_queues, best_w);

  // Delay ordering must come out ascending; identical queues can tie.
  const FlowVector flows = alloc.flows;
  for (int k = 1; k < alloc.num_used(); ++k) {
    const double prev = spec.queue(alloc.used_queues[k - 1]).cost(flows.gamma[alloc.used_queues[k - 1]]);
    const double cur = spec.queue(alloc.used_queues[k]).cost(flows.gamma[alloc.used_queues[k]]);
    if (prev > cur + 1e-8)
      throw std::runtime_error("solve_continuum_optimum: delays not ascending at the optimum");
  }
  (void)options;
  return alloc;
}

namespace {

// ---- equilibrium solver --------------------------------------------------

double invert_cost(const CostModel& queue, double target) {
  // D is strictly increasing with D(cap-) = +inf, so bisection always lands.
  double lo = 0.0, hi = queue.capacity();
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double d = queue.cost(mid);
    if (d < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct ChainResult {
  bool valid = false;
  std::vector<double> thresholds;  // beta_1 .. beta_{m-1}
  std::vector<double> flows;       // gamma_1 .. gamma_m (indifference-required)
  double mismatch = 0.0;           // mass-implied gamma_m minus required gamma_m
};

// Given the outermost threshold, resolve every inner threshold through the
// marginal-customer indifference equations.
ChainResult resolve_chain(const ContinuumSpec& spec, const std::vector<int>& queues,
                          const std::vector<double>& prices, double beta1) {
  const auto& dist = spec.distribution();
  const int m = static_cast<int>(queues.size());
  const double lambda = spec.total_rate();

  ChainResult r;
  r.thresholds.push_back(beta1);
  r.flows.assign(m, 0.0);
  double cdf_prev = dist.cdf(beta1);
  r.flows[0] = lambda * (1.0 - cdf_prev);
  if (r.flows[0] >= spec.queue(queues[0]).capacity()) return r;
  double delay_prev = spec.queue(queues[0]).cost(r.flows[0]);
  double beta_prev = beta1;

  for (int k = 1; k < m; ++k) {
    if (beta_prev <= 0.0) return r;
    const double target =
        delay_prev + (prices[queues[k - 1]] - prices[queues[k]]) / beta_prev;
    const CostModel& q = spec.queue(queues[k]);
    if (target < q.cost(0.0)) return r;  // queue k would need negative flow
    const double gamma = invert_cost(q, target);
    r.flows[k] = gamma;
    if (k == m - 1) {
      r.mismatch = lambda * cdf_prev - gamma;  // leftover mass vs required flow
      r.valid = true;
      return r;
    }
    const double cdf_k = cdf_prev - gamma / lambda;
    if (cdf_k < 0.0) return r;  // not enough mass left
    const double beta_k = dist.quantile(cdf_k);
    r.thresholds.push_back(beta_k);
    cdf_prev = cdf_k;
    delay_prev = q.cost(gamma);
    beta_prev = beta_k;
  }
  return r;
}

// Smallest margin by which every customer weakly prefers a used queue over
// queue `u` at zero load (negative = someone strictly prefers u).
double unused_margin(const ContinuumSpec& spec, const std::vector<int>& used,
                     const std::vector<double>& prices, const ThresholdAllocation& alloc,
                     int u) {
  const auto& dist = spec.distribution();
  const double d_u = spec.queue(u).cost(0.0);
  std::vector<double> checkpoints = alloc.thresholds;
  checkpoints.push_back(dist.support_hi());
  double margin = std::numeric_limits<double>::infinity();
  for (double beta : checkpoints) {
    double best = std::numeric_limits<double>::infinity();
    for (int q : used)
      best = std::min(best, prices[q] + beta * spec.queue(q).cost(alloc.flows.gamma[q]));
    margin = std::min(margin, prices[u] + beta * d_u - best);
  }
  return margin;
}

}  // namespace

ThresholdAllocation solve_continuum_equilibrium(const ContinuumSpec& spec,
                                                const PriceVector& prices,
                                                const ContinuumEqOptions& options) {
  const int n = spec.num_queues();
  if (prices.size() != n)
    throw std::invalid_argument("solve_continuum_equilibrium: price count mismatch");
  if (n > 20)
    throw std::invalid_argument("solve_continuum_equilibrium: too many queues");
  const auto& dist = spec.distribution();
  const double lambda = spec.total_rate();
  const std::vector<double>& c = prices.values();

  // Subsets in decreasing size, lexicographic within a size, so boundary
  // cases fall through to the same equilibrium with the idle queue dropped.
  for (int m = n; m >= 1; --m) {
    std::vector<std::vector<int>> subsets;
    {
      std::vector<int> cur;
      auto rec = [&](auto&& self, int next) -> void {
        if (static_cast<int>(cur.size()) == m) {
          subsets.push_back(cur);
          return;
        }
        for (int q = next; q < n; ++q) {
          cur.push_back(q);
          self(self, q + 1);
          cur.pop_back();
        }
      };
      rec(rec, 0);
    }

    for (const auto& used : subsets) {
      ThresholdAllocation alloc;
      if (m == 1) {
        if (lambda >= spec.queue(used[0]).capacity()) continue;
        alloc.used_queues = used;
        alloc.thresholds = {dist.support_lo()};
        alloc.flows = threshold_flows(spec, alloc);
      } else {
        // Outer bisection over the first threshold; inner thresholds resolve
        // recursively through the indifference chain.
        const double lo = dist.support_lo(), hi = dist.support_hi();
        double a = std::numeric_limits<double>::quiet_NaN();
        double b = std::numeric_limits<double>::quiet_NaN();
        double fa = 0.0;
        bool have_prev = false;
        double prev_x = 0.0, prev_f = 0.0;
        for (int s = 1; s < options.scan_points; ++s) {
          const double x = lo + (hi - lo) * s / options.scan_points;
          const ChainResult cr = resolve_chain(spec, used, c, x);
          if (!cr.valid) {
            have_prev = false;
            continue;
          }
          if (have_prev && ((prev_f <= 0.0) != (cr.mismatch <= 0.0))) {
            a = prev_x;
            fa = prev_f;
            b = x;
            break;
          }
          have_prev = true;
          prev_x = x;
          prev_f = cr.mismatch;
        }
        if (std::isnan(a)) continue;  // no root bracket for this subset
        for (int iter = 0; iter < 200; ++iter) {
          const double mid = 0.5 * (a + b);
          const ChainResult cr = resolve_chain(spec, used, c, mid);
          if (!cr.valid) break;
          if ((cr.mismatch <= 0.0) == (fa <= 0.0)) {
            a = mid;
            fa = cr.mismatch;
          } else {
            b = mid;
          }
        }
        const ChainResult cr = resolve_chain(spec, used, c, 0.5 * (a + b));
        if (!cr.valid) continue;
        alloc.used_queues = used;
        alloc.thresholds = cr.thresholds;
        alloc.thresholds.push_back(dist.support_lo());
        bool monotone = true;
        for (std::size_t k = 1; k < alloc.thresholds.size(); ++k)
          if (!(alloc.thresholds[k - 1] > alloc.thresholds[k])) monotone = false;
        if (!monotone) continue;
        alloc.flows = threshold_flows(spec, alloc);
      }

      bool positive = true;
      for (int q : alloc.used_queues)
        if (alloc.flows.gamma[q] <= kZeroFlow * lambda) positive = false;
      if (!positive) continue;

      if (continuum_indifference_residual(spec, c, alloc) > options.tol) continue;

      bool unattractive = true;
      for (int u = 0; u < n; ++u) {
        if (std::find(alloc.used_queues.begin(), alloc.used_queues.end(), u) !=
            alloc.used_queues.end())
          continue;
        if (unused_margin(spec, alloc.used_queues, c, alloc, u) < -1e-9) unattractive = false;
      }
      if (!unattractive) continue;

      return alloc;
    }
  }
  throw std::runtime_error(
      "solve_continuum_equilibrium: no subset of queues admits an equilibrium within the "
      "bisection bracket");
}

QueuePrices continuum_pigouvian_prices(const ContinuumSpec& spec,
                                       const ThresholdAllocation& alloc) {
  const FlowVector flows = threshold_flows(spec, alloc);
  const int n = spec.num_queues();

  QueuePrices out;
  out.by_queue.assign(n, 0.0);
  double upper = spec.distribution().support_hi();
  for (int k = 0; k < alloc.num_used(); ++k) {
    const int q = alloc.used_queues[k];
    const double pm = spec.distribution().partial_mean(alloc.thresholds[k], upper);
    upper = alloc.thresholds[k];
    out.by_queue[q] = spec.queue(q).derivative(flows.gamma[q]) * spec.total_rate() * pm;
  }

  std::vector<char> used(n, 0);
  for (int q : alloc.used_queues) used[q] = 1;
  for (int q = 0; q < n; ++q)
    if (!used[q]) out.unused_queues.push_back(q);

  out.delay_order = alloc.used_queues;
  for (int q : out.unused_queues) out.delay_order.push_back(q);
  out.sorted.reserve(n);
  for (int q : out.delay_order) out.sorted.push_back(out.by_queue[q]);
  out.strictly_decreasing = true;
  for (int k = 1; k < alloc.num_used(); ++k)
    if (!(out.sorted[k - 1] > out.sorted[k])) out.strictly_decreasing = false;
  return out;
}

double continuum_indifference_residual(const ContinuumSpec& spec,
                                       std::span<const double> prices_by_queue,
                                       const ThresholdAllocation& alloc) {
  if (static_cast<int>(prices_by_queue.size()) != spec.num_queues())
    throw std::invalid_argument("continuum_indifference_residual: price count mismatch");
  const FlowVector flows = threshold_flows(spec, alloc);
  double worst = 0.0;
  for (int k = 0; k + 1 < alloc.num_used(); ++k) {
    const int qa = alloc.used_queues[k];
    const int qb = alloc.used_queues[k + 1];
    const double beta = alloc.thresholds[k];
    const double ca = prices_by_queue[qa] + beta * spec.queue(qa).cost(flows.gamma[qa]);
    const double cb = prices_by_queue[qb] + beta * spec.queue(qb).cost(flows.gamma[qb]);
    worst = std::max(worst, std::abs(ca - cb));
  }
  return worst;
}

}  // namespace queuetoll
