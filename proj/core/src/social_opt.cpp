#include "queuetoll/social_opt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "queuetoll/rng.hpp"

namespace queuetoll {

namespace {

constexpr double kSupportEps = 1e-9;  // entries above this count as "used"

// Euclidean projection of v onto the probability simplex (Duchi et al.).
void project_simplex(std::span<double> v) {
  thread_local std::vector<double> sorted;
  sorted.assign(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  int support = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) {
      theta = t;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(0.0, x - theta);
    sum += x;
  }
  // Kill residual drift so RoutingMatrix validation never trips.
  if (sum > 0.0)
    for (double& x : v) x /= sum;
}

double evaluate(const SystemSpec& spec, const std::vector<double>& p) {
  return social_cost(spec, RoutingMatrix(p, spec.num_classes(), spec.num_queues()));
}

double kkt_residual_of(const SystemSpec& spec, const std::vector<double>& p) {
  const RoutingMatrix routing(p, spec.num_classes(), spec.num_queues());
  const Matrix g = social_cost_gradient(spec, routing);
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    double support_max = -std::numeric_limits<double>::infinity();
    double overall_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      overall_min = std::min(overall_min, g(i, j));
      if (routing(i, j) > kSupportEps) support_max = std::max(support_max, g(i, j));
    }
    worst = std::max(worst, support_max - overall_min);
  }
  return worst;
}

std::vector<double> proportional_start(const SystemSpec& spec) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  const double total = spec.total_capacity();
  std::vector<double> p(static_cast<std::size_t>(m) * n);
  for (int j = 0; j < n; ++j) {
    const double share = spec.queue(j).capacity() / total;
    for (int i = 0; i < m; ++i) p[static_cast<std::size_t>(i) * n + j] = share;
  }
  for (int i = 0; i < m; ++i)
    project_simplex({p.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)});
  return p;
}

std::vector<double> random_start(const SystemSpec& spec, std::uint64_t seed, int restart) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  RandomStream rng(seed, static_cast<std::uint64_t>(restart), 0, 1);
  std::vector<double> p(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = rng.exponential(1.0);  // flat Dirichlet
      p[static_cast<std::size_t>(i) * n + j] = e;
      sum += e;
    }
    for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(i) * n + j] /= sum;
  }
  // Pull infeasible draws toward the always-feasible proportional split.
  const std::vector<double> prop = proportional_start(spec);
  for (int tries = 0; tries < 80 && evaluate(spec, p) == kInfiniteCost; ++tries)
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = 0.5 * (p[k] + prop[k]);
  return p;
}

// Dense Gaussian elimination with partial pivoting; returns false if the
// system is (numerically) singular.
bool solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
          std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    if (std::abs(a[static_cast<std::size_t>(pivot) * n + col]) < 1e-14) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(pivot) * n + c],
                  a[static_cast<std::size_t>(col) * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double s = b[col];
    for (int c = col + 1; c < n; ++c) s -= a[static_cast<std::size_t>(col) * n + c] * b[c];
    b[col] = s / a[static_cast<std::size_t>(col) * n + col];
  }
  return true;
}

// Equal-gradient Newton refinement on the active support.  Projected gradient
// identifies the support and gets close; this drives the stationarity system
// (gradient equal across each class's used queues, rows summing to one) to
// machine precision.  Falls back silently if the support turns out wrong.
void polish(const SystemSpec& spec, std::vector<double>& p) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();

  std::vector<std::vector<int>> support(m);
  int nvars = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      if (p[static_cast<std::size_t>(i) * n + j] > kSupportEps) support[i].push_back(j);
    if (support[i].empty()) return;
    nvars += static_cast<int>(support[i].size());
  }
  if (nvars > 64) return;

  auto pack = [&](const std::vector<double>& full) {
    std::vector<double> x;
    x.reserve(nvars);
    for (int i = 0; i < m; ++i)
      for (int j : support[i]) x.push_back(full[static_cast<std::size_t>(i) * n + j]);
    return x;
  };
  auto unpack = [&](const std::vector<double>& x) {
    std::vector<double> full(static_cast<std::size_t>(m) * n, 0.0);
    int k = 0;
    for (int i = 0; i < m; ++i)
      for (int j : support[i]) full[static_cast<std::size_t>(i) * n + j] = x[k++];
    return full;
  };
  auto residual_fn = [&](const std::vector<double>& x, std::vector<double>& out) -> bool {
    const std::vector<double> full = unpack(x);
    for (double v : full)
      if (v < -1e-12) return false;
    const RoutingMatrix routing(
        [&] {
          std::vector<double> clipped = full;
          for (double& v : clipped) v = std::min(1.0, std::max(0.0, v));
          for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += clipped[static_cast<std::size_t>(i) * n + j];
            if (s <= 0.0) return clipped;
            for (int j = 0; j < n; ++j) clipped[static_cast<std::size_t>(i) * n + j] /= s;
          }
          return clipped;
        }(),
        m, n);
    const FlowVector flows = aggregate_rates(spec, routing);
    for (int j = 0; j < n; ++j)
      if (flows.gamma[j] >= spec.queue(j).capacity()) return false;
    const Matrix g = social_cost_gradient(spec, routing);
    out.clear();
    out.reserve(nvars);
    int k = 0;
    for (int i = 0; i < m; ++i) {
      const int ref = support[i].front();
      double sum = 0.0;
      for (std::size_t s = 0; s < support[i].size(); ++s) sum += x[k++];
      for (std::size_t s = 1; s < support[i].size(); ++s)
        out.push_back(g(i, support[i][s]) - g(i, ref));
      out.push_back(sum - 1.0);
    }
    return true;
  };

  std::vector<double> x = pack(p);
  std::vector<double> f;
  if (!residual_fn(x, f)) return;
  auto norm_inf = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s = std::max(s, std::abs(e));
    return s;
  };

  for (int iter = 0; iter < 40 && norm_inf(f) > 1e-13; ++iter) {
    // Forward-difference Jacobian; the system is tiny.
    std::vector<double> jac(static_cast<std::size_t>(nvars) * nvars);
    std::vector<double> fp;
    bool ok = true;
    for (int v = 0; v < nvars; ++v) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[v]));
      std::vector<double> xp = x;
      xp[v] += h;
      if (!residual_fn(xp, fp)) {
        ok = false;
        break;
      }
      for (int r = 0; r < nvars; ++r)
        jac[static_cast<std::size_t>(r) * nvars + v] = (fp[r] - f[r]) / h;
    }
    if (!ok) return;
    std::vector<double> step = f;
    for (double& s : step) s = -s;
    if (!solve_linear(jac, step, nvars)) return;

    double alpha = 1.0;
    bool advanced = false;
    for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
      std::vector<double> xn = x;
      for (int v = 0; v < nvars; ++v) xn[v] += alpha * step[v];
      std::vector<double> fn;
      if (!residual_fn(xn, fn)) continue;
      if (norm_inf(fn) < norm_inf(f)) {
        x = std::move(xn);
        f = std::move(fn);
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }

  std::vector<double> candidate = unpack(x);
  for (double& v : candidate) v = std::min(1.0, std::max(0.0, v));
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += candidate[static_cast<std::size_t>(i) * n + j];
    if (s <= 0.0) return;
    for (int j = 0; j < n; ++j) candidate[static_cast<std::size_t>(i) * n + j] /= s;
  }
  if (evaluate(spec, candidate) == kInfiniteCost) return;
  if (kkt_residual_of(spec, candidate) < kkt_residual_of(spec, p)) p = std::move(candidate);
}

struct RestartOutcome {
  std::vector<double> p;
  double cost = kInfiniteCost;
  double kkt = std::numeric_limits<double>::quiet_NaN();
};

RestartOutcome run_restart(const SystemSpec& spec, const SocialOptOptions& opt, int restart) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  std::vector<double> p =
      restart == 0 ? proportional_start(spec) : random_start(spec, opt.seed, restart);
  double cost = evaluate(spec, p);
  if (cost == kInfiniteCost) return {};  // couldn't find a feasible start

  constexpr double kArmijoSigma = 1e-4;
  double step = 1.0;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    const RoutingMatrix routing(p, m, n);
    const Matrix g = social_cost_gradient(spec, routing);

    double moved = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> cand = p;
      for (std::size_t k = 0; k < cand.size(); ++k) cand[k] -= step * g.data[k];
      for (int i = 0; i < m; ++i)
        project_simplex(
            {cand.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)});
      double dist2 = 0.0;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        const double d = cand[k] - p[k];
        dist2 += d * d;
      }
      const double cand_cost = evaluate(spec, cand);  // +inf acts as a wall here
      if (cand_cost <= cost - kArmijoSigma / step * dist2) {
        p = std::move(cand);
        cost = cand_cost;
        moved = std::sqrt(dist2);
        accepted = true;
        step = std::min(step * 1.3, 1e6);
        break;
      }
      step *= 0.5;
    }
    if (!accepted || moved < 1e-14) break;
    if (iter % 16 == 15 && kkt_residual_of(spec, p) <= opt.kkt_tol) break;
  }

  polish(spec, p);
  return {p, evaluate(spec, p), kkt_residual_of(spec, p)};
}

}  // namespace

OptimumResult solve_social_optimum(const SystemSpec& spec, const SocialOptOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("solve_social_optimum: restarts < 1");

  std::vector<RestartOutcome> outcomes(options.restarts);
  if (options.parallel && options.restarts > 1) {
    std::vector<std::future<RestartOutcome>> futs;
    futs.reserve(options.restarts);
    for (int r = 0; r < options.restarts; ++r)
      futs.push_back(std::async(std::launch::async | std::launch::deferred,
                                [&spec, &options, r] { return run_restart(spec, options, r); }));
    for (int r = 0; r < options.restarts; ++r) outcomes[r] = futs[r].get();
  } else {
    for (int r = 0; r < options.restarts; ++r) outcomes[r] = run_restart(spec, options, r);
  }

  int best = -1;
  for (int r = 0; r < options.restarts; ++r) {
    if (outcomes[r].p.empty()) continue;
    if (best < 0 || outcomes[r].cost < outcomes[best].cost) best = r;  // ties: lowest index
  }
  if (best < 0)
    throw std::runtime_error("solve_social_optimum: no feasible starting point found");

  const auto& win = outcomes[best];
  RoutingMatrix routing(win.p, spec.num_classes(), spec.num_queues());
  FlowVector flows = aggregate_rates(spec, routing);
  return {std::move(routing), std::move(flows), win.cost, win.kkt,
          options.restarts,   win.kkt <= options.kkt_tol};
}

namespace {

// All length-n compositions of k, i.e. rows of the uniform simplex grid.
std::vector<std::vector<int>> compositions(int k, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  // Odometer over the first n-1 cells; last cell absorbs the remainder.
  auto rec = [&](auto&& self, int cell, int left) -> void {
    if (cell == n - 1) {
      cur[cell] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[cell] = v;
      self(self, cell + 1, left - v);
    }
  };
  rec(rec, 0, k);
  return out;
}

}  // namespace

OptimumResult grid_oracle(const SystemSpec& spec, double resolution) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  if (m > 3 || n > 3)
    throw std::invalid_argument("grid_oracle: only supported for M <= 3 and N <= 3");
  if (!(resolution > 0.0 && resolution <= 0.5))
    throw std::invalid_argument("grid_oracle: resolution must be in (0, 0.5]");

  const int k = static_cast<int>(std::llround(1.0 / resolution));
  const auto rows = compositions(k, n);
  const double per_row = static_cast<double>(rows.size());
  double combos = 1.0;
  for (int i = 0; i < m; ++i) combos *= per_row;
  if (combos > 1e8)
    throw std::invalid_argument("grid_oracle: grid would exceed 1e8 evaluations");

  // Precompute each row choice as probabilities.
  std::vector<std::vector<double>> row_probs(rows.size(), std::vector<double>(n));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int j = 0; j < n; ++j) row_probs[r][j] = static_cast<double>(rows[r][j]) / k;

  std::vector<std::size_t> idx(m, 0);
  std::vector<double> best_p;
  double best_cost = kInfiniteCost;
  std::vector<double> p(static_cast<std::size_t>(m) * n);
  while (true) {
    for (int i = 0; i < m; ++i)
      std::copy(row_probs[idx[i]].begin(), row_probs[idx[i]].end(),
                p.begin() + static_cast<std::size_t>(i) * n);
    const double cost = evaluate(spec, p);
    if (cost < best_cost) {
      best_cost = cost;
      best_p = p;
    }
    int cell = m - 1;
    while (cell >= 0 && ++idx[cell] == rows.size()) idx[cell--] = 0;
    if (cell < 0) break;
  }
  if (best_p.empty())
    throw std::runtime_error("grid_oracle: no feasible grid point");

  RoutingMatrix routing(best_p, m, n);
  FlowVector flows = aggregate_rates(spec, routing);
  return {std::move(routing), std::move(flows), best_cost,
          std::numeric_limits<double>::quiet_NaN(), 0, true};
}

StructureReport check_optimal_structure(const SystemSpec& spec, const RoutingMatrix& routing,
                                        double tol) {
  const int m = spec.num_classes();
  const int n = spec.num_queues();
  const FlowVector flows = aggregate_rates(spec, routing);

  StructureReport report;
  std::vector<double> delay(n);
  for (int j = 0; j < n; ++j) delay[j] = spec.queue(j).cost(flows.gamma[j]);

  report.queue_order.resize(n);
  std::iota(report.queue_order.begin(), report.queue_order.end(), 0);
  std::sort(report.queue_order.begin(), report.queue_order.end(), [&](int a, int b) {
    if (delay[a] != delay[b]) return delay[a] < delay[b];
    return a < b;  // deterministic tie-break on original index
  });
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[report.queue_order[k]] = k;

  auto used = [&](int i, int j) { return routing(i, j) > tol; };

  // (a) any queue used by a higher-sensitivity class must have strictly
  // lower delay than any *different* queue used by a lower-sensitivity class.
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = i1 + 1; i2 < m; ++i2)
      for (int j1 = 0; j1 < n; ++j1) {
        if (!used(i1, j1)) continue;
        for (int j2 = 0; j2 < n; ++j2) {
          if (j1 == j2 || !used(i2, j2)) continue;
          if (delay[j1] - delay[j2] >= tol)
            report.violations.push_back(
                {i1, i2, j1, j2,
                 "class " + std::to_string(i1) + " uses queue " + std::to_string(j1) +
                     " with delay not below queue " + std::to_string(j2) + " used by class " +
                     std::to_string(i2)});
        }
      }

  // (b) no two classes may split across the same two queues.
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = i1 + 1; i2 < m; ++i2)
      for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = j1 + 1; j2 < n; ++j2)
          if (used(i1, j1) && used(i1, j2) && used(i2, j1) && used(i2, j2))
            report.violations.push_back(
                {i1, i2, j1, j2,
                 "classes " + std::to_string(i1) + " and " + std::to_string(i2) +
                     " both split across queues " + std::to_string(j1) + " and " +
                     std::to_string(j2)});

  // (c) in delay order, every class must occupy one contiguous block and the
  // blocks must march rightward with falling sensitivity.
  report.block_lo.assign(m, -1);
  report.block_hi.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    int lo = n, hi = -1;
    for (int j = 0; j < n; ++j)
      if (used(i, j)) {
        lo = std::min(lo, pos[j]);
        hi = std::max(hi, pos[j]);
      }
    if (hi < 0) {
      report.violations.push_back({i, i, -1, -1, "class " + std::to_string(i) +
                                                     " routes no mass above tolerance"});
      continue;
    }
    report.block_lo[i] = lo;
    report.block_hi[i] = hi;
    for (int k = lo; k <= hi; ++k)
      if (!used(i, report.queue_order[k]))
        report.violations.push_back(
            {i, i, report.queue_order[k], -1,
             "class " + std::to_string(i) + " skips queue " +
                 std::to_string(report.queue_order[k]) + " inside its delay block"});
    if (i > 0 && report.block_lo[i - 1] >= 0 &&
        (report.block_lo[i] < report.block_lo[i - 1] ||
         report.block_hi[i] < report.block_hi[i - 1]))
      report.violations.push_back({i - 1, i, -1, -1,
                                   "blocks of classes " + std::to_string(i - 1) + " and " +
                                       std::to_string(i) + " are not ordered by delay"});
  }

  report.consistent = report.violations.empty();
  return report;
}

}  // namespace queuetoll
