#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "queuetoll/system.hpp"

namespace queuetoll {

enum class Discipline { kFcfs, kPs, kLcfsPr };

enum class JobSizeShape { kExponential, kDeterministic };

// Configuration for one simulation run.  `warmup` is in simulated time units
// and defaults to 10% of the horizon when left negative.  Job sizes use each
// class's mean_job_size; `job_shapes` picks the shape per class (empty means
// exponential everywhere).
struct SimConfig {
  Discipline discipline = Discipline::kFcfs;
  double horizon = 1e5;
  double warmup = -1.0;  // negative: use horizon / 10
  int replications = 1;
  std::uint64_t seed = 0;
  std::vector<JobSizeShape> job_shapes;
  bool parallel = true;

  [[nodiscard]] double effective_warmup() const {
    return warmup < 0.0 ? 0.1 * horizon : warmup;
  }
};

struct QueueStats {
  double mean_sojourn = 0.0;
  double sojourn_half_width = 0.0;  // 95% CI half-width
  double tail_probability = 0.0;    // empirical P(wait > tail_threshold)
  double tail_half_width = 0.0;
  double tail_threshold = 1.0;
  double mean_in_system = 0.0;      // time-average number of jobs present
  double little_z = 0.0;            // mean-in-system vs arrival-rate * sojourn
  double arrival_rate_z = 0.0;      // empirical work arrival rate vs gamma_j
  std::int64_t completed_jobs = 0;
  bool divergent = false;   // offered flow at or above capacity
  bool no_samples = false;  // queue received no completed jobs after warmup
};

struct ClassStats {
  double mean_sojourn = 0.0;
  double mean_cost = 0.0;  // sensitivity * mean sojourn
  std::int64_t completed_jobs = 0;
};

struct SimReport {
  std::vector<QueueStats> queues;
  std::vector<ClassStats> classes;
  double empirical_u = 0.0;  // aggregate cost rate, sum_i beta_i * completions_i * W_i / t
  double empirical_u_half_width = 0.0;
  std::int64_t events_processed = 0;
  bool any_divergent = false;
};

// Runs `cfg.replications` independent replications of Bernoulli-routed
// Poisson traffic through the queues and merges statistics by replication
// index.  Identical (spec, routing, cfg) inputs reproduce bit-identical
// reports.  Unstable queues are simulated anyway and flagged divergent.
// Tabulated cost models carry no generative queue and are rejected.
SimReport simulate(const SystemSpec& spec, const RoutingMatrix& routing, const SimConfig& cfg);

struct AnalyticComparison {
  int queue = 0;
  double analytic = 0.0;   // cost-model value at gamma_j (size-mix scaled)
  double empirical = 0.0;
  double z = 0.0;
  bool no_samples = false;
  std::string statistic;   // "sojourn" or "tail"
};

// Pairs each queue's analytic cost-model value at the offered flow with the
// matching empirical statistic from a fresh simulation run (or an existing
// report produced by the same spec/routing/config).
std::vector<AnalyticComparison> compare_to_analytic(const SystemSpec& spec,
                                                    const RoutingMatrix& routing,
                                                    const SimConfig& cfg);
std::vector<AnalyticComparison> compare_to_analytic(const SystemSpec& spec,
                                                    const RoutingMatrix& routing,
                                                    const SimConfig& cfg,
                                                    const SimReport& report);

}  // namespace queuetoll
