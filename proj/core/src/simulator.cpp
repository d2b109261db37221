#include "queuetoll/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <queue>
#include <stdexcept>
#include <vector>

#include "queuetoll/model.hpp"
#include "queuetoll/rng.hpp"

namespace queuetoll {

namespace {

double t_quantile_975(int df) {
  static constexpr double kTable[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return kTable[df - 1];
  return 1.96;
}

struct Job {
  double arrival = 0.0;
  double first_service = -1.0;  // -1 until the job first reaches the server
  double remaining = 0.0;       // work units left
  int cls = 0;
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  // tie-break for determinism
  enum Kind { kArrival, kCompletion } kind = kArrival;
  int index = 0;               // class for arrivals, queue for completions
  std::uint64_t version = 0;   // stale-completion guard

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

// Per-batch accumulators; one batch per replication, or 20 time slices when
// there is only a single replication.
struct BatchAccum {
  std::vector<double> sojourn_sum, work_arrived, area;
  std::vector<std::int64_t> completions, tail_hits;
  std::vector<std::vector<double>> class_sojourn_sum;     // [class][batch]
  std::vector<std::vector<std::int64_t>> class_completions;
  std::int64_t events = 0;

  BatchAccum(int num_queues, int num_classes, int batches)
      : sojourn_sum(static_cast<std::size_t>(num_queues) * batches, 0.0),
        work_arrived(static_cast<std::size_t>(num_queues) * batches, 0.0),
        area(static_cast<std::size_t>(num_queues) * batches, 0.0),
        completions(static_cast<std::size_t>(num_queues) * batches, 0),
        tail_hits(static_cast<std::size_t>(num_queues) * batches, 0),
        class_sojourn_sum(num_classes, std::vector<double>(batches, 0.0)),
        class_completions(num_classes, std::vector<std::int64_t>(batches, 0)) {}
};

struct QueueState {
  std::vector<Job> jobs;  // FIFO front=begin; LCFS-PR top=back; PS unordered
  double last_update = 0.0;
  std::uint64_t version = 0;
  double speed = 1.0;
};

class Replication {
 public:
  Replication(const SystemSpec& spec, const RoutingMatrix& routing, const SimConfig& cfg,
              int rep, int batches)
      : spec_(spec),
        routing_(routing),
        cfg_(cfg),
        warmup_(cfg.effective_warmup()),
        batches_(batches),
        accum_(spec.num_queues(), spec.num_classes(), batches) {
    const int m = spec.num_classes();
    arrival_streams_.reserve(m);
    routing_streams_.reserve(m);
    size_streams_.reserve(m);
    for (int i = 0; i < m; ++i) {
      const auto r = static_cast<std::uint64_t>(rep);
      const auto c = static_cast<std::uint64_t>(i);
      arrival_streams_.emplace_back(cfg.seed, r, c, 0);
      routing_streams_.emplace_back(cfg.seed, r, c, 1);
      size_streams_.emplace_back(cfg.seed, r, c, 2);
    }
    queues_.resize(spec.num_queues());
    for (int j = 0; j < spec.num_queues(); ++j) {
      const auto rate = spec.queue(j).service_rate();
      if (!rate)
        throw std::invalid_argument(
            "simulate: tabulated cost models describe no physical server");
      queues_[j].speed = *rate;
    }
  }

  BatchAccum run() {
    for (int i = 0; i < spec_.num_classes(); ++i) schedule_arrival(i, 0.0);
    while (!heap_.empty() && heap_.top().time <= cfg_.horizon) {
      const Event ev = heap_.top();
      heap_.pop();
      if (ev.kind == Event::kCompletion && ev.version != queues_[ev.index].version)
        continue;  // superseded by a later reschedule
      ++accum_.events;
      if (ev.kind == Event::kArrival)
        handle_arrival(ev);
      else
        handle_completion(ev);
    }
    for (int j = 0; j < spec_.num_queues(); ++j) integrate_area(j, cfg_.horizon);
    return std::move(accum_);
  }

 private:
  int batch_of(double t) const {
    if (batches_ == 1) return 0;
    const double width = (cfg_.horizon - warmup_) / batches_;
    const int b = static_cast<int>((t - warmup_) / width);
    return std::clamp(b, 0, batches_ - 1);
  }

  std::size_t cell(int queue, int batch) const {
    return static_cast<std::size_t>(queue) * batches_ + batch;
  }

  void schedule_arrival(int cls, double now) {
    const double t = now + arrival_streams_[cls].exponential(1.0 / spec_.cls(cls).rate);
    heap_.push(Event{t, seq_++, Event::kArrival, cls, 0});
  }

  double draw_size(int cls) {
    const double mean = spec_.cls(cls).mean_job_size;
    const bool deterministic = !cfg_.job_shapes.empty() &&
                               cfg_.job_shapes[cls] == JobSizeShape::kDeterministic;
    // Keep the stream position identical for both shapes.
    const double sample = size_streams_[cls].exponential(mean);
    return deterministic ? mean : sample;
  }

  // Accumulate the number-in-system integral over [last_update, now] clipped
  // to the measurement window, assuming queue occupancy was constant there.
  void integrate_area(int j, double now) {
    QueueState& q = queues_[j];
    const double lo = std::max(q.last_update, warmup_);
    const double hi = std::min(now, cfg_.horizon);
    if (hi > lo && !q.jobs.empty()) {
      const double width = batches_ == 1 ? (cfg_.horizon - warmup_)
                                         : (cfg_.horizon - warmup_) / batches_;
      // the interval may straddle batch boundaries
      double t = lo;
      while (t < hi) {
        const int b = batch_of(t);
        const double edge = std::min(hi, warmup_ + (b + 1) * width);
        accum_.area[cell(j, b)] += static_cast<double>(q.jobs.size()) * (edge - t);
        t = edge;
      }
    }
  }

  // Advance served jobs' remaining work up to `now` under the discipline.
  void elapse(int j, double now) {
    QueueState& q = queues_[j];
    const double dt = now - q.last_update;
    if (dt > 0.0 && !q.jobs.empty()) {
      switch (cfg_.discipline) {
        case Discipline::kFcfs:
          q.jobs.front().remaining -= dt * q.speed;
          break;
        case Discipline::kPs: {
          const double each = dt * q.speed / static_cast<double>(q.jobs.size());
          for (Job& job : q.jobs) job.remaining -= each;
          break;
        }
        case Discipline::kLcfsPr:
          q.jobs.back().remaining -= dt * q.speed;
          break;
      }
    }
    integrate_area(j, now);
    q.last_update = now;
  }

  void schedule_completion(int j, double now) {
    QueueState& q = queues_[j];
    ++q.version;
    if (q.jobs.empty()) return;
    double work = 0.0;
    double scale = 1.0;
    switch (cfg_.discipline) {
      case Discipline::kFcfs:
        work = q.jobs.front().remaining;
        break;
      case Discipline::kPs: {
        work = q.jobs.front().remaining;
        for (const Job& job : q.jobs) work = std::min(work, job.remaining);
        scale = static_cast<double>(q.jobs.size());
        break;
      }
      case Discipline::kLcfsPr:
        work = q.jobs.back().remaining;
        break;
    }
    const double t = now + std::max(work, 0.0) * scale / q.speed;
    heap_.push(Event{t, seq_++, Event::kCompletion, j, q.version});
  }

  void handle_arrival(const Event& ev) {
    const int cls = ev.index;
    const int j = static_cast<int>(routing_streams_[cls].categorical(routing_.row(cls)));
    const double size = draw_size(cls);
    schedule_arrival(cls, ev.time);

    elapse(j, ev.time);
    QueueState& q = queues_[j];
    Job job{ev.time, -1.0, size, cls};
    const bool serves_now = q.jobs.empty() || cfg_.discipline != Discipline::kFcfs;
    if (serves_now) job.first_service = ev.time;
    q.jobs.push_back(job);
    if (ev.time >= warmup_)
      accum_.work_arrived[cell(j, batch_of(ev.time))] += size;
    schedule_completion(j, ev.time);
  }

  void handle_completion(const Event& ev) {
    const int j = ev.index;
    elapse(j, ev.time);
    QueueState& q = queues_[j];

    std::size_t done = 0;  // FCFS completes the head, LCFS-PR the top, PS the minimum
    switch (cfg_.discipline) {
      case Discipline::kFcfs:
        done = 0;
        break;
      case Discipline::kPs:
        for (std::size_t k = 1; k < q.jobs.size(); ++k)
          if (q.jobs[k].remaining < q.jobs[done].remaining) done = k;
        break;
      case Discipline::kLcfsPr:
        done = q.jobs.size() - 1;
        break;
    }
    const Job job = q.jobs[done];
    q.jobs.erase(q.jobs.begin() + static_cast<std::ptrdiff_t>(done));
    if (cfg_.discipline == Discipline::kFcfs && !q.jobs.empty() &&
        q.jobs.front().first_service < 0.0)
      q.jobs.front().first_service = ev.time;

    if (job.arrival >= warmup_) {
      const int b = batch_of(ev.time);
      const double sojourn = ev.time - job.arrival;
      const double wait = job.first_service - job.arrival;
      const double threshold = spec_.queue(j).tail_threshold().value_or(1.0);
      accum_.sojourn_sum[cell(j, b)] += sojourn;
      accum_.completions[cell(j, b)] += 1;
      if (wait > threshold) accum_.tail_hits[cell(j, b)] += 1;
      accum_.class_sojourn_sum[job.cls][b] += sojourn;
      accum_.class_completions[job.cls][b] += 1;
    }
    schedule_completion(j, ev.time);
  }

  const SystemSpec& spec_;
  const RoutingMatrix& routing_;
  const SimConfig& cfg_;
  double warmup_;
  int batches_;
  BatchAccum accum_;
  std::vector<RandomStream> arrival_streams_, routing_streams_, size_streams_;
  std::vector<QueueState> queues_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  std::uint64_t seq_ = 0;
};

struct Summary {
  double mean = 0.0;
  double half_width = 0.0;
  double std_err = 0.0;
  int used = 0;
};

// Mean and 95% CI of per-batch values, skipping batches flagged unusable.
Summary summarize(const std::vector<double>& values, const std::vector<char>& usable) {
  Summary s;
  double sum = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (!usable[b]) continue;
    sum += values[b];
    ++s.used;
  }
  if (s.used == 0) return s;
  s.mean = sum / s.used;
  if (s.used < 2) return s;
  double ss = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (!usable[b]) continue;
    const double d = values[b] - s.mean;
    ss += d * d;
  }
  s.std_err = std::sqrt(ss / (s.used - 1)) / std::sqrt(static_cast<double>(s.used));
  s.half_width = t_quantile_975(s.used - 1) * s.std_err;
  return s;
}

void validate_config(const SystemSpec& spec, const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  if (!(cfg.horizon > cfg.effective_warmup()))
    throw std::invalid_argument("simulate: warmup leaves zero effective horizon");
  if (cfg.replications < 1)
    throw std::invalid_argument("simulate: need at least one replication");
  if (!cfg.job_shapes.empty() &&
      static_cast<int>(cfg.job_shapes.size()) != spec.num_classes())
    throw std::invalid_argument("simulate: job_shapes must cover every class");
}

}  // namespace

SimReport simulate(const SystemSpec& spec, const RoutingMatrix& routing, const SimConfig& cfg) {
  validate_config(spec, cfg);
  if (routing.num_classes() != spec.num_classes() || routing.num_queues() != spec.num_queues())
    throw std::invalid_argument("simulate: routing matrix shape mismatch");

  const int n = spec.num_queues();
  const int m = spec.num_classes();
  const int reps = cfg.replications;
  const int batches_per_rep = reps == 1 ? 20 : 1;
  const int total_batches = reps * batches_per_rep;

  std::vector<BatchAccum> rep_results;
  rep_results.reserve(reps);
  if (cfg.parallel && reps > 1) {
    std::vector<std::future<BatchAccum>> futures;
    futures.reserve(reps);
    for (int r = 0; r < reps; ++r)
      futures.push_back(std::async(std::launch::async, [&, r] {
        return Replication(spec, routing, cfg, r, batches_per_rep).run();
      }));
    for (auto& f : futures) rep_results.push_back(f.get());
  } else {
    for (int r = 0; r < reps; ++r)
      rep_results.push_back(Replication(spec, routing, cfg, r, batches_per_rep).run());
  }

  const FlowVector gamma = aggregate_rates(spec, routing);
  const double window = (cfg.horizon - cfg.effective_warmup()) / batches_per_rep;

  SimReport report;
  report.queues.resize(n);
  report.classes.resize(m);

  // flatten to one batch axis: replication-major
  auto flat = [&](auto&& get) {
    std::vector<double> v(total_batches, 0.0);
    for (int r = 0; r < reps; ++r)
      for (int b = 0; b < batches_per_rep; ++b) v[r * batches_per_rep + b] = get(r, b);
    return v;
  };

  for (int j = 0; j < n; ++j) {
    QueueStats& qs = report.queues[j];
    qs.tail_threshold = spec.queue(j).tail_threshold().value_or(1.0);
    qs.divergent = gamma[j] >= spec.queue(j).capacity();

    std::vector<char> has_jobs(total_batches, 0);
    std::int64_t total_jobs = 0;
    for (int r = 0; r < reps; ++r)
      for (int b = 0; b < batches_per_rep; ++b) {
        const auto c = rep_results[r].completions[static_cast<std::size_t>(j) * batches_per_rep + b];
        has_jobs[r * batches_per_rep + b] = c > 0;
        total_jobs += c;
      }
    qs.completed_jobs = total_jobs;
    qs.no_samples = total_jobs == 0;
    std::vector<char> all(total_batches, 1);

    auto at = [&](int b) -> std::size_t {
      return static_cast<std::size_t>(j) * batches_per_rep + b;
    };
    const auto sojourns = flat([&](int r, int b) {
      const auto& a = rep_results[r];
      return a.completions[at(b)] > 0 ? a.sojourn_sum[at(b)] / a.completions[at(b)] : 0.0;
    });
    const auto tails = flat([&](int r, int b) {
      const auto& a = rep_results[r];
      return a.completions[at(b)] > 0
                 ? static_cast<double>(a.tail_hits[at(b)]) / a.completions[at(b)]
                 : 0.0;
    });
    const auto in_system = flat([&](int r, int b) { return rep_results[r].area[at(b)] / window; });
    const auto work_rates =
        flat([&](int r, int b) { return rep_results[r].work_arrived[at(b)] / window; });

    const Summary sj = summarize(sojourns, has_jobs);
    qs.mean_sojourn = sj.mean;
    qs.sojourn_half_width = sj.half_width;
    const Summary tl = summarize(tails, has_jobs);
    qs.tail_probability = tl.mean;
    qs.tail_half_width = tl.half_width;
    const Summary ls = summarize(in_system, all);
    qs.mean_in_system = ls.mean;

    // Little's law: number in system vs (job arrival rate) x (mean sojourn),
    // measured per batch so the z-score sees between-batch variability.
    double job_rate = 0.0;
    for (int i = 0; i < m; ++i) job_rate += spec.cls(i).rate * routing(i, j);
    std::vector<double> little(total_batches, 0.0);
    for (int b = 0; b < total_batches; ++b) little[b] = in_system[b] - job_rate * sojourns[b];
    const Summary ld = summarize(little, has_jobs);
    qs.little_z = ld.std_err > 0.0 ? ld.mean / ld.std_err : 0.0;

    const Summary wr = summarize(work_rates, all);
    qs.arrival_rate_z = wr.std_err > 0.0 ? (wr.mean - gamma[j]) / wr.std_err : 0.0;

    report.any_divergent = report.any_divergent || qs.divergent;
  }

  std::vector<double> u(total_batches, 0.0);
  std::vector<char> all(total_batches, 1);
  for (int i = 0; i < m; ++i) {
    ClassStats& cs = report.classes[i];
    std::vector<char> has_jobs(total_batches, 0);
    std::int64_t jobs = 0;
    const auto sojourns = flat([&](int r, int b) {
      const auto& a = rep_results[r];
      return a.class_completions[i][b] > 0 ? a.class_sojourn_sum[i][b] / a.class_completions[i][b]
                                           : 0.0;
    });
    for (int r = 0; r < reps; ++r)
      for (int b = 0; b < batches_per_rep; ++b) {
        has_jobs[r * batches_per_rep + b] = rep_results[r].class_completions[i][b] > 0;
        jobs += rep_results[r].class_completions[i][b];
        u[r * batches_per_rep + b] +=
            spec.cls(i).sensitivity * rep_results[r].class_sojourn_sum[i][b] / window;
      }
    const Summary sj = summarize(sojourns, has_jobs);
    cs.mean_sojourn = sj.mean;
    cs.mean_cost = spec.cls(i).sensitivity * sj.mean;
    cs.completed_jobs = jobs;
  }
  const Summary us = summarize(u, all);
  report.empirical_u = us.mean;
  report.empirical_u_half_width = us.half_width;

  for (const auto& a : rep_results) report.events_processed += a.events;
  return report;
}

std::vector<AnalyticComparison> compare_to_analytic(const SystemSpec& spec,
                                                    const RoutingMatrix& routing,
                                                    const SimConfig& cfg) {
  return compare_to_analytic(spec, routing, cfg, simulate(spec, routing, cfg));
}

std::vector<AnalyticComparison> compare_to_analytic(const SystemSpec& spec,
                                                    const RoutingMatrix& routing,
                                                    const SimConfig& cfg,
                                                    const SimReport& report) {
  const FlowVector gamma = aggregate_rates(spec, routing);
  const int batches = cfg.replications == 1 ? 20 : cfg.replications;

  std::vector<AnalyticComparison> rows;
  rows.reserve(spec.num_queues());
  for (int j = 0; j < spec.num_queues(); ++j) {
    const QueueStats& qs = report.queues[j];
    AnalyticComparison row;
    row.queue = j;
    row.no_samples = qs.no_samples;

    double job_rate = 0.0, size_rate = 0.0;
    for (int i = 0; i < spec.num_classes(); ++i) {
      job_rate += spec.cls(i).rate * routing(i, j);
      size_rate += spec.work_rate(i) * routing(i, j);
    }
    const double mean_size = job_rate > 0.0 ? size_rate / job_rate : 1.0;

    const bool tail_family = spec.queue(j).family() == CostModel::Family::kMm1TailProbability;
    if (tail_family) {
      row.statistic = "tail";
      row.analytic = spec.queue(j).cost(gamma[j]);
      row.empirical = qs.tail_probability;
      const double se = qs.tail_half_width / t_quantile_975(batches - 1);
      row.z = se > 0.0 ? (row.empirical - row.analytic) / se : 0.0;
    } else {
      // With exponential sizes a flow gamma produces mean sojourn
      // (mean size) x D(gamma) for both the M/M/1 and PS families.
      row.statistic = "sojourn";
      row.analytic = (qs.no_samples ? 1.0 : mean_size) * spec.queue(j).cost(gamma[j]);
      row.empirical = qs.mean_sojourn;
      const double se = qs.sojourn_half_width / t_quantile_975(batches - 1);
      row.z = se > 0.0 ? (row.empirical - row.analytic) / se : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace queuetoll
