// queuetoll: optimize / price / verify / simulate multiclass routing to
// parallel queues.  Human-readable tables go to stdout; --out writes the same
// data as JSON or CSV at full precision.
//
// Exit codes: 0 success, 1 invalid input, 2 solver did not converge.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "queuetoll/continuum.hpp"
#include "queuetoll/model.hpp"
#include "queuetoll/pricing.hpp"
#include "queuetoll/scenario.hpp"
#include "queuetoll/simulator.hpp"
#include "queuetoll/social_opt.hpp"
#include "queuetoll/wardrop.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace queuetoll;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNoConvergence = 2;

struct CommonArgs {
  std::string scenario_path;
  std::string out_path;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  double tol = 1e-6;
};

// 6 significant digits for humans.
std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// full precision for machine output
std::string fmt_full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  auto print_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c)
      std::cout << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << row[c];
    std::cout << "\n";
  };
  print_row(header);
  for (const auto& row : rows) print_row(row);
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "\n";
  }
  return os.str();
}

void write_output(const CommonArgs& args, const Json& machine,
                  const std::vector<std::string>& csv_header,
                  const std::vector<std::vector<std::string>>& csv_rows) {
  if (args.out_path.empty()) return;
  std::ofstream out(args.out_path);
  if (!out) throw std::invalid_argument("cannot open output file " + args.out_path);
  if (args.format == "csv")
    out << to_csv(csv_header, csv_rows);
  else
    out << machine.dump(2) << "\n";
}

Json routing_to_json(const RoutingMatrix& routing) {
  Json rows = Json::array();
  for (int i = 0; i < routing.num_classes(); ++i) {
    const auto row = routing.row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

// sorted rank of each original queue index (delay-ascending), -1 if unused
std::vector<int> ranks_from_order(const std::vector<int>& order, int n) {
  std::vector<int> rank(n, -1);
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = static_cast<int>(k);
  return rank;
}

int cmd_optimize(const Scenario& sc, const CommonArgs& args, bool with_oracle) {
  if (sc.continuum) {
    const ThresholdAllocation alloc = solve_continuum_optimum(*sc.continuum,
                                                              sc.continuum_opt_options);
    const double u = continuum_cost(*sc.continuum, alloc);
    std::cout << "continuum optimum: U = " << fmt(u) << ", queues used = " << alloc.num_used()
              << " of " << sc.continuum->num_queues() << "\n";
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < alloc.num_used(); ++k) {
      const int q = alloc.used_queues[k];
      const double gamma = alloc.flows.gamma[q];
      rows.push_back({std::to_string(q), std::to_string(k), fmt(alloc.thresholds[k]),
                      fmt(gamma), fmt(sc.continuum->queue(q).cost(gamma))});
    }
    const std::vector<std::string> header = {"queue", "rank", "threshold", "flow", "delay"};
    print_table(header, rows);

    Json machine;
    machine["command"] = "optimize";
    machine["u"] = u;
    machine["queue_order"] = alloc.used_queues;
    machine["thresholds"] = alloc.thresholds;
    machine["flows"] = alloc.flows.gamma;
    write_output(args, machine, header,
                 [&] {
                   std::vector<std::vector<std::string>> full;
                   for (int k = 0; k < alloc.num_used(); ++k) {
                     const int q = alloc.used_queues[k];
                     full.push_back({std::to_string(q), std::to_string(k),
                                     fmt_full(alloc.thresholds[k]), fmt_full(alloc.flows.gamma[q]),
                                     fmt_full(sc.continuum->queue(q).cost(alloc.flows.gamma[q]))});
                   }
                   return full;
                 }());
    return kExitOk;
  }

  const SystemSpec& spec = *sc.system;
  SocialOptOptions options = sc.optimize_options;
  if (args.seed) options.seed = *args.seed;
  const OptimumResult result = solve_social_optimum(spec, options);
  const StructureReport structure = check_optimal_structure(spec, result.routing);

  std::cout << "social optimum: U = " << fmt(result.cost)
            << ", kkt residual = " << fmt(result.kkt_residual)
            << ", converged = " << (result.converged ? "yes" : "no") << " ("
            << result.restarts_used << " restarts)\n";
  const std::vector<int> rank = ranks_from_order(structure.queue_order, spec.num_queues());
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < spec.num_queues(); ++j)
    rows.push_back({std::to_string(j), rank[j] >= 0 ? std::to_string(rank[j]) : "-",
                    fmt(result.flows.gamma[j]), fmt(spec.queue(j).cost(result.flows.gamma[j]))});
  const std::vector<std::string> header = {"queue", "rank", "flow", "delay"};
  print_table(header, rows);
  std::cout << "routing (rows = classes):\n";
  for (int i = 0; i < spec.num_classes(); ++i) {
    std::cout << " ";
    for (int j = 0; j < spec.num_queues(); ++j) std::cout << " " << fmt(result.routing(i, j));
    std::cout << "\n";
  }
  std::cout << "structure check: " << (structure.consistent ? "consistent" : "violated") << "\n";
  for (const auto& v : structure.violations) std::cout << "  " << v.what << "\n";

  Json machine;
  machine["command"] = "optimize";
  machine["u"] = result.cost;
  machine["kkt_residual"] = result.kkt_residual;
  machine["converged"] = result.converged;
  machine["restarts_used"] = result.restarts_used;
  machine["flows"] = result.flows.gamma;
  machine["routing"] = routing_to_json(result.routing);
  machine["queue_order"] = structure.queue_order;
  machine["structure_consistent"] = structure.consistent;

  if (with_oracle) {
    double delta = std::numeric_limits<double>::quiet_NaN();
    std::string note;
    for (const double resolution : {2e-3, 1e-2, 5e-2}) {
      try {
        const OptimumResult grid = grid_oracle(spec, resolution);
        delta = std::abs(result.cost - grid.cost);
        note = "resolution " + fmt(resolution);
        break;
      } catch (const std::invalid_argument& e) {
        note = e.what();
      }
    }
    if (std::isnan(delta)) {
      std::cout << "oracle: unavailable (" << note << ")\n";
    } else {
      std::cout << "oracle: |solver U - grid U| = " << fmt(delta) << " at " << note << "\n";
      machine["oracle_delta"] = delta;
    }
  }

  std::vector<std::vector<std::string>> full;
  for (int j = 0; j < spec.num_queues(); ++j)
    full.push_back({std::to_string(j), rank[j] >= 0 ? std::to_string(rank[j]) : "-",
                    fmt_full(result.flows.gamma[j]),
                    fmt_full(spec.queue(j).cost(result.flows.gamma[j]))});
  write_output(args, machine, header, full);
  return result.converged ? kExitOk : kExitNoConvergence;
}

int cmd_equilibrium(const Scenario& sc, const CommonArgs& args) {
  if (!sc.prices) throw std::invalid_argument("equilibrium needs 'prices' in the scenario");

  if (sc.continuum) {
    const ThresholdAllocation alloc =
        solve_continuum_equilibrium(*sc.continuum, *sc.prices, sc.continuum_eq_options);
    const double residual =
        continuum_indifference_residual(*sc.continuum, sc.prices->values(), alloc);
    std::cout << "continuum equilibrium: indifference residual = " << fmt(residual) << "\n";
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < alloc.num_used(); ++k) {
      const int q = alloc.used_queues[k];
      rows.push_back({std::to_string(q), std::to_string(k), fmt(alloc.thresholds[k]),
                      fmt(alloc.flows.gamma[q])});
    }
    const std::vector<std::string> header = {"queue", "rank", "threshold", "flow"};
    print_table(header, rows);

    Json machine;
    machine["command"] = "equilibrium";
    machine["residual"] = residual;
    machine["queue_order"] = alloc.used_queues;
    machine["thresholds"] = alloc.thresholds;
    machine["flows"] = alloc.flows.gamma;
    std::vector<std::vector<std::string>> full;
    for (int k = 0; k < alloc.num_used(); ++k) {
      const int q = alloc.used_queues[k];
      full.push_back({std::to_string(q), std::to_string(k), fmt_full(alloc.thresholds[k]),
                      fmt_full(alloc.flows.gamma[q])});
    }
    write_output(args, machine, header, full);
    return kExitOk;
  }

  const SystemSpec& spec = *sc.system;
  const EquilibriumResult result = solve_equilibrium(spec, *sc.prices, sc.equilibrium_options);
  std::cout << "equilibrium: residual = " << fmt(result.residual)
            << ", converged = " << (result.converged ? "yes" : "no") << " (" << result.iterations
            << " iterations)\n";
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < spec.num_queues(); ++j)
    rows.push_back({std::to_string(j), fmt((*sc.prices)[j]), fmt(result.flows.gamma[j])});
  const std::vector<std::string> header = {"queue", "price", "flow"};
  print_table(header, rows);
  std::cout << "per-class equilibrium cost:";
  for (double c : result.per_class_cost) std::cout << " " << fmt(c);
  std::cout << "\nrouting (rows = classes):\n";
  for (int i = 0; i < spec.num_classes(); ++i) {
    std::cout << " ";
    for (int j = 0; j < spec.num_queues(); ++j) std::cout << " " << fmt(result.routing(i, j));
    std::cout << "\n";
  }

  Json machine;
  machine["command"] = "equilibrium";
  machine["residual"] = result.residual;
  machine["converged"] = result.converged;
  machine["iterations"] = result.iterations;
  machine["flows"] = result.flows.gamma;
  machine["per_class_cost"] = result.per_class_cost;
  machine["routing"] = routing_to_json(result.routing);
  std::vector<std::vector<std::string>> full;
  for (int j = 0; j < spec.num_queues(); ++j)
    full.push_back({std::to_string(j), fmt_full((*sc.prices)[j]), fmt_full(result.flows.gamma[j])});
  write_output(args, machine, header, full);
  return result.converged ? kExitOk : kExitNoConvergence;
}

int cmd_prices(const Scenario& sc, const CommonArgs& args, bool solve_first) {
  if (sc.continuum) {
    ThresholdAllocation alloc;
    if (sc.allocation)
      alloc = *sc.allocation;
    else if (solve_first)
      alloc = solve_continuum_optimum(*sc.continuum, sc.continuum_opt_options);
    else
      throw std::invalid_argument("prices needs 'allocation' in the scenario (or --solve)");

    const QueuePrices prices = continuum_pigouvian_prices(*sc.continuum, alloc);
    const double residual =
        continuum_indifference_residual(*sc.continuum, prices.by_queue, alloc);
    const bool certified = residual <= args.tol;
    std::cout << "continuum prices (marginal externality), indifference residual = "
              << fmt(residual) << (certified ? " (certified" : " (NOT certified") << " at tol "
              << fmt(args.tol) << ")\n";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < prices.delay_order.size(); ++k) {
      const int q = prices.delay_order[k];
      rows.push_back({std::to_string(q), std::to_string(k), fmt(prices.by_queue[q])});
    }
    const std::vector<std::string> header = {"queue", "rank", "price"};
    print_table(header, rows);

    Json machine;
    machine["command"] = "prices";
    machine["by_queue"] = prices.by_queue;
    machine["delay_order"] = prices.delay_order;
    machine["sorted"] = prices.sorted;
    machine["residual"] = residual;
    machine["certified"] = certified;
    std::vector<std::vector<std::string>> full;
    for (std::size_t k = 0; k < prices.delay_order.size(); ++k) {
      const int q = prices.delay_order[k];
      full.push_back({std::to_string(q), std::to_string(k), fmt_full(prices.by_queue[q])});
    }
    write_output(args, machine, header, full);
    return kExitOk;
  }

  const SystemSpec& spec = *sc.system;
  RoutingMatrix routing = RoutingMatrix::uniform(1, 1);
  bool converged = true;
  if (sc.routing) {
    routing = *sc.routing;
  } else if (solve_first) {
    SocialOptOptions options = sc.optimize_options;
    if (args.seed) options.seed = *args.seed;
    const OptimumResult result = solve_social_optimum(spec, options);
    routing = result.routing;
    converged = result.converged;
  } else {
    throw std::invalid_argument("prices needs 'routing' in the scenario (or --solve)");
  }

  const QueuePrices prices = pigouvian_prices(spec, routing);
  const Certification cert = certify_prices(spec, routing, prices, args.tol);
  std::cout << "prices (marginal externality), wardrop residual = " << fmt(cert.residual)
            << (cert.certified ? " (certified" : " (NOT certified") << " at tol " << fmt(cert.tol)
            << ")\n";
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < prices.delay_order.size(); ++k) {
    const int q = prices.delay_order[k];
    rows.push_back({std::to_string(q), std::to_string(k), fmt(prices.by_queue[q])});
  }
  const std::vector<std::string> header = {"queue", "rank", "price"};
  print_table(header, rows);

  Json machine;
  machine["command"] = "prices";
  machine["by_queue"] = prices.by_queue;
  machine["delay_order"] = prices.delay_order;
  machine["sorted"] = prices.sorted;
  machine["unused_queues"] = prices.unused_queues;
  machine["certified"] = cert.certified;
  machine["residual"] = cert.residual;
  machine["tol"] = cert.tol;
  std::vector<std::vector<std::string>> full;
  for (std::size_t k = 0; k < prices.delay_order.size(); ++k) {
    const int q = prices.delay_order[k];
    full.push_back({std::to_string(q), std::to_string(k), fmt_full(prices.by_queue[q])});
  }
  write_output(args, machine, header, full);
  return converged ? kExitOk : kExitNoConvergence;
}

int cmd_verify(const Scenario& sc, const CommonArgs& args) {
  bool ok = true;
  Json machine;
  machine["command"] = "verify";

  if (sc.continuum) {
    if (!sc.allocation)
      throw std::invalid_argument("verify needs 'allocation' in the scenario");
    // threshold_flows re-validates shape and monotonicity
    const FlowVector flows = threshold_flows(*sc.continuum, *sc.allocation);
    std::cout << "allocation: valid thresholds, " << sc.allocation->num_used()
              << " queues used\n";
    machine["flows"] = flows.gamma;
    if (sc.prices) {
      const double residual =
          continuum_indifference_residual(*sc.continuum, sc.prices->values(), *sc.allocation);
      ok = residual <= args.tol;
      std::cout << "indifference residual = " << fmt(residual) << " (tol " << fmt(args.tol)
                << "): " << (ok ? "pass" : "fail") << "\n";
      machine["residual"] = residual;
    }
    machine["pass"] = ok;
    write_output(args, machine, {"check", "value"}, {{"pass", ok ? "1" : "0"}});
    return ok ? kExitOk : kExitNoConvergence;
  }

  if (!sc.routing) throw std::invalid_argument("verify needs 'routing' in the scenario");
  const SystemSpec& spec = *sc.system;
  const StructureReport structure = check_optimal_structure(spec, *sc.routing, args.tol);
  ok = structure.consistent;
  std::cout << "structure check: " << (structure.consistent ? "consistent" : "violated") << "\n";
  for (const auto& v : structure.violations) std::cout << "  " << v.what << "\n";
  machine["structure_consistent"] = structure.consistent;
  machine["queue_order"] = structure.queue_order;

  if (sc.prices) {
    const double residual = wardrop_residual(spec, *sc.prices, *sc.routing);
    const bool eq_ok = residual <= args.tol;
    ok = ok && eq_ok;
    std::cout << "wardrop residual = " << fmt(residual) << " (tol " << fmt(args.tol)
              << "): " << (eq_ok ? "pass" : "fail") << "\n";
    machine["wardrop_residual"] = residual;
  }
  machine["pass"] = ok;

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"structure_consistent", structure.consistent ? "1" : "0"});
  if (sc.prices)
    rows.push_back({"wardrop_residual", fmt_full(machine["wardrop_residual"].get<double>())});
  write_output(args, machine, {"check", "value"}, rows);
  return ok ? kExitOk : kExitNoConvergence;
}

int cmd_simulate(const Scenario& sc, const CommonArgs& args, bool solve_first) {
  if (sc.continuum)
    throw std::invalid_argument("simulate supports discrete systems only");
  if (!sc.sim) throw std::invalid_argument("simulate needs 'sim' in the scenario");
  const SystemSpec& spec = *sc.system;

  RoutingMatrix routing = RoutingMatrix::uniform(1, 1);
  if (sc.routing) {
    routing = *sc.routing;
  } else if (solve_first) {
    SocialOptOptions options = sc.optimize_options;
    if (args.seed) options.seed = *args.seed;
    routing = solve_social_optimum(spec, options).routing;
  } else {
    throw std::invalid_argument("simulate needs 'routing' in the scenario (or --solve)");
  }

  SimConfig cfg = *sc.sim;
  if (args.seed) cfg.seed = *args.seed;
  const SimReport report = simulate(spec, routing, cfg);
  const auto comparison = compare_to_analytic(spec, routing, cfg, report);

  std::cout << "simulated " << report.events_processed << " events, "
            << cfg.replications << " replication(s), horizon " << fmt(cfg.horizon) << "\n";
  if (report.any_divergent) std::cout << "warning: some queues are unstable (divergent)\n";
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < spec.num_queues(); ++j) {
    const QueueStats& q = report.queues[j];
    rows.push_back({std::to_string(j), fmt(q.mean_sojourn), fmt(q.sojourn_half_width),
                    fmt(q.tail_probability), fmt(q.tail_half_width), fmt(q.mean_in_system),
                    fmt(q.little_z), std::to_string(q.completed_jobs),
                    q.divergent ? "yes" : "no"});
  }
  const std::vector<std::string> header = {"queue",     "sojourn", "+-",      "tail",
                                           "+-",        "in_sys",  "little_z", "jobs",
                                           "divergent"};
  print_table(header, rows);
  std::cout << "empirical U = " << fmt(report.empirical_u) << " +- "
            << fmt(report.empirical_u_half_width) << "\n";
  std::vector<std::vector<std::string>> class_rows;
  for (int i = 0; i < spec.num_classes(); ++i) {
    const ClassStats& c = report.classes[i];
    class_rows.push_back({std::to_string(i), fmt(c.mean_sojourn), fmt(c.mean_cost),
                          std::to_string(c.completed_jobs)});
  }
  print_table({"class", "sojourn", "cost", "jobs"}, class_rows);

  std::cout << "analytic comparison (csv):\n";
  std::cout << "queue,statistic,analytic,empirical,z,no_samples\n";
  for (const auto& row : comparison)
    std::cout << row.queue << "," << row.statistic << "," << fmt(row.analytic) << ","
              << fmt(row.empirical) << "," << fmt(row.z) << "," << (row.no_samples ? 1 : 0)
              << "\n";

  Json machine;
  machine["command"] = "simulate";
  machine["events_processed"] = report.events_processed;
  machine["empirical_u"] = report.empirical_u;
  machine["empirical_u_half_width"] = report.empirical_u_half_width;
  machine["any_divergent"] = report.any_divergent;
  Json queues = Json::array();
  for (int j = 0; j < spec.num_queues(); ++j) {
    const QueueStats& q = report.queues[j];
    Json row;
    row["queue"] = j;
    row["mean_sojourn"] = q.mean_sojourn;
    row["sojourn_half_width"] = q.sojourn_half_width;
    row["tail_probability"] = q.tail_probability;
    row["tail_half_width"] = q.tail_half_width;
    row["tail_threshold"] = q.tail_threshold;
    row["mean_in_system"] = q.mean_in_system;
    row["little_z"] = q.little_z;
    row["arrival_rate_z"] = q.arrival_rate_z;
    row["completed_jobs"] = q.completed_jobs;
    row["divergent"] = q.divergent;
    row["no_samples"] = q.no_samples;
    queues.push_back(row);
  }
  machine["queues"] = queues;
  Json classes = Json::array();
  for (int i = 0; i < spec.num_classes(); ++i) {
    const ClassStats& c = report.classes[i];
    Json row;
    row["class"] = i;
    row["mean_sojourn"] = c.mean_sojourn;
    row["mean_cost"] = c.mean_cost;
    row["completed_jobs"] = c.completed_jobs;
    classes.push_back(row);
  }
  machine["classes"] = classes;
  Json cmp = Json::array();
  for (const auto& row : comparison) {
    Json r;
    r["queue"] = row.queue;
    r["statistic"] = row.statistic;
    r["analytic"] = row.analytic;
    r["empirical"] = row.empirical;
    r["z"] = row.z;
    r["no_samples"] = row.no_samples;
    cmp.push_back(r);
  }
  machine["comparison"] = cmp;

  std::vector<std::vector<std::string>> full;
  for (const auto& row : comparison)
    full.push_back({std::to_string(row.queue), row.statistic, fmt_full(row.analytic),
                    fmt_full(row.empirical), fmt_full(row.z), row.no_samples ? "1" : "0"});
  write_output(args, machine, {"queue", "statistic", "analytic", "empirical", "z", "no_samples"},
               full);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"socially optimal routing, admission pricing, and simulation for parallel queues"};
  app.require_subcommand(1);

  CommonArgs args;
  bool with_oracle = false;
  bool solve_first = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--out", args.out_path, "write machine-readable output here");
    cmd->add_option("--format", args.format, "output format for --out")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", args.seed, "override the scenario RNG seed");
    cmd->add_option("--tol", args.tol, "tolerance for certification / verification checks");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "solve for the social optimum");
  add_common(optimize);
  optimize->add_flag("--oracle", with_oracle, "cross-check against exhaustive grid search");

  CLI::App* equilibrium = app.add_subcommand("equilibrium", "solve the priced routing game");
  add_common(equilibrium);

  CLI::App* prices = app.add_subcommand("prices", "marginal-externality admission prices");
  add_common(prices);
  prices->add_flag("--solve", solve_first, "derive the routing by solving for the optimum first");

  CLI::App* verify = app.add_subcommand("verify", "check structure / equilibrium conditions");
  add_common(verify);

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "discrete-event simulation");
  add_common(simulate_cmd);
  simulate_cmd->add_flag("--solve", solve_first,
                         "derive the routing by solving for the optimum first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    const Scenario sc = load_scenario(args.scenario_path);
    if (optimize->parsed()) return cmd_optimize(sc, args, with_oracle);
    if (equilibrium->parsed()) return cmd_equilibrium(sc, args);
    if (prices->parsed()) return cmd_prices(sc, args, solve_first);
    if (verify->parsed()) return cmd_verify(sc, args);
    if (simulate_cmd->parsed()) return cmd_simulate(sc, args, solve_first);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  return kExitInvalid;
}
