#include "queuetoll/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace queuetoll {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kVersion = 1;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where, what);
}

const Json& require(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, "missing field '" + key + "'");
  return obj.at(key);
}

double number_at(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = require(obj, where, key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const Json& obj, const std::string& key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) fail(where, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CostModel parse_cost_model(const Json& j, const std::string& where) {
  const Json& fam = require(j, where, "family");
  if (!fam.is_string()) fail(where + ".family", "expected a string");
  const std::string family = fam.get<std::string>();
  try {
    if (family == "mm1_mean_delay") return CostModel::mm1_mean_delay(number_at(j, where, "mu"));
    if (family == "mm1_tail_probability")
      return CostModel::mm1_tail_probability(number_at(j, where, "mu"),
                                             number_at(j, where, "tail_threshold"));
    if (family == "ps_load") return CostModel::ps_load();
    if (family == "tabulated")
      return CostModel::tabulated(number_list(require(j, where, "flows"), where + ".flows"),
                                  number_list(require(j, where, "costs"), where + ".costs"));
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where + ".family", "unknown cost model family '" + family + "'");
}

Json dump_cost_model(const CostModel& q) {
  Json j;
  switch (q.family()) {
    case CostModel::Family::kMm1MeanDelay:
      j["family"] = "mm1_mean_delay";
      j["mu"] = *q.service_rate();
      break;
    case CostModel::Family::kMm1TailProbability:
      j["family"] = "mm1_tail_probability";
      j["mu"] = *q.service_rate();
      j["tail_threshold"] = *q.tail_threshold();
      break;
    case CostModel::Family::kPsLoad:
      j["family"] = "ps_load";
      break;
    case CostModel::Family::kTabulated:
      j["family"] = "tabulated";
      j["flows"] = q.tabulated_flows();
      j["costs"] = q.tabulated_costs();
      break;
  }
  return j;
}

std::vector<CostModel> parse_queues(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of cost models");
  std::vector<CostModel> queues;
  queues.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k)
    queues.push_back(parse_cost_model(j[k], where + "[" + std::to_string(k) + "]"));
  return queues;
}

SystemSpec parse_system(const Json& j) {
  const Json& classes_json = require(j, "system", "classes");
  if (!classes_json.is_array() || classes_json.empty())
    fail("system.classes", "expected a non-empty array");
  std::vector<ClassSpec> classes;
  classes.reserve(classes_json.size());
  for (std::size_t i = 0; i < classes_json.size(); ++i) {
    const std::string where = "system.classes[" + std::to_string(i) + "]";
    const Json& c = classes_json[i];
    ClassSpec spec;
    spec.rate = number_at(c, where, "rate");
    spec.sensitivity = number_at(c, where, "sensitivity");
    spec.mean_job_size = number_or(c, "mean_job_size", 1.0);
    classes.push_back(spec);
  }
  try {
    return {std::move(classes), parse_queues(require(j, "system", "queues"), "system.queues")};
  } catch (const std::invalid_argument& e) {
    fail("system", e.what());
  }
}

ContinuumSpec parse_continuum(const Json& j) {
  const Json& d = require(j, "continuum", "sensitivity_distribution");
  const Json& fam = require(d, "continuum.sensitivity_distribution", "family");
  if (!fam.is_string()) fail("continuum.sensitivity_distribution.family", "expected a string");
  const std::string family = fam.get<std::string>();
  std::optional<SensitivityDistribution> dist;
  try {
    if (family == "uniform")
      dist = SensitivityDistribution::uniform(
          number_at(d, "continuum.sensitivity_distribution", "lower"),
          number_at(d, "continuum.sensitivity_distribution", "upper"));
    else if (family == "truncated_exponential")
      dist = SensitivityDistribution::truncated_exponential(
          number_at(d, "continuum.sensitivity_distribution", "rate"),
          number_at(d, "continuum.sensitivity_distribution", "upper"));
    else
      fail("continuum.sensitivity_distribution.family",
           "unknown distribution family '" + family + "'");
    return {number_at(j, "continuum", "total_rate"), *dist,
            parse_queues(require(j, "continuum", "queues"), "continuum.queues")};
  } catch (const std::invalid_argument& e) {
    fail("continuum", e.what());
  }
}

Json dump_continuum(const ContinuumSpec& spec) {
  Json j;
  j["total_rate"] = spec.total_rate();
  Json d;
  if (spec.distribution().family() == SensitivityDistribution::Family::kUniform) {
    d["family"] = "uniform";
    d["lower"] = spec.distribution().support_lo();
    d["upper"] = spec.distribution().support_hi();
  } else {
    d["family"] = "truncated_exponential";
    d["rate"] = spec.distribution().rate();
    d["upper"] = spec.distribution().support_hi();
  }
  j["sensitivity_distribution"] = d;
  Json queues = Json::array();
  for (const auto& q : spec.queues()) queues.push_back(dump_cost_model(q));
  j["queues"] = queues;
  return j;
}

SimConfig parse_sim(const Json& j, int num_classes) {
  SimConfig cfg;
  if (j.contains("discipline")) {
    const Json& d = j.at("discipline");
    if (!d.is_string()) fail("sim.discipline", "expected a string");
    const std::string name = d.get<std::string>();
    if (name == "fcfs")
      cfg.discipline = Discipline::kFcfs;
    else if (name == "ps")
      cfg.discipline = Discipline::kPs;
    else if (name == "lcfs_pr")
      cfg.discipline = Discipline::kLcfsPr;
    else
      fail("sim.discipline", "unknown discipline '" + name + "'");
  }
  cfg.horizon = number_or(j, "horizon", cfg.horizon);
  cfg.warmup = number_or(j, "warmup", -1.0);
  cfg.replications = static_cast<int>(number_or(j, "replications", cfg.replications));
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned())
      fail("sim.seed", "expected an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("job_shapes")) {
    const Json& shapes = j.at("job_shapes");
    if (!shapes.is_array()) fail("sim.job_shapes", "expected an array");
    for (const auto& s : shapes) {
      if (!s.is_string()) fail("sim.job_shapes", "expected strings");
      const std::string name = s.get<std::string>();
      if (name == "exponential")
        cfg.job_shapes.push_back(JobSizeShape::kExponential);
      else if (name == "deterministic")
        cfg.job_shapes.push_back(JobSizeShape::kDeterministic);
      else
        fail("sim.job_shapes", "unknown job size shape '" + name + "'");
    }
    if (static_cast<int>(cfg.job_shapes.size()) != num_classes)
      fail("sim.job_shapes", "must list one shape per class");
  }
  if (!(cfg.horizon > 0.0) || !(cfg.horizon > cfg.effective_warmup()))
    fail("sim", "warmup leaves zero effective horizon");
  if (cfg.replications < 1) fail("sim.replications", "must be >= 1");
  return cfg;
}

Json dump_sim(const SimConfig& cfg) {
  Json j;
  switch (cfg.discipline) {
    case Discipline::kFcfs: j["discipline"] = "fcfs"; break;
    case Discipline::kPs: j["discipline"] = "ps"; break;
    case Discipline::kLcfsPr: j["discipline"] = "lcfs_pr"; break;
  }
  j["horizon"] = cfg.horizon;
  if (cfg.warmup >= 0.0) j["warmup"] = cfg.warmup;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  if (!cfg.job_shapes.empty()) {
    Json shapes = Json::array();
    for (const auto s : cfg.job_shapes)
      shapes.push_back(s == JobSizeShape::kExponential ? "exponential" : "deterministic");
    j["job_shapes"] = shapes;
  }
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    fail("$", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("$", "top level must be an object");

  const Json& version = require(doc, "$", "version");
  if (!version.is_number_integer() || version.get<int>() != kVersion)
    fail("version", "unsupported scenario version (expected " + std::to_string(kVersion) + ")");

  Scenario sc;
  const bool has_system = doc.contains("system");
  const bool has_continuum = doc.contains("continuum");
  if (has_system == has_continuum)
    fail("$", "exactly one of 'system' or 'continuum' must be present");
  if (has_system) sc.system = parse_system(doc.at("system"));
  if (has_continuum) sc.continuum = parse_continuum(doc.at("continuum"));

  const int num_queues = has_system ? sc.system->num_queues() : sc.continuum->num_queues();

  if (doc.contains("prices")) {
    const auto values = number_list(doc.at("prices"), "prices");
    if (static_cast<int>(values.size()) != num_queues)
      fail("prices", "must list one price per queue");
    try {
      sc.prices = PriceVector(values);
    } catch (const std::invalid_argument& e) {
      fail("prices", e.what());
    }
  }

  if (doc.contains("routing")) {
    if (!has_system) fail("routing", "a routing matrix needs a discrete system");
    const Json& r = doc.at("routing");
    if (!r.is_array() || static_cast<int>(r.size()) != sc.system->num_classes())
      fail("routing", "must list one row per class");
    std::vector<std::vector<double>> rows;
    rows.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      rows.push_back(number_list(r[i], "routing[" + std::to_string(i) + "]"));
      if (static_cast<int>(rows.back().size()) != num_queues)
        fail("routing[" + std::to_string(i) + "]", "must list one entry per queue");
    }
    try {
      sc.routing = RoutingMatrix(rows);
    } catch (const std::invalid_argument& e) {
      fail("routing", e.what());
    }
  }

  if (doc.contains("allocation")) {
    if (!has_continuum) fail("allocation", "a threshold allocation needs a continuum instance");
    const Json& a = doc.at("allocation");
    ThresholdAllocation alloc;
    const Json& order = require(a, "allocation", "queue_order");
    if (!order.is_array()) fail("allocation.queue_order", "expected an array of queue indices");
    for (const auto& q : order) {
      if (!q.is_number_integer()) fail("allocation.queue_order", "expected integer indices");
      alloc.used_queues.push_back(q.get<int>());
    }
    alloc.thresholds = number_list(require(a, "allocation", "thresholds"), "allocation.thresholds");
    try {
      alloc.flows = threshold_flows(*sc.continuum, alloc);
    } catch (const std::invalid_argument& e) {
      fail("allocation", e.what());
    }
    sc.allocation = std::move(alloc);
  }

  if (doc.contains("sim")) {
    if (!has_system) fail("sim", "simulation needs a discrete system");
    sc.sim = parse_sim(doc.at("sim"), sc.system->num_classes());
  }

  if (doc.contains("solver")) {
    const Json& s = doc.at("solver");
    if (!s.is_object()) fail("solver", "expected an object");
    if (s.contains("optimize")) {
      const Json& o = s.at("optimize");
      sc.optimize_options.restarts = static_cast<int>(number_or(o, "restarts", 32));
      sc.optimize_options.max_iters = static_cast<int>(number_or(o, "max_iters", 4000));
      sc.optimize_options.kkt_tol = number_or(o, "kkt_tol", 1e-8);
      sc.optimize_options.seed = static_cast<std::uint64_t>(number_or(o, "seed", 0));
    }
    if (s.contains("equilibrium")) {
      const Json& o = s.at("equilibrium");
      sc.equilibrium_options.max_iters = static_cast<int>(number_or(o, "max_iters", 10000));
      sc.equilibrium_options.tol = number_or(o, "tol", 1e-6);
    }
    if (s.contains("continuum_optimize"))
      sc.continuum_opt_options.tol = number_or(s.at("continuum_optimize"), "tol", 1e-11);
    if (s.contains("continuum_equilibrium"))
      sc.continuum_eq_options.tol = number_or(s.at("continuum_equilibrium"), "tol", 1e-8);
  }

  return sc;
}

Scenario load_scenario(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ScenarioError(file_path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
  if (sc.system.has_value() == sc.continuum.has_value())
    throw ScenarioError("$", "exactly one of 'system' or 'continuum' must be present");

  Json doc;
  doc["version"] = kVersion;
  if (sc.system) {
    Json sys;
    Json classes = Json::array();
    for (const auto& c : sc.system->classes()) {
      Json cls;
      cls["rate"] = c.rate;
      cls["sensitivity"] = c.sensitivity;
      if (c.mean_job_size != 1.0) cls["mean_job_size"] = c.mean_job_size;
      classes.push_back(cls);
    }
    sys["classes"] = classes;
    Json queues = Json::array();
    for (const auto& q : sc.system->queues()) queues.push_back(dump_cost_model(q));
    sys["queues"] = queues;
    doc["system"] = sys;
  }
  if (sc.continuum) doc["continuum"] = dump_continuum(*sc.continuum);
  if (sc.prices) doc["prices"] = sc.prices->values();
  if (sc.routing) {
    Json rows = Json::array();
    for (int i = 0; i < sc.routing->num_classes(); ++i) {
      const auto row = sc.routing->row(i);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["routing"] = rows;
  }
  if (sc.allocation) {
    Json a;
    a["queue_order"] = sc.allocation->used_queues;
    a["thresholds"] = sc.allocation->thresholds;
    doc["allocation"] = a;
  }
  if (sc.sim) doc["sim"] = dump_sim(*sc.sim);

  Json solver;
  const SocialOptOptions opt_defaults;
  if (sc.optimize_options.restarts != opt_defaults.restarts ||
      sc.optimize_options.max_iters != opt_defaults.max_iters ||
      sc.optimize_options.kkt_tol != opt_defaults.kkt_tol ||
      sc.optimize_options.seed != opt_defaults.seed) {
    Json o;
    o["restarts"] = sc.optimize_options.restarts;
    o["max_iters"] = sc.optimize_options.max_iters;
    o["kkt_tol"] = sc.optimize_options.kkt_tol;
    o["seed"] = sc.optimize_options.seed;
    solver["optimize"] = o;
  }
  const EquilibriumOptions eq_defaults;
  if (sc.equilibrium_options.max_iters != eq_defaults.max_iters ||
      sc.equilibrium_options.tol != eq_defaults.tol) {
    Json o;
    o["max_iters"] = sc.equilibrium_options.max_iters;
    o["tol"] = sc.equilibrium_options.tol;
    solver["equilibrium"] = o;
  }
  const ContinuumOptOptions copt_defaults;
  if (sc.continuum_opt_options.tol != copt_defaults.tol) {
    Json o;
    o["tol"] = sc.continuum_opt_options.tol;
    solver["continuum_optimize"] = o;
  }
  const ContinuumEqOptions ceq_defaults;
  if (sc.continuum_eq_options.tol != ceq_defaults.tol) {
    Json o;
    o["tol"] = sc.continuum_eq_options.tol;
    solver["continuum_equilibrium"] = o;
  }
  if (!solver.empty()) doc["solver"] = solver;

  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::string& file_path) {
  std::ofstream out(file_path);
  if (!out) throw ScenarioError(file_path, "cannot open file for writing");
  out << serialize_scenario(sc);
}

}  // namespace queuetoll
