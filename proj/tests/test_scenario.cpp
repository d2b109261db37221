#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <string>

#include "doctest.h"
#include "queuetoll/scenario.hpp"

using namespace queuetoll;

namespace {

const char* kDiscrete = R"({
  "version": 1,
  "system": {
    "classes": [
      {"rate": 1.0, "sensitivity": 5.0},
      {"rate": 1.0, "sensitivity": 4.0, "mean_job_size": 0.5}
    ],
    "queues": [
      {"family": "mm1_mean_delay", "mu": 2.0},
      {"family": "mm1_tail_probability", "mu": 3.0, "tail_threshold": 1.0},
      {"family": "ps_load"},
      {"family": "tabulated", "flows": [0.0, 1.0, 2.0], "costs": [0.5, 1.0, 4.0]}
    ]
  },
  "prices": [2.0, 1.5, 1.0, 0.0],
  "routing": [
    [0.5, 0.5, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.5]
  ],
  "sim": {
    "discipline": "ps",
    "horizon": 5000.0,
    "replications": 4,
    "seed": 9,
    "job_shapes": ["exponential", "deterministic"]
  },
  "solver": {
    "optimize": {"restarts": 8, "kkt_tol": 1e-9},
    "equilibrium": {"tol": 1e-7}
  }
})";

const char* kContinuum = R"({
  "version": 1,
  "continuum": {
    "total_rate": 1.0,
    "sensitivity_distribution": {"family": "uniform", "lower": 0.0, "upper": 10.0},
    "queues": [
      {"family": "mm1_mean_delay", "mu": 2.0},
      {"family": "mm1_mean_delay", "mu": 2.0}
    ]
  },
  "prices": [1.6666666666666667, 0.5555555555555556],
  "allocation": {"queue_order": [0, 1], "thresholds": [5.0, 0.0]}
})";

std::string swap(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("discrete scenario round-trips through parse and serialize") {
  const Scenario s = parse_scenario(kDiscrete);
  REQUIRE(s.system.has_value());
  CHECK_FALSE(s.continuum.has_value());
  CHECK(s.system->num_classes() == 2);
  CHECK(s.system->num_queues() == 4);
  CHECK(s.system->cls(1).mean_job_size == 0.5);
  CHECK(s.system->queue(1).tail_threshold() == 1.0);
  CHECK(s.system->queue(3).tabulated_flows().size() == 3);
  REQUIRE(s.prices.has_value());
  CHECK((*s.prices)[3] == 0.0);
  REQUIRE(s.routing.has_value());
  CHECK((*s.routing)(1, 2) == 0.5);
  REQUIRE(s.sim.has_value());
  CHECK(s.sim->discipline == Discipline::kPs);
  CHECK(s.sim->replications == 4);
  CHECK(s.sim->job_shapes.size() == 2);
  CHECK(s.sim->job_shapes[1] == JobSizeShape::kDeterministic);
  CHECK(s.optimize_options.restarts == 8);
  CHECK(s.optimize_options.kkt_tol == 1e-9);
  CHECK(s.equilibrium_options.tol == 1e-7);

  // canonical form: serialize o parse o serialize is the identity
  const std::string canon = serialize_scenario(s);
  CHECK(serialize_scenario(parse_scenario(canon)) == canon);
}

TEST_CASE("continuum scenario round-trips with an allocation") {
  const Scenario s = parse_scenario(kContinuum);
  REQUIRE(s.continuum.has_value());
  CHECK(s.continuum->total_rate() == 1.0);
  CHECK(s.continuum->distribution().support_hi() == 10.0);
  REQUIRE(s.allocation.has_value());
  CHECK(s.allocation->used_queues == std::vector<int>{0, 1});
  // flows are recomputed from the thresholds at parse time
  CHECK(s.allocation->flows[0] == doctest::Approx(0.5).epsilon(1e-12));

  const std::string canon = serialize_scenario(s);
  CHECK(serialize_scenario(parse_scenario(canon)) == canon);
}

TEST_CASE("parse rejects malformed documents with located errors") {
  auto where_of = [](const std::string& text) {
    try {
      (void)parse_scenario(text);
    } catch (const ScenarioError& e) {
      return e.where();
    }
    return std::string("(no error)");
  };

  CHECK(where_of("{ not json") == "$");
  CHECK(where_of(R"({"version": 2})") == "version");
  CHECK(where_of(R"({"version": 1})") == "$");  // neither system nor continuum

  // both system and continuum present
  std::string both = kDiscrete;
  both = swap(std::move(both), "\"system\":",
              "\"continuum\": {\"total_rate\": 1.0, \"sensitivity_distribution\": "
              "{\"family\": \"uniform\", \"lower\": 0.0, \"upper\": 1.0}, "
              "\"queues\": [{\"family\": \"mm1_mean_delay\", \"mu\": 2.0}]}, \"system\":");
  CHECK(where_of(both) == "$");

  // unknown cost family
  CHECK(where_of(swap(kDiscrete, "\"family\": \"ps_load\"", "\"family\": \"mg1\"")) ==
        "system.queues[2].family");

  // ragged routing row
  CHECK(where_of(swap(kDiscrete, "[0.0, 0.0, 0.5, 0.5]", "[0.0, 0.5, 0.5]")) == "routing[1]");

  // price count must match the queue count
  CHECK(where_of(swap(kDiscrete, "[2.0, 1.5, 1.0, 0.0]", "[2.0, 1.5, 1.0]")) == "prices");

  // discipline must be one of the known names
  CHECK(where_of(swap(kDiscrete, "\"ps\"", "\"edf\"")) == "sim.discipline");

  // thresholds must land on the support infimum
  CHECK(where_of(swap(kContinuum, "[5.0, 0.0]", "[5.0, 1.0]")) == "allocation");

  // negative rate
  CHECK(where_of(swap(kDiscrete, "{\"rate\": 1.0, \"sensitivity\": 5.0}",
                      "{\"rate\": -1.0, \"sensitivity\": 5.0}")) ==
        "system");
}

TEST_CASE("scenario files survive a disk round-trip") {
  const Scenario s = parse_scenario(kDiscrete);
  const std::string path = "scenario_roundtrip_test.json";
  save_scenario(s, path);
  const Scenario loaded = load_scenario(path);
  CHECK(serialize_scenario(loaded) == serialize_scenario(s));
  std::remove(path.c_str());
  CHECK_THROWS_AS((void)load_scenario("does_not_exist_12345.json"), ScenarioError);
}

TEST_CASE("defaults are omitted from the canonical form") {
  const Scenario s = parse_scenario(kDiscrete);
  const std::string canon = serialize_scenario(s);
  // class 0 has the default job size, class 1 does not: exactly one mention
  const auto first = canon.find("mean_job_size");
  REQUIRE(first != std::string::npos);
  CHECK(canon.find("mean_job_size", first + 1) == std::string::npos);
  // untouched solver blocks stay out; the customized ones are kept
  CHECK(canon.find("continuum_optimize") == std::string::npos);
  CHECK(canon.find("continuum_equilibrium") == std::string::npos);
  CHECK(canon.find("\"restarts\": 8") != std::string::npos);
  CHECK(canon.find("\"kkt_tol\"") != std::string::npos);

  // an untouched scenario serializes with no solver key at all
  Scenario bare = parse_scenario(kContinuum);
  CHECK(serialize_scenario(bare).find("\"solver\"") == std::string::npos);
}
