#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "queuetoll/model.hpp"
#include "queuetoll/pricing.hpp"
#include "queuetoll/rng.hpp"
#include "queuetoll/wardrop.hpp"

using namespace queuetoll;

namespace {

SystemSpec five_queue_spec() {
  std::vector<ClassSpec> classes = {{1, 5, 1}, {1, 4, 1}, {1, 3, 1}, {1, 2, 1}, {1, 1, 1}};
  std::vector<CostModel> queues = {
      CostModel::mm1_mean_delay(2.0), CostModel::mm1_mean_delay(3.0),
      CostModel::mm1_mean_delay(2.5), CostModel::mm1_mean_delay(1.1),
      CostModel::mm1_mean_delay(1.5)};
  return {classes, queues};
}

// Two classes, two identical unit-rate queues, prices (0.3, 0).  Worked out
// by hand: class 1 (beta 2) splits so that 0.3 + 2 D(x * 0.4) = 2 D(gamma_2),
// class 2 (beta 1) strictly prefers queue 2.
SystemSpec two_queue_spec() {
  return {{{0.4, 2, 1}, {0.4, 1, 1}},
          {CostModel::mm1_mean_delay(1.5), CostModel::mm1_mean_delay(1.5)}};
}

}  // namespace

TEST_CASE("two-class equilibrium splits as computed by hand") {
  const SystemSpec spec = two_queue_spec();
  const PriceVector prices({0.3, 0.0});
  const EquilibriumResult res = solve_equilibrium(spec, prices);
  CHECK(res.converged);
  CHECK(res.residual <= 1e-6);
  CHECK(res.flows[0] == doctest::Approx(0.30986).epsilon(2e-4));
  CHECK(res.flows[1] == doctest::Approx(0.49014).epsilon(2e-4));
  CHECK(res.routing(0, 0) == doctest::Approx(0.77465).epsilon(5e-4));
  CHECK(res.routing(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
  // the cheap queue is strictly better for the low-sensitivity class
  const double d0 = 1.0 / (1.5 - res.flows[0]);
  const double d1 = 1.0 / (1.5 - res.flows[1]);
  CHECK(0.3 + d0 - d1 == doctest::Approx(0.15).epsilon(1e-3));
}

TEST_CASE("published equilibrium routing has a small residual") {
  const RoutingMatrix published({{0.4, 0.6, 0.0, 0.0, 0.0},
                                 {0.0, 1.0, 0.0, 0.0, 0.0},
                                 {0.0, 0.2, 0.8, 0.0, 0.0},
                                 {0.0, 0.0, 0.8, 0.2, 0.0},
                                 {0.0, 0.0, 0.0, 0.1, 0.9}});
  const std::vector<double> prices = {2.57, 1.53, 0.7, 0.42, 0.0};
  const double residual = wardrop_residual(five_queue_spec(), prices, published);
  CHECK(residual == doctest::Approx(0.003333).epsilon(1e-3));
  CHECK(residual <= 0.02);
}

TEST_CASE("residual is invariant under uniform price shifts") {
  const SystemSpec spec = two_queue_spec();
  const RoutingMatrix routing({{0.7, 0.3}, {0.1, 0.9}});
  const PriceVector prices({0.3, 0.0});
  const double base = wardrop_residual(spec, prices, routing);
  const double shifted = wardrop_residual(spec, price_shift(prices, 5.0), routing);
  CHECK(base == doctest::Approx(shifted).epsilon(1e-12));
  CHECK(base > 0.0);
}

TEST_CASE("residual ignores queues carrying negligible mass") {
  const SystemSpec spec = two_queue_spec();
  // queue 1 is expensive and would be very profitable to leave, but only a
  // sub-threshold sliver of class 2 sits there
  const RoutingMatrix routing({{0.0, 1.0}, {1e-9, 1.0 - 1e-9}});
  const std::vector<double> prices = {100.0, 0.0};
  CHECK(wardrop_residual(spec, prices, routing, 1e-7) == 0.0);
  CHECK(wardrop_residual(spec, prices, routing, 1e-10) > 99.0);
}

TEST_CASE("solver reaches the requested tolerance on random instances") {
  for (std::uint64_t seed = 300; seed < 306; ++seed) {
    RandomStream rng(seed, 1, 2, 3);
    std::vector<ClassSpec> classes(3);
    double beta = 2.0 + 3.0 * rng.uniform01();
    double work = 0.0;
    for (int i = 0; i < 3; ++i) {
      classes[i] = {0.2 + 0.5 * rng.uniform01(), beta, 1.0};
      beta *= 0.4 + 0.4 * rng.uniform01();
      work += classes[i].rate;
    }
    std::vector<CostModel> queues;
    for (int j = 0; j < 3; ++j)
      queues.push_back(CostModel::mm1_mean_delay(work * (0.6 + 0.5 * rng.uniform01())));
    const SystemSpec spec(classes, queues);
    // strictly decreasing prices with a zero anchor on the last queue
    double p0 = 1.0 + rng.uniform01();
    double p1 = p0 * (0.3 + 0.4 * rng.uniform01());
    const PriceVector prices({p0, p1, 0.0});

    const EquilibriumResult res = solve_equilibrium(spec, prices);
    CHECK(res.converged);
    CHECK(res.residual <= 1e-6);
    CHECK(wardrop_residual(spec, prices, res.routing) == doctest::Approx(res.residual));
    for (int i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 3; ++j) sum += res.routing(i, j);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("single queue equilibrium is exact") {
  const SystemSpec spec({{0.5, 2.0, 1.0}}, {CostModel::mm1_mean_delay(1.0)});
  const EquilibriumResult res = solve_equilibrium(spec, PriceVector({0.7}));
  CHECK(res.converged);
  CHECK(res.residual == 0.0);
  CHECK(res.routing(0, 0) == 1.0);
  CHECK(res.per_class_cost[0] == doctest::Approx(0.7 + 2.0 / (1.0 - 0.5)).epsilon(1e-12));
}

TEST_CASE("price vector validation") {
  CHECK_THROWS_AS(PriceVector({1.0, 1.0}), std::invalid_argument);   // tie
  CHECK_THROWS_AS(PriceVector({1.0, 2.0}), std::invalid_argument);   // increasing
  CHECK_THROWS_AS(PriceVector({1.0, -0.5}), std::invalid_argument);  // negative
  CHECK_THROWS_AS(PriceVector({}), std::invalid_argument);
  const PriceVector ok({2.0, 1.0, 0.0});
  CHECK(ok.size() == 3);
  CHECK(ok[2] == 0.0);
}
