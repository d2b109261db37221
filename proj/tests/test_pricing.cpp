#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "queuetoll/model.hpp"
#include "queuetoll/pricing.hpp"
#include "queuetoll/rng.hpp"
#include "queuetoll/social_opt.hpp"
#include "queuetoll/wardrop.hpp"

using namespace queuetoll;

namespace {

SystemSpec five_queue_mean_delay() {
  std::vector<ClassSpec> classes = {{1, 5, 1}, {1, 4, 1}, {1, 3, 1}, {1, 2, 1}, {1, 1, 1}};
  std::vector<CostModel> queues = {
      CostModel::mm1_mean_delay(2.0), CostModel::mm1_mean_delay(3.0),
      CostModel::mm1_mean_delay(2.5), CostModel::mm1_mean_delay(1.1),
      CostModel::mm1_mean_delay(1.5)};
  return {classes, queues};
}

SystemSpec five_queue_tail() {
  std::vector<ClassSpec> classes = {{1, 5, 1}, {1, 4, 1}, {1, 3, 1}, {1, 2, 1}, {1, 1, 1}};
  std::vector<CostModel> queues = {
      CostModel::mm1_tail_probability(2.0, 1.0), CostModel::mm1_tail_probability(3.0, 1.0),
      CostModel::mm1_tail_probability(2.5, 1.0), CostModel::mm1_tail_probability(1.1, 1.0),
      CostModel::mm1_tail_probability(1.5, 1.0)};
  return {classes, queues};
}

RoutingMatrix mean_delay_optimum() {
  return RoutingMatrix({{0.0, 1.0, 0.0, 0.0, 0.0},
                        {0.0, 0.528, 0.472, 0.0, 0.0},
                        {0.212, 0.0, 0.788, 0.0, 0.0},
                        {0.786, 0.0, 0.0, 0.0, 0.214},
                        {0.0, 0.0, 0.0, 0.483, 0.517}});
}

RoutingMatrix tail_optimum() {
  return RoutingMatrix({{0.0, 1.0, 0.0, 0.0, 0.0},
                        {0.0, 0.42, 0.58, 0.0, 0.0},
                        {0.39, 0.0, 0.61, 0.0, 0.0},
                        {0.59, 0.0, 0.0, 0.0, 0.41},
                        {0.0, 0.0, 0.0, 0.63, 0.37}});
}

}  // namespace

TEST_CASE("marginal-externality prices at the mean-delay optimum") {
  const QueuePrices prices = pigouvian_prices(five_queue_mean_delay(), mean_delay_optimum());
  const std::vector<double> expected_by_queue = {2.1991944, 3.2822838, 2.7653486, 1.2687522,
                                                 1.5980087};
  REQUIRE(prices.by_queue.size() == 5);
  for (int j = 0; j < 5; ++j)
    CHECK(prices.by_queue[j] == doctest::Approx(expected_by_queue[j]).epsilon(1e-6));

  CHECK(prices.delay_order == std::vector<int>{1, 2, 0, 4, 3});
  const std::vector<double> expected_sorted = {3.2822838, 2.7653486, 2.1991944, 1.5980087,
                                               1.2687522};
  for (int k = 0; k < 5; ++k)
    CHECK(prices.sorted[k] == doctest::Approx(expected_sorted[k]).epsilon(1e-6));
  CHECK(prices.strictly_decreasing);
  CHECK(prices.unused_queues.empty());
  CHECK(prices.sorted_prices().size() == 5);
}

TEST_CASE("published optimum is certified by its own prices") {
  const SystemSpec spec = five_queue_mean_delay();
  const RoutingMatrix routing = mean_delay_optimum();
  const QueuePrices prices = pigouvian_prices(spec, routing);
  const Certification cert = certify_prices(spec, routing, prices, 0.02);
  CHECK(cert.certified);
  CHECK(cert.residual <= 0.02);
  CHECK(cert.tol == 0.02);
  // the published table is rounded to 3 decimals, so the residual is small
  // but clearly nonzero
  CHECK(cert.residual > 1e-6);
}

TEST_CASE("tail-cost prices at the tail optimum") {
  const QueuePrices prices = pigouvian_prices(five_queue_tail(), tail_optimum());
  CHECK(prices.delay_order == std::vector<int>{1, 2, 0, 4, 3});
  const std::vector<double> expected_sorted = {1.109903, 0.980902, 0.838924, 0.687362, 0.583468};
  for (int k = 0; k < 5; ++k)
    CHECK(prices.sorted[k] == doctest::Approx(expected_sorted[k]).epsilon(1e-5));
  CHECK(prices.strictly_decreasing);

  const Certification cert = certify_prices(five_queue_tail(), tail_optimum(), prices, 0.02);
  CHECK(cert.certified);
  CHECK(cert.residual == doctest::Approx(0.00524).epsilon(0.05));
}

TEST_CASE("unused queues get price zero and sort last") {
  // two fast queues absorb everything; the slow third queue stays idle
  const SystemSpec spec({{0.5, 2.0, 1.0}, {0.5, 1.0, 1.0}},
                        {CostModel::mm1_mean_delay(3.0), CostModel::mm1_mean_delay(2.5),
                         CostModel::mm1_mean_delay(2.0)});
  const RoutingMatrix routing({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  const QueuePrices prices = pigouvian_prices(spec, routing);
  CHECK(prices.unused_queues == std::vector<int>{2});
  CHECK(prices.by_queue[2] == 0.0);
  CHECK(prices.delay_order.back() == 2);
  CHECK(prices.sorted.back() == 0.0);
  // by-hand: c_0 = 2*0.5*D'_0(0.5) = 1/6.25, c_1 = 1*0.5*D'_1(0.5) = 0.5/4
  CHECK(prices.by_queue[0] == doctest::Approx(1.0 / 6.25).epsilon(1e-12));
  CHECK(prices.by_queue[1] == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("job sizes enter prices through work-weighted sensitivity") {
  // single class, rate 1, sensitivity 2, mean size 0.5 on a mu=2 queue:
  // gamma = 0.5, weight = beta*S*rate = 1, price = 1 * D'(0.5) = 1/2.25
  const SystemSpec spec({{1.0, 2.0, 0.5}}, {CostModel::mm1_mean_delay(2.0)});
  const QueuePrices prices = pigouvian_prices(spec, RoutingMatrix::uniform(1, 1));
  CHECK(prices.by_queue[0] == doctest::Approx(1.0 / 2.25).epsilon(1e-12));
}

TEST_CASE("certification fails for distorted prices") {
  const SystemSpec spec = five_queue_mean_delay();
  const RoutingMatrix routing = mean_delay_optimum();
  QueuePrices prices = pigouvian_prices(spec, routing);
  prices.by_queue[1] += 0.5;  // overprice the most attractive queue
  const Certification cert = certify_prices(spec, routing, prices.by_queue, 0.02);
  CHECK_FALSE(cert.certified);
  CHECK(cert.residual > 0.4);
}

TEST_CASE("optimize then price then certify is exact on random instances") {
  for (std::uint64_t seed = 400; seed < 404; ++seed) {
    RandomStream rng(seed, 9, 9, 9);
    std::vector<ClassSpec> classes(3);
    double beta = 1.5 + 3.0 * rng.uniform01();
    double work = 0.0;
    for (int i = 0; i < 3; ++i) {
      classes[i] = {0.2 + 0.6 * rng.uniform01(), beta, 0.5 + rng.uniform01()};
      beta *= 0.4 + 0.4 * rng.uniform01();
      work += classes[i].rate * classes[i].mean_job_size;
    }
    std::vector<CostModel> queues;
    for (int j = 0; j < 3; ++j)
      queues.push_back(CostModel::mm1_mean_delay(work * (0.7 + 0.6 * rng.uniform01())));
    const SystemSpec spec(classes, queues);

    SocialOptOptions opt;
    opt.restarts = 12;
    opt.seed = seed;
    const OptimumResult res = solve_social_optimum(spec, opt);
    REQUIRE(res.converged);
    const QueuePrices prices = pigouvian_prices(spec, res.routing);
    const Certification cert = certify_prices(spec, res.routing, prices, 1e-6);
    CHECK(cert.certified);
    CHECK(cert.residual <= 1e-6);
  }
}

TEST_CASE("price shift") {
  const PriceVector base({2.0, 1.0, 0.5});
  const PriceVector up = price_shift(base, 1.5);
  CHECK(up[0] == doctest::Approx(3.5));
  CHECK(up[2] == doctest::Approx(2.0));
  const PriceVector down = price_shift(base, -0.5);
  CHECK(down[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)price_shift(base, -0.6), std::invalid_argument);
}

TEST_CASE("sorted_prices refuses non-monotone price patterns") {
  // a deliberately non-optimal routing where a low-delay queue prices lower
  const SystemSpec spec({{0.5, 2.0, 1.0}, {0.5, 1.0, 1.0}},
                        {CostModel::mm1_mean_delay(3.0), CostModel::mm1_mean_delay(2.5)});
  const RoutingMatrix routing({{0.0, 1.0}, {1.0, 0.0}});  // sensitive class on slower queue
  const QueuePrices prices = pigouvian_prices(spec, routing);
  // by hand: queue 0 prices 0.5 * D'(0.5) = 0.08, queue 1 prices 1 * D'(0.5) = 0.25,
  // so the faster queue is cheaper and the sorted sequence increases
  CHECK(prices.by_queue[0] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(prices.by_queue[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_FALSE(prices.strictly_decreasing);
  CHECK_THROWS_AS((void)prices.sorted_prices(), std::exception);
}
