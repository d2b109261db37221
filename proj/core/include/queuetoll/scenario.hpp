#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "queuetoll/continuum.hpp"
#include "queuetoll/simulator.hpp"
#include "queuetoll/social_opt.hpp"
#include "queuetoll/wardrop.hpp"

namespace queuetoll {

// A self-contained problem description loaded from JSON: exactly one of a
// discrete multiclass system or a continuum instance, plus optional prices,
// an optional routing (matrix or threshold form), simulation and solver
// settings.  Serialization is canonical: parse(serialize(s)) == serialize(s).
struct Scenario {
  std::optional<SystemSpec> system;
  std::optional<ContinuumSpec> continuum;
  std::optional<PriceVector> prices;
  std::optional<RoutingMatrix> routing;
  std::optional<ThresholdAllocation> allocation;
  std::optional<SimConfig> sim;
  SocialOptOptions optimize_options;
  EquilibriumOptions equilibrium_options;
  ContinuumOptOptions continuum_opt_options;
  ContinuumEqOptions continuum_eq_options;
};

// Parse failure with the JSON-pointer-ish location of the offending field.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

[[nodiscard]] Scenario parse_scenario(const std::string& json_text);
[[nodiscard]] Scenario load_scenario(const std::string& file_path);
[[nodiscard]] std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& file_path);

}  // namespace queuetoll
