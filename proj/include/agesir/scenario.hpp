#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agesir/dynamics.hpp"
#include "agesir/model.hpp"

namespace agesir {

struct KernelSpec {
  enum class Kind { kConstant, kGaussian, kSeparable, kMatrix };
  Kind kind = Kind::kConstant;
  double value = 0.0;       // constant
  double b = 0.0;           // gaussian: b exp(-(x - y)^2 / sigma_beta)
  double sigma_beta = 0.0;
  std::vector<double> values;  // separable: beta(y) per node
  std::string file;            // matrix: CSV, n rows of n values
  bool operator==(const KernelSpec&) const = default;
};

struct RateSpec {
  enum class Kind { kConstant, kAffine, kTabulated };
  Kind kind = Kind::kConstant;
  double value = 0.0;
  double m_mu = 0.0;  // affine: m_mu x + q_mu
  double q_mu = 0.0;
  std::vector<double> values;
  bool operator==(const RateSpec&) const = default;
};

struct DensitySpec {
  enum class Kind { kConstant, kGaussian, kTabulated };
  Kind kind = Kind::kConstant;
  double value = 0.0;
  double xbar = 0.0;  // gaussian: mass * N(xbar, sigma^2) density
  double sigma = 1.0;
  double mass = 1.0;
  std::vector<double> values;
  bool operator==(const DensitySpec&) const = default;
};

/// Static allocation used by final-size, simulate (as the plan's age
/// density) and equivalence.
struct AllocationSpec {
  enum class Kind { kNone, kFractionOfS0, kBathtub, kTabulated };
  Kind kind = Kind::kNone;
  double fraction = 0.0;
  std::vector<double> values;
  bool operator==(const AllocationSpec&) const = default;
};

struct PlanSpec {
  enum class Kind { kNone, kBump, kBox, kExponential };
  Kind kind = Kind::kNone;
  double start = 0.0;
  double width = 1.0;
  double rate = 1.0;
  double horizon = 1.0;
  bool operator==(const PlanSpec&) const = default;
};

struct OptimizerSpec {
  enum class Method { kAuto, kBathtub, kProjectedGradient, kBoth };
  Method method = Method::kAuto;
  double tol_kkt = 1e-6;
  int max_iter = 500;
  bool operator==(const OptimizerSpec&) const = default;
};

struct EquivalenceSpec {
  std::vector<double> epsilons{0.5, 0.2, 0.1, 0.05, 0.02};
  /// Random plans audited against the upper bound.
  int audit_plans = 10;
  bool operator==(const EquivalenceSpec&) const = default;
};

struct SweepSpec {
  int points = 20;
  /// Upper end of the sweep; <= 0 means the scenario budget.
  double max_budget = 0.0;
  bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double a_max = 1.0;
  std::size_t n = 201;
  bool relaxed_checks = false;
  KernelSpec beta;
  RateSpec mu;
  DensitySpec s0;
  DensitySpec i0;
  /// Absolute budget, used when budget_bound_fraction <= 0.
  double budget = 0.0;
  /// Budget as a fraction of min(mu/beta) int (beta/mu) S0.
  double budget_bound_fraction = 0.0;
  SimConfig sim;
  OptimizerSpec optimizer;
  AllocationSpec allocation;
  PlanSpec plan;
  EquivalenceSpec equivalence;
  SweepSpec sweep;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string output_dir = "out";
  /// Directory that relative file references resolve against.
  std::filesystem::path base_dir;

  bool operator==(const ScenarioConfig& o) const;
};

/// Parses YAML text. Errors carry the 1-based line of the offending node.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const ScenarioConfig& config);

EpidemicModel build_model(const ScenarioConfig& config);
/// Resolves budget_bound_fraction against the model.
Budget resolve_budget(const ScenarioConfig& config, const EpidemicModel& model);
StaticAllocation build_allocation(const ScenarioConfig& config, const EpidemicModel& model);
VaccinationPlan build_plan(const ScenarioConfig& config, const EpidemicModel& model);

/// X = [0, 1], beta = 2, mu = 1, S0 = 1, I0 = 1e-4 on n nodes.
ScenarioConfig homogeneous_scenario(double beta = 2.0, std::size_t n = 200);
/// Gaussian kernel b = 0.05, sigma_beta = 0.05; mu = 0.4 x + 0.1; Gaussian S0
/// (xbar 0.3, sigma 0.5); I0 = 1e-4.
ScenarioConfig reference_scenario(std::size_t n = 201);
/// Separable test problem with strictly monotone-free ratio beta/mu.
ScenarioConfig separable_scenario(std::size_t n = 16);

}  // namespace agesir
