#pragma once

#include <string>
#include <utility>
#include <vector>

#include "agesir/dynamics.hpp"
#include "agesir/errors.hpp"
#include "agesir/model.hpp"

namespace agesir {

/// Simulation did not reach the stationary state before t_max.
class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, Trajectory partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// phi(u) = 2 cos^2(pi (u - 1/2)) on [0, 1], rescaled to [0, epsilon] with
/// unit mass.
TimeProfile mollifier(double epsilon);

/// nu_eps(t, x) = (1/eps) phi(t/eps) v(x).
VaccinationPlan mollified_plan(const AgeDensity& v, double epsilon);

struct OvpEvaluation {
  /// int S_inf + int nu_inf, with nu_inf the doses actually delivered.
  double objective = 0.0;
  AgeDensity s_inf;
  AgeDensity nu_inf;
  Trajectory trajectory;
};

/// Simulates to convergence; throws NonConvergenceError otherwise.
OvpEvaluation evaluate_ovp(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config = {});

double objective_ovp(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config = {});

struct UpperBoundCheck {
  std::string id;
  double n = 0.0;
  double n_star = 0.0;
  /// n_star - n
  double slack = 0.0;
  /// max over ages of (S_inf - S*_inf)_+
  double pointwise_excess = 0.0;
  bool passed = true;
};

struct EquivalenceReport {
  AgeDensity v;
  double n_star = 0.0;
  std::vector<double> epsilons;
  std::vector<double> n_values;
  std::vector<double> gaps;
  /// sup |S(eps) - (S0 - v)|: the rescaled state at rescaled time 1.
  std::vector<double> rescaled_deviation;
  std::vector<bool> admissible;
  std::vector<UpperBoundCheck> upper_bound_checks;
};

struct HarnessOptions {
  SimConfig sim;
  /// While a plan of width eps is active the step is at most eps / steps_per_epsilon.
  int steps_per_epsilon = 50;
  /// Allocations are capped at cap * S0 (strictly below S0) before
  /// mollification; 1 disables the cap.
  double cap = 1.0 - 1e-6;
  unsigned threads = 0;
};

std::vector<double> default_epsilon_ladder();

/// Builds nu_eps for each eps, simulates it, and compares N(nu_eps) with the
/// static objective of the allocation.
EquivalenceReport maximizing_sequence(const EpidemicModel& model, const StaticAllocation& v,
                                      const std::vector<double>& epsilons, const HarnessOptions& options = {});

/// N(nu) <= N*(nu_inf) and S_inf <= S*_inf pointwise, for each plan.
/// Tolerances: 1e-6 * int S0 on the objective, 1e-6 * max S0 pointwise.
std::vector<UpperBoundCheck> upper_bound_audit(const EpidemicModel& model,
                                               const std::vector<std::pair<std::string, VaccinationPlan>>& plans,
                                               const SimConfig& config = {}, unsigned threads = 0);

UpperBoundCheck audit_evaluation(const EpidemicModel& model, const std::string& id, const OvpEvaluation& eval);

}  // namespace agesir
