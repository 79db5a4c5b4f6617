#include "agesir/ovp_harness.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "agesir/finalsize.hpp"
#include "agesir/parallel.hpp"

namespace agesir {

TimeProfile mollifier(double epsilon) { return TimeProfile::bump(0.0, epsilon); }

VaccinationPlan mollified_plan(const AgeDensity& v, double epsilon) {
  return VaccinationPlan::separable(mollifier(epsilon), v);
}

OvpEvaluation evaluate_ovp(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config) {
  Trajectory traj = simulate(model, plan, config);
  if (!traj.converged) {
    std::ostringstream os;
    os << "objective_ovp: no stationary state by t=" << traj.t_end;
    throw NonConvergenceError(os.str(), std::move(traj));
  }
  const GridPtr& g = model.grid();
  AgeDensity s_inf(g, traj.final_state.s);
  AgeDensity nu_inf(g, traj.final_state.v_cum.cwiseMax(0.0).cwiseMin(model.s0().values()));
  const double n = integrate(s_inf) + integrate(nu_inf);
  return {n, std::move(s_inf), std::move(nu_inf), std::move(traj)};
}

double objective_ovp(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config) {
  return evaluate_ovp(model, plan, config).objective;
}

std::vector<double> default_epsilon_ladder() { return {0.5, 0.2, 0.1, 0.05, 0.02}; }

UpperBoundCheck audit_evaluation(const EpidemicModel& model, const std::string& id, const OvpEvaluation& eval) {
  const StaticAllocation pre(model, eval.nu_inf);
  const FinalSizeSolution star = solve_final_size(model, pre);
  UpperBoundCheck c;
  c.id = id;
  c.n = eval.objective;
  c.n_star = integrate(star.s_inf) + integrate(eval.nu_inf);
  c.slack = c.n_star - c.n;
  c.pointwise_excess = std::max(0.0, (eval.s_inf.values() - star.s_inf.values()).maxCoeff());
  c.passed = c.slack >= -1e-6 * integrate(model.s0()) && c.pointwise_excess <= 1e-6 * model.s0().max_abs();
  return c;
}

EquivalenceReport maximizing_sequence(const EpidemicModel& model, const StaticAllocation& v,
                                      const std::vector<double>& epsilons, const HarnessOptions& options) {
  const Eigen::VectorXd capped = v.values().cwiseMin(options.cap * model.s0().values());
  const StaticAllocation target(model, AgeDensity(model.grid(), capped));

  EquivalenceReport rep{target.v(), objective_ivp(model, target), epsilons, {}, {}, {}, {}, {}};
  const std::size_t k = epsilons.size();
  rep.n_values.assign(k, 0.0);
  rep.gaps.assign(k, 0.0);
  rep.rescaled_deviation.assign(k, 0.0);
  rep.admissible.assign(k, true);
  rep.upper_bound_checks.resize(k);

  const Eigen::VectorXd expected_at_eps = model.s0().values() - capped;
  // nu_eps == 0 for every eps: one unvaccinated run serves the whole ladder
  std::optional<OvpEvaluation> shared;
  if (capped.cwiseAbs().maxCoeff() == 0.0) {
    SimConfig cfg = options.sim;
    cfg.probe_times.insert(cfg.probe_times.end(), epsilons.begin(), epsilons.end());
    shared = evaluate_ovp(model, VaccinationPlan::none(model.grid()), cfg);
  }
  parallel_for(k, thread_count(options.threads), [&](std::size_t j) {
    const double eps = epsilons[j];
    SimConfig cfg = options.sim;
    const double active = eps / options.steps_per_epsilon;
    cfg.dt_active = cfg.dt_active > 0.0 ? std::min(cfg.dt_active, active) : std::min(cfg.dt, active);
    cfg.probe_times.push_back(eps);
    const OvpEvaluation eval = shared ? *shared : evaluate_ovp(model, mollified_plan(target.v(), eps), cfg);
    rep.n_values[j] = eval.objective;
    rep.gaps[j] = std::abs(rep.n_star - eval.objective);
    rep.admissible[j] = eval.trajectory.clips.empty();
    const State* at = eval.trajectory.find(eps, 1e-12);
    rep.rescaled_deviation[j] = at ? (at->s - expected_at_eps).cwiseAbs().maxCoeff() : std::nan("");
    std::ostringstream id;
    id << "mollified eps=" << eps;
    rep.upper_bound_checks[j] = audit_evaluation(model, id.str(), eval);
  });
  return rep;
}

std::vector<UpperBoundCheck> upper_bound_audit(const EpidemicModel& model,
                                               const std::vector<std::pair<std::string, VaccinationPlan>>& plans,
                                               const SimConfig& config, unsigned threads) {
  std::vector<UpperBoundCheck> out(plans.size());
  parallel_for(plans.size(), thread_count(threads), [&](std::size_t j) {
    out[j] = audit_evaluation(model, plans[j].first, evaluate_ovp(model, plans[j].second, config));
  });
  return out;
}

}  // namespace agesir
