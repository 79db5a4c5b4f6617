#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "agesir/model.hpp"

namespace agesir {

/// Snapshot of the four compartments. v_cum and r_cum are the cumulative
/// vaccinated and removed densities, so s + i + v_cum + r_cum == S0 + I0.
struct State {
  double t = 0.0;
  Eigen::VectorXd s, i, v_cum, r_cum;

  static State initial(const EpidemicModel& model);
  Eigen::VectorXd total() const { return s + i + v_cum + r_cum; }
};

struct SimConfig {
  double dt = 1e-2;
  /// Step used while the plan is still active (t < horizon); 0 means `dt`.
  double dt_active = 0.0;
  /// 0 selects 40 / min(mu).
  double t_max = 0.0;
  /// 0 selects 1e-10 * integral of (S0 + I0).
  double eps_i = 0.0;
  double eps_ds = 1e-12;
  std::size_t snapshot_stride = 10;
  int max_halvings = 20;
  /// Undershoot tolerance on S, relative to max S0.
  double tol_s_rel = 1e-9;
  /// Without clipping an unrecoverable undershoot raises IntegrationError.
  bool allow_clipping = true;
  /// Times the integrator lands on exactly; the states there are kept in
  /// Trajectory::probes.
  std::vector<double> probe_times;
};

/// Vaccination withheld at a node because S would otherwise turn negative.
struct ClipEvent {
  double t;
  Eigen::Index node;
  double withheld;
};

struct StepOutcome {
  State state;
  double dt_taken = 0.0;
  int halvings = 0;
  std::vector<ClipEvent> clips;
};

struct Trajectory {
  std::vector<State> states;
  std::vector<State> probes;
  State final_state;
  bool converged = false;
  double t_end = 0.0;
  std::size_t steps = 0;
  std::size_t halvings = 0;
  std::vector<ClipEvent> clips;

  double min_s = 0.0;
  /// max over t of |(S+I+V+R) - (S0+I0)|_inf.
  double max_conservation_error = 0.0;
  /// max over steps of (S(t+dt) - S(t))_+.
  double max_monotonicity_violation = 0.0;
  /// max over t of (S + I - (S0 + I0))_+.
  double max_bound_violation = 0.0;

  /// First stored state (snapshot or probe) within `tol` of t.
  const State* find(double t, double tol) const;
};

/// One classical RK4 step of the S/I/V/R system with the positivity guard:
/// halve on undershoot, then clip the vaccination rate at S/dt.
StepOutcome step(const EpidemicModel& model, const VaccinationPlan& plan, const State& state, double dt,
                 const SimConfig& config = {});

/// Integrate until I has died out, the plan is exhausted and S is stationary,
/// or until t_max (then `converged` is false).
Trajectory simulate(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config = {});

SimConfig resolved(const SimConfig& config, const EpidemicModel& model);

struct ResidualReport {
  double t = 0.0;
  Eigen::VectorXd residual;
  std::vector<bool> evaluable;
  double sup() const;
};

/// Pointwise |S(t) - S0 exp(...)| for the integral representation of S along
/// the trajectory, nested time integrals by trapezoid over stored snapshots
/// (requires snapshot_stride == 1 for meaningful accuracy).
ResidualReport representation_residual(const EpidemicModel& model, const VaccinationPlan& plan,
                                       const Trajectory& trajectory, double t);

/// Columns t, age, S, I, Vcum, Rcum.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const AgeGrid& grid);

/// Certifies a plan by simulation: S never undershoots -tol_S (no clipping
/// needed) and the total mass is within the budget.
AdmissibilityReport check_plan_admissible(const EpidemicModel& model, const VaccinationPlan& plan,
                                          const Budget& budget, const SimConfig& config = {});

}  // namespace agesir
