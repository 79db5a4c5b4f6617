#include "agesir/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "agesir/errors.hpp"

namespace agesir {

namespace {

struct Derivative {
  Eigen::VectorXd ds, di, dv, dr;
};

// `cap` bounds the vaccination rate nodewise (+inf when unclipped).
Derivative rhs(const EpidemicModel& m, const VaccinationPlan& plan, double t, const Eigen::VectorXd& s,
               const Eigen::VectorXd& i, const Eigen::VectorXd* cap) {
  const Eigen::VectorXd force = m.beta_weighted() * i;
  const Eigen::VectorXd infection = s.cwiseProduct(force);
  Eigen::VectorXd nu = plan.rate(t);
  if (cap) nu = nu.cwiseMin(*cap);
  const Eigen::VectorXd removal = m.mu().values().cwiseProduct(i);
  return {-infection - nu, infection - removal, nu, removal};
}

State rk4(const EpidemicModel& m, const VaccinationPlan& plan, const State& y, double h,
          const Eigen::VectorXd* cap) {
  const double t = y.t;
  const Derivative k1 = rhs(m, plan, t, y.s, y.i, cap);
  const Derivative k2 = rhs(m, plan, t + 0.5 * h, y.s + 0.5 * h * k1.ds, y.i + 0.5 * h * k1.di, cap);
  const Derivative k3 = rhs(m, plan, t + 0.5 * h, y.s + 0.5 * h * k2.ds, y.i + 0.5 * h * k2.di, cap);
  const Derivative k4 = rhs(m, plan, t + h, y.s + h * k3.ds, y.i + h * k3.di, cap);
  const double c = h / 6.0;
  State out;
  out.t = t + h;
  out.s = y.s + c * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
  out.i = y.i + c * (k1.di + 2.0 * k2.di + 2.0 * k3.di + k4.di);
  out.v_cum = y.v_cum + c * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.r_cum = y.r_cum + c * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
  return out;
}

double trapezoid_weight(const std::vector<const State*>& snaps, std::size_t k) {
  const std::size_t last = snaps.size() - 1;
  double w = 0.0;
  if (k > 0) w += 0.5 * (snaps[k]->t - snaps[k - 1]->t);
  if (k < last) w += 0.5 * (snaps[k + 1]->t - snaps[k]->t);
  return w;
}

}  // namespace

State State::initial(const EpidemicModel& model) {
  State st;
  st.t = 0.0;
  st.s = model.s0().values();
  st.i = model.i0().values();
  st.v_cum = Eigen::VectorXd::Zero(st.s.size());
  st.r_cum = Eigen::VectorXd::Zero(st.s.size());
  return st;
}

const State* Trajectory::find(double t, double tol) const {
  for (const auto* bucket : {&probes, &states})
    for (const State& st : *bucket)
      if (std::abs(st.t - t) <= tol) return &st;
  if (std::abs(final_state.t - t) <= tol) return &final_state;
  return nullptr;
}

StepOutcome step(const EpidemicModel& model, const VaccinationPlan& plan, const State& state, double dt,
                 const SimConfig& config) {
  if (!(dt > 0.0)) throw IntegrationError("step: dt must be positive");
  const double tol_s = config.tol_s_rel * model.s0().max_abs();

  // A node already at S ~ 0 with nu > 0 cannot be rescued by smaller steps.
  bool hopeless = false;
  if (!plan.is_zero()) {
    const Eigen::VectorXd nu0 = plan.rate(state.t);
    for (Eigen::Index k = 0; k < nu0.size() && !hopeless; ++k)
      hopeless = state.s[k] <= tol_s && nu0[k] > 0.0;
  }

  StepOutcome out;
  if (!hopeless) {
    double h = dt;
    for (int k = 0; k <= config.max_halvings; ++k, h *= 0.5) {
      State cand = rk4(model, plan, state, h, nullptr);
      if (cand.s.minCoeff() >= -tol_s) {
        out.state = std::move(cand);
        out.dt_taken = h;
        out.halvings = k;
        return out;
      }
      if (plan.is_zero()) break;  // undershoot without vaccination: halving is the only remedy
    }
  }

  if (!config.allow_clipping || plan.is_zero()) {
    State probe = rk4(model, plan, state, dt, nullptr);
    Eigen::Index node = 0;
    probe.s.minCoeff(&node);
    std::ostringstream os;
    os << "S undershoots at node " << node << " near t=" << state.t << " after " << config.max_halvings
       << " step halvings";
    throw IntegrationError(os.str());
  }

  const Eigen::VectorXd cap = state.s.cwiseMax(0.0) / dt;
  State cand = rk4(model, plan, state, dt, &cap);
  for (Eigen::Index k = 0; k < cand.s.size(); ++k) {
    if (cand.s[k] < 0.0) {
      // Move the overshoot back out of V so S + I + V + R is untouched.
      cand.v_cum[k] += cand.s[k];
      cand.s[k] = 0.0;
    }
  }
  const Eigen::VectorXd planned = plan.cumulative(state.t + dt) - plan.cumulative(state.t);
  const Eigen::VectorXd delivered = cand.v_cum - state.v_cum;
  for (Eigen::Index k = 0; k < planned.size(); ++k) {
    const double withheld = planned[k] - delivered[k];
    if (withheld > tol_s * dt) out.clips.push_back({state.t, k, withheld});
  }
  out.state = std::move(cand);
  out.dt_taken = dt;
  out.halvings = hopeless ? 0 : config.max_halvings;
  return out;
}

SimConfig resolved(const SimConfig& config, const EpidemicModel& model) {
  SimConfig c = config;
  if (!(c.dt > 0.0)) throw IntegrationError("simulate: dt must be positive");
  if (c.dt_active <= 0.0) c.dt_active = c.dt;
  if (c.t_max <= 0.0) c.t_max = 40.0 / model.mu().min();
  if (c.eps_i <= 0.0) c.eps_i = 1e-10 * model.total_population();
  if (c.snapshot_stride == 0) c.snapshot_stride = 1;
  return c;
}

Trajectory simulate(const EpidemicModel& model, const VaccinationPlan& plan, const SimConfig& config) {
  require_same_grid(*model.grid(), *plan.grid(), "simulate");
  const SimConfig cfg = resolved(config, model);
  const double horizon = plan.horizon();
  const Eigen::VectorXd conserved = model.s0().values() + model.i0().values();
  const Eigen::VectorXd& w = model.grid()->weights();

  std::vector<double> landings = plan.breakpoints();
  landings.insert(landings.end(), cfg.probe_times.begin(), cfg.probe_times.end());
  std::sort(landings.begin(), landings.end());
  landings.erase(std::remove_if(landings.begin(), landings.end(), [](double t) { return !(t > 0.0); }),
                 landings.end());
  landings.erase(std::unique(landings.begin(), landings.end()), landings.end());
  auto next_landing = landings.begin();

  Trajectory traj;
  State st = State::initial(model);
  traj.states.push_back(st);
  traj.min_s = st.s.minCoeff();
  for (double p : cfg.probe_times)
    if (p == 0.0) traj.probes.push_back(st);

  auto stationary = [&](const State& y) {
    if (y.t < horizon) return false;
    if (w.dot(y.i) >= cfg.eps_i) return false;
    const Eigen::VectorXd ds = y.s.cwiseProduct(model.beta_weighted() * y.i) + plan.rate(y.t);
    return ds.cwiseAbs().maxCoeff() < cfg.eps_ds;
  };

  std::size_t since_snapshot = 0;
  traj.converged = stationary(st);
  while (!traj.converged && st.t < cfg.t_max) {
    while (next_landing != landings.end() && *next_landing <= st.t + 1e-12 * std::max(1.0, st.t)) ++next_landing;
    double h = st.t < horizon ? cfg.dt_active : cfg.dt;
    h = std::min(h, cfg.t_max - st.t);
    bool landing = false;
    if (next_landing != landings.end() && st.t + h >= *next_landing - 1e-12 * std::max(1.0, *next_landing)) {
      h = *next_landing - st.t;
      landing = true;
    }

    StepOutcome out = step(model, plan, st, h, cfg);
    const Eigen::VectorXd previous_s = std::move(st.s);
    st = std::move(out.state);
    if (landing && out.dt_taken == h) st.t = *next_landing;
    ++traj.steps;
    traj.halvings += static_cast<std::size_t>(out.halvings);
    traj.clips.insert(traj.clips.end(), out.clips.begin(), out.clips.end());

    traj.min_s = std::min(traj.min_s, st.s.minCoeff());
    traj.max_conservation_error =
        std::max(traj.max_conservation_error, (st.total() - conserved).cwiseAbs().maxCoeff());
    traj.max_monotonicity_violation =
        std::max(traj.max_monotonicity_violation, (st.s - previous_s).maxCoeff());
    traj.max_bound_violation = std::max(traj.max_bound_violation, (st.s + st.i - conserved).maxCoeff());

    if (landing && out.dt_taken == h &&
        std::find(cfg.probe_times.begin(), cfg.probe_times.end(), st.t) != cfg.probe_times.end())
      traj.probes.push_back(st);
    if (++since_snapshot >= cfg.snapshot_stride) {
      traj.states.push_back(st);
      since_snapshot = 0;
    }
    traj.converged = stationary(st);
  }
  if (traj.states.back().t != st.t) traj.states.push_back(st);
  traj.t_end = st.t;
  traj.final_state = std::move(st);
  return traj;
}

double ResidualReport::sup() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < residual.size(); ++k)
    if (evaluable[static_cast<std::size_t>(k)]) m = std::max(m, residual[k]);
  return m;
}

ResidualReport representation_residual(const EpidemicModel& model, const VaccinationPlan& plan,
                                       const Trajectory& trajectory, double t) {
  std::vector<const State*> snaps;
  for (const State& st : trajectory.states)
    if (st.t <= t + 1e-12 * std::max(1.0, t)) snaps.push_back(&st);
  if (snaps.empty()) throw StructuralError("representation_residual: no snapshot at or before t");
  const State& at = *snaps.back();
  const double tt = at.t;

  const Eigen::VectorXd& s0 = model.s0().values();
  const Eigen::VectorXd& mu = model.mu().values();
  const auto n = s0.size();

  Eigen::VectorXd depletion = Eigen::VectorXd::Zero(n);   // int_0^t (S(t-tau) - S0) e^{-mu tau}
  Eigen::VectorXd vaccinated = Eigen::VectorXd::Zero(n);  // int_0^t (int_0^{t-tau} nu) e^{-mu tau}
  Eigen::VectorXd self_term = Eigen::VectorXd::Zero(n);   // int_0^t nu / S
  std::vector<bool> evaluable(static_cast<std::size_t>(n), true);
  for (Eigen::Index x = 0; x < n; ++x) evaluable[static_cast<std::size_t>(x)] = at.s[x] > 0.0;

  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const State& sk = *snaps[k];
    const double wk = trapezoid_weight(snaps, k);
    if (wk == 0.0) continue;
    const Eigen::VectorXd decay = (-(tt - sk.t) * mu).array().exp().matrix();
    depletion += wk * (sk.s - s0).cwiseProduct(decay);
    if (!plan.is_zero()) {
      vaccinated += wk * plan.cumulative(sk.t).cwiseProduct(decay);
      const Eigen::VectorXd nu = plan.rate(sk.t);
      for (Eigen::Index x = 0; x < n; ++x) {
        if (nu[x] == 0.0) continue;
        if (sk.s[x] > 0.0)
          self_term[x] += wk * nu[x] / sk.s[x];
        else
          evaluable[static_cast<std::size_t>(x)] = false;
      }
    }
  }
  const Eigen::VectorXd initial_inf =
      model.i0().values().cwiseProduct((1.0 - (-tt * mu).array().exp()).matrix()).cwiseQuotient(mu);
  const Eigen::VectorXd exponent = model.beta_weighted() * (depletion + vaccinated) -
                                   model.beta_weighted() * initial_inf - self_term;
  const Eigen::VectorXd rhs_s = s0.cwiseProduct(exponent.array().exp().matrix());

  ResidualReport rep;
  rep.t = tt;
  rep.residual = (at.s - rhs_s).cwiseAbs();
  rep.evaluable = std::move(evaluable);
  for (Eigen::Index x = 0; x < n; ++x)
    if (!rep.evaluable[static_cast<std::size_t>(x)]) rep.residual[x] = 0.0;
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const AgeGrid& grid) {
  os << "t,age,S,I,Vcum,Rcum\n";
  const auto old_precision = os.precision(17);
  for (const State& st : trajectory.states)
    for (Eigen::Index k = 0; k < st.s.size(); ++k)
      os << st.t << ',' << grid.nodes()[k] << ',' << st.s[k] << ',' << st.i[k] << ',' << st.v_cum[k] << ','
         << st.r_cum[k] << '\n';
  os.precision(old_precision);
}

AdmissibilityReport check_plan_admissible(const EpidemicModel& model, const VaccinationPlan& plan,
                                          const Budget& budget, const SimConfig& config) {
  AdmissibilityReport rep;
  const double mass = total_mass(plan);
  if (mass > budget.k * (1.0 + 1e-9) + 1e-15) {
    std::ostringstream os;
    os << "total mass " << mass << " exceeds K = " << budget.k;
    return {false, Violation::kOverBudget, os.str(), mass - budget.k};
  }
  const Trajectory traj = simulate(model, plan, config);
  const double tol_s = config.tol_s_rel * model.s0().max_abs();
  if (!traj.clips.empty() || traj.min_s < -tol_s) {
    std::ostringstream os;
    double withheld = 0.0;
    for (const auto& c : traj.clips) withheld = std::max(withheld, c.withheld);
    if (!traj.clips.empty())
      os << "S driven to zero at node " << traj.clips.front().node << ", t=" << traj.clips.front().t << " ("
         << traj.clips.size() << " clipped node-steps)";
    else
      os << "min S = " << traj.min_s;
    return {false, Violation::kNegativeSusceptible, os.str(), std::max(withheld, -traj.min_s)};
  }
  return rep;
}

}  // namespace agesir
