#include "agesir/cli.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agesir/dynamics.hpp"
#include "agesir/errors.hpp"
#include "agesir/finalsize.hpp"
#include "agesir/io.hpp"
#include "agesir/ivp_optimizer.hpp"
#include "agesir/ovp_harness.hpp"
#include "agesir/sampling.hpp"
#include "agesir/scenario.hpp"
#include "agesir/spectral.hpp"

namespace agesir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  ScenarioConfig config;
  EpidemicModel model;
  fs::path out_dir;
  std::ostream& out;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RatioSource ratio_source(const EpidemicModel& m) {
  return m.separable() ? RatioSource::kSeparable : RatioSource::kColumnMean;
}

int cmd_simulate(Context& ctx) {
  const VaccinationPlan plan = build_plan(ctx.config, ctx.model);
  SimConfig sim = ctx.config.sim;
  if (!plan.is_zero() && ctx.config.plan.kind == PlanSpec::Kind::kBump && sim.dt_active <= 0.0)
    sim.dt_active = std::min(sim.dt, ctx.config.plan.width / 50.0);
  const Trajectory traj = simulate(ctx.model, plan, sim);

  std::ostringstream csv;
  write_trajectory_csv(csv, traj, *ctx.model.grid());
  write_atomic(ctx.out_dir / "trajectory.csv", csv.str());

  const State& fin = traj.final_state;
  write_atomic(ctx.out_dir / "final_state.csv",
               csv_columns({"age", "S0", "S_inf", "I", "Vcum", "Rcum"},
                           {to_std(ctx.model.grid()->nodes()), to_std(ctx.model.s0().values()), to_std(fin.s),
                            to_std(fin.i), to_std(fin.v_cum), to_std(fin.r_cum)}));
  const AgeDensity s_inf(ctx.model.grid(), fin.s);
  const double n_value = integrate(s_inf) + integrate(AgeDensity(ctx.model.grid(), fin.v_cum));
  const json summary = {{"N", n_value},
                        {"converged", traj.converged},
                        {"t_end", traj.t_end},
                        {"steps", traj.steps},
                        {"clipped_node_steps", traj.clips.size()},
                        {"max_conservation_error", traj.max_conservation_error},
                        {"S_inf", {{"integral", integrate(s_inf)}, {"min", fin.s.minCoeff()}, {"max", fin.s.maxCoeff()}}},
                        {"plan_mass", total_mass(plan)}};
  write_atomic(ctx.out_dir / "summary.json", dump(summary));
  ctx.out << dump(summary);
  return kExitOk;
}

int cmd_threshold(Context& ctx) {
  const ThresholdResult t = classify_threshold(ctx.model);
  json j = to_json(t.eigen);
  j["classification"] = to_string(t.classification);
  write_atomic(ctx.out_dir / "threshold.json", dump(j));
  ctx.out << dump(j);
  return kExitOk;
}

int cmd_final_size(Context& ctx) {
  const StaticAllocation v = build_allocation(ctx.config, ctx.model);
  const FinalSizeSolution sol = solve_final_size(ctx.model, v);
  json j = {{"objective", objective_ivp(ctx.model, v)},
            {"iterations", sol.iterations},
            {"residual", sol.residual},
            {"S_inf_integral", integrate(sol.s_inf)},
            {"post_epidemic_lambda", post_epidemic_eigenvalue(ctx.model, sol.s_inf).lambda1}};
  if (ctx.model.separable()) j["scalar"] = to_json(solve_final_size_separable(ctx.model, v).summary);
  write_atomic(ctx.out_dir / "final_size.csv",
               csv_columns({"age", "S0", "v", "S_inf"}, {to_std(ctx.model.grid()->nodes()),
                                                         to_std(ctx.model.s0().values()), to_std(v.values()),
                                                         to_std(sol.s_inf.values())}));
  write_atomic(ctx.out_dir / "final_size.json", dump(j));
  ctx.out << dump(j);
  return kExitOk;
}

int cmd_optimize(Context& ctx) {
  const Budget budget = resolve_budget(ctx.config, ctx.model);
  auto method = ctx.config.optimizer.method;
  if (method == OptimizerSpec::Method::kAuto)
    method = ctx.model.separable() ? OptimizerSpec::Method::kBathtub : OptimizerSpec::Method::kProjectedGradient;

  std::vector<std::string> header{"age", "S0", "ratio"};
  std::vector<std::vector<double>> cols{to_std(ctx.model.grid()->nodes()), to_std(ctx.model.s0().values()),
                                        to_std(ranking_ratio(ctx.model, ratio_source(ctx.model)))};
  json j = {{"budget", budget.k}, {"separable", ctx.model.separable()}};
  if (method == OptimizerSpec::Method::kBathtub || method == OptimizerSpec::Method::kBoth) {
    const BathtubAllocation b = bathtub_allocate(ctx.model, budget, ratio_source(ctx.model));
    j["bathtub"] = to_json(b);
    j["bathtub"]["objective"] = objective_ivp(ctx.model, b.allocation);
    header.push_back("v_bathtub");
    cols.push_back(to_std(b.allocation.values()));
  }
  if (method == OptimizerSpec::Method::kProjectedGradient || method == OptimizerSpec::Method::kBoth) {
    OptimizerOptions opts;
    opts.tol_kkt = ctx.config.optimizer.tol_kkt;
    opts.max_iter = ctx.config.optimizer.max_iter;
    opts.threads = ctx.config.threads;
    const OptimizerReport r =
        optimize_projected_gradient(ctx.model, budget, StaticAllocation::none(ctx.model), opts);
    j["projected_gradient"] = to_json(r);
    header.push_back("v_projected_gradient");
    cols.push_back(to_std(r.allocation.values()));
  }
  write_atomic(ctx.out_dir / "allocation.csv", csv_columns(header, cols));
  write_atomic(ctx.out_dir / "optimizer.json", dump(j));
  ctx.out << dump(j);
  return kExitOk;
}

int cmd_sweep(Context& ctx) {
  const double top = ctx.config.sweep.max_budget > 0.0 ? ctx.config.sweep.max_budget
                                                        : resolve_budget(ctx.config, ctx.model).k;
  std::vector<double> budgets;
  const int k = ctx.config.sweep.points;
  for (int i = 0; i < k; ++i) budgets.push_back(top * i / (k - 1));
  const auto sweep = sweep_budget(ctx.model, budgets, ratio_source(ctx.model));
  write_atomic(ctx.out_dir / "sweep.csv", sweep_csv(sweep));
  ctx.out << sweep_csv(sweep);
  return kExitOk;
}

int cmd_equivalence(Context& ctx) {
  const StaticAllocation v = build_allocation(ctx.config, ctx.model);
  HarnessOptions opts;
  opts.sim = ctx.config.sim;
  opts.threads = ctx.config.threads;
  EquivalenceReport rep = maximizing_sequence(ctx.model, v, ctx.config.equivalence.epsilons, opts);

  const Budget budget = resolve_budget(ctx.config, ctx.model);
  Rng rng(ctx.config.seed);
  std::vector<std::pair<std::string, VaccinationPlan>> plans;
  for (int i = 0; i < ctx.config.equivalence.audit_plans; ++i)
    plans.emplace_back("random #" + std::to_string(i), random_admissible_plan(ctx.model, budget, ctx.config.sim, rng));
  const auto audit = upper_bound_audit(ctx.model, plans, ctx.config.sim, ctx.config.threads);
  rep.upper_bound_checks.insert(rep.upper_bound_checks.end(), audit.begin(), audit.end());

  bool ok = true;
  for (const auto& c : rep.upper_bound_checks) ok = ok && c.passed;
  json j = to_json(rep);
  j["audit_passed"] = ok;
  write_atomic(ctx.out_dir / "equivalence.json", dump(j));
  write_atomic(ctx.out_dir / "gaps.csv", gap_csv(rep));
  ctx.out << gap_csv(rep);
  return ok ? kExitOk : kExitNumerical;
}

int cmd_paper_figure(Context& ctx) {
  const EpidemicModel& m = ctx.model;
  const Budget budget = resolve_budget(ctx.config, m);
  const BathtubAllocation bath = bathtub_allocate(m, budget, ratio_source(m));
  const double eps = ctx.config.plan.kind == PlanSpec::Kind::kBump ? ctx.config.plan.width : 0.02;
  const VaccinationPlan plan = mollified_plan(bath.allocation.v(), eps);

  SimConfig sim = ctx.config.sim;
  sim.dt_active = std::min(sim.dt_active > 0.0 ? sim.dt_active : sim.dt, eps / 50.0);
  const OvpEvaluation eval = evaluate_ovp(m, plan, sim);
  const double n_star = objective_ivp(m, bath.allocation);
  const ThresholdResult thr = classify_threshold(m);

  const Eigen::VectorXd& x = m.grid()->nodes();
  const Eigen::VectorXd& s0 = m.s0().values();
  const Eigen::VectorXd& v = bath.allocation.values();
  std::vector<double> band;
  double band_max = 0.0, off_min = INFINITY;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (v[i] == s0[i]) {
      band.push_back(x[i]);
      band_max = std::max(band_max, eval.s_inf.values()[i]);
    } else {
      off_min = std::min(off_min, eval.s_inf.values()[i]);
    }
  }

  // (a) plan heat data on [0, 2 eps]
  std::vector<double> pt, pa, pv;
  for (int k = 0; k <= 100; ++k) {
    const double t = 2.0 * eps * k / 100.0;
    const Eigen::VectorXd nu = plan.rate(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      pt.push_back(t);
      pa.push_back(x[i]);
      pv.push_back(nu[i]);
    }
  }
  write_atomic(ctx.out_dir / "figure_plan.csv", csv_columns({"t", "age", "nu"}, {pt, pa, pv}));
  // (b), (c) S(t, x) and I(t, x)
  std::vector<double> st, sa, ss, si;
  for (const State& snap : eval.trajectory.states)
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      st.push_back(snap.t);
      sa.push_back(x[i]);
      ss.push_back(snap.s[i]);
      si.push_back(snap.i[i]);
    }
  write_atomic(ctx.out_dir / "figure_susceptible.csv", csv_columns({"t", "age", "S"}, {st, sa, ss}));
  write_atomic(ctx.out_dir / "figure_infected.csv", csv_columns({"t", "age", "I"}, {st, sa, si}));
  write_atomic(ctx.out_dir / "figure_allocation.csv",
               csv_columns({"age", "S0", "ratio", "v", "S_inf"},
                           {to_std(x), to_std(s0), to_std(ranking_ratio(m, ratio_source(m))), to_std(v),
                            to_std(eval.s_inf.values())}));

  const json j = {{"budget", budget.k},
                  {"epsilon", eps},
                  {"bathtub", to_json(bath)},
                  {"band_ages", band},
                  {"S_inf_max_on_band", band_max},
                  {"S_inf_min_off_band", off_min},
                  {"N_eps", eval.objective},
                  {"N_star", n_star},
                  {"relative_gap", std::abs(n_star - eval.objective) / n_star},
                  {"clipped_node_steps", eval.trajectory.clips.size()},
                  {"threshold", {{"lambda1", thr.eigen.lambda1}, {"classification", to_string(thr.classification)}}}};
  write_atomic(ctx.out_dir / "figure.json", dump(j));
  ctx.out << dump(j);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-structured SIR epidemics with vaccination: simulation, final sizes, thresholds and optimal "
               "allocation",
               "agesir"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario file (YAML)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--threads", threads, "worker threads (overrides threads and AGESIR_THREADS)");
  };
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Sub subs[] = {
      {"simulate", "integrate the epidemic under the configured plan", cmd_simulate},
      {"threshold", "principal eigenvalue and spread classification", cmd_threshold},
      {"final-size", "final susceptible density for the configured allocation", cmd_final_size},
      {"optimize-ivp", "optimal pre-epidemic allocation", cmd_optimize},
      {"sweep-budget", "objective of the level-set allocation across budgets", cmd_sweep},
      {"equivalence", "maximizing sequence and upper-bound audit", cmd_equivalence},
      {"paper-figure", "reference scenario end to end, plot-ready CSVs", cmd_paper_figure},
  };
  std::vector<CLI::App*> handles;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    handles.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  fs::path target;
  try {
    ScenarioConfig config = load_scenario(config_path);
    if (app.get_subcommands().front()->count("--seed")) config.seed = seed;
    if (app.get_subcommands().front()->count("--threads")) config.threads = threads;
    if (!out_dir.empty()) config.output_dir = out_dir;
    target = config.output_dir;
    EpidemicModel model = build_model(config);
    Context ctx{std::move(config), std::move(model), target, out};
    for (std::size_t k = 0; k < handles.size(); ++k)
      if (handles[k]->parsed()) return subs[k].run(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    const json diag = {{"error", e.what()}, {"subcommand", app.get_subcommands().front()->get_name()}};
    try {
      if (!target.empty()) write_atomic(target / "error.json", dump(diag));
    } catch (...) {
    }
    err << dump(diag);
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace agesir
