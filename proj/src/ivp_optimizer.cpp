#include "agesir/ivp_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "agesir/errors.hpp"
#include "agesir/finalsize.hpp"
#include "agesir/parallel.hpp"

namespace agesir {

namespace {

double survivors(const EpidemicModel& model, const Eigen::VectorXd& v) {
  const StaticAllocation alloc(model, AgeDensity(model.grid(), v));
  const FinalSizeSolution sol = solve_final_size(model, alloc);
  return integrate(sol.s_inf) + integrate(alloc.v());
}

// Solves g(tau) = int clip(z - tau, 0, upper) = mass for tau in [lo, hi],
// g non-increasing.
Eigen::VectorXd shift_clip(const Eigen::VectorXd& z, const Eigen::VectorXd& upper, const Eigen::VectorXd& w,
                           double mass, double lo, double hi) {
  auto clipped = [&](double tau) { return (z.array() - tau).max(0.0).min(upper.array()).matrix().eval(); };
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (w.dot(clipped(mid)) > mass ? lo : hi) = mid;
  }
  return clipped(hi);
}

}  // namespace

Eigen::VectorXd ranking_ratio(const EpidemicModel& model, RatioSource source) {
  return source == RatioSource::kSeparable ? model.separable_ratio() : model.mean_ratio();
}

double bathtub_budget_bound(const EpidemicModel& model, RatioSource source) {
  const Eigen::VectorXd r = ranking_ratio(model, source);
  const double weighted = model.grid()->weights().dot(r.cwiseProduct(model.s0().values()));
  return weighted / r.maxCoeff();
}

BathtubAllocation bathtub_allocate(const EpidemicModel& model, const Budget& budget, RatioSource source) {
  const Eigen::VectorXd r = ranking_ratio(model, source);
  const Eigen::VectorXd& s0 = model.s0().values();
  const Eigen::VectorXd& w = model.grid()->weights();
  const auto n = r.size();

  BathtubAllocation out{0.0, StaticAllocation::none(model), 0.0, 0.0, -1, {}, {}};
  out.order.resize(static_cast<std::size_t>(n));
  std::iota(out.order.begin(), out.order.end(), Eigen::Index{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](Eigen::Index a, Eigen::Index b) { return r[a] > r[b]; });

  const double bound = bathtub_budget_bound(model, source);
  if (budget.k >= bound) {
    std::ostringstream os;
    os << "budget " << budget.k << " is not below min(mu/beta) * int (beta/mu) S0 = " << bound
       << "; optimality of the level-set allocation is not guaranteed";
    out.warnings.push_back(os.str());
  }
  const double population = w.dot(s0);
  if (budget.k > population) {
    std::ostringstream os;
    os << "budget " << budget.k << " exceeds the susceptible population " << population;
    out.warnings.push_back(os.str());
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  double remaining = budget.k;
  const double slack = 1e-13 * budget.k;  // summation order differs from integrate()
  for (const Eigen::Index i : out.order) {
    const double mass = w[i] * s0[i];
    if (mass <= remaining + slack) {
      v[i] = s0[i];
      remaining -= mass;
      continue;
    }
    out.cut_node = i;
    out.boundary_fraction = std::max(0.0, remaining / mass);
    v[i] = out.boundary_fraction * s0[i];
    out.s_threshold = r[i];
    break;
  }
  out.allocation = StaticAllocation(model, AgeDensity(model.grid(), v));
  out.budget_used = integrate(out.allocation.v());
  return out;
}

Eigen::VectorXd project_feasible(const Eigen::VectorXd& z, const Eigen::VectorXd& upper, const Eigen::VectorXd& w,
                                 double budget) {
  Eigen::VectorXd box = z.cwiseMax(0.0).cwiseMin(upper);
  if (w.dot(box) <= budget) return box;
  return shift_clip(z, upper, w, budget, 0.0, z.maxCoeff());
}

Eigen::VectorXd project_fixed_mass(const Eigen::VectorXd& z, const Eigen::VectorXd& upper, const Eigen::VectorXd& w,
                                   double mass) {
  if (mass < 0.0 || mass > w.dot(upper) * (1.0 + 1e-15))
    throw PreconditionError("project_fixed_mass: mass outside [0, int upper]");
  return shift_clip(z, upper, w, mass, z.minCoeff() - upper.maxCoeff(), z.maxCoeff());
}

Eigen::VectorXd objective_gradient(const EpidemicModel& model, const StaticAllocation& v, double step,
                                   unsigned threads) {
  const Eigen::VectorXd& x = v.values();
  const Eigen::VectorXd& s0 = model.s0().values();
  const auto n = x.size();
  Eigen::VectorXd grad(n);
  parallel_for(static_cast<std::size_t>(n), thread_count(threads), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double up = std::min(step, s0[i] - x[i]);
    const double down = std::min(step, x[i]);
    Eigen::VectorXd plus = x, minus = x;
    plus[i] += up;
    minus[i] -= down;
    grad[i] = (survivors(model, plus) - survivors(model, minus)) / (up + down);
  });
  return grad;
}

OptimizerReport optimize_projected_gradient(const EpidemicModel& model, const Budget& budget,
                                            const StaticAllocation& init, const OptimizerOptions& options) {
  const AdmissibilityReport adm = check_static_admissible(model, init.v(), budget);
  if (!adm.admissible) throw PreconditionError("optimize_projected_gradient: initial allocation: " + adm.message);

  const Eigen::VectorXd& s0 = model.s0().values();
  const Eigen::VectorXd& w = model.grid()->weights();
  const double h = options.fd_rel_step * model.s0().max_abs();

  Eigen::VectorXd v = init.values();
  double f = survivors(model, v);
  OptimizerReport rep{init, f, 0, 0.0, {{0, f}}, false, false, "max_iter"};
  double alpha = 0.0;

  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::VectorXd grad =
        objective_gradient(model, StaticAllocation(model, AgeDensity(model.grid(), v)), h, options.threads)
            .cwiseQuotient(w);
    rep.kkt_residual = (v - project_feasible(v + grad, s0, w, budget.k)).cwiseAbs().maxCoeff();
    if (rep.kkt_residual <= options.tol_kkt) {
      rep.converged = true;
      rep.stop_reason = "kkt";
      break;
    }
    if (alpha == 0.0) alpha = model.s0().max_abs() / std::max(grad.cwiseAbs().maxCoeff(), 1e-300);

    bool accepted = false;
    for (int b = 0; b <= options.max_backtracks; ++b, alpha *= 0.5) {
      Eigen::VectorXd trial = project_feasible(v + alpha * grad, s0, w, budget.k);
      const double ft = survivors(model, trial);
      if (ft > f) {
        v = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
    }
    rep.iterations = it;
    if (!accepted) {
      rep.stalled = true;
      rep.stop_reason = "stall";
      break;
    }
    rep.history.emplace_back(it, f);
    alpha *= 2.0;
  }
  rep.allocation = StaticAllocation(model, AgeDensity(model.grid(), v));
  rep.objective = f;
  return rep;
}

std::vector<BudgetPoint> sweep_budget(const EpidemicModel& model, const std::vector<double>& budgets,
                                      RatioSource source) {
  std::vector<BudgetPoint> out;
  out.reserve(budgets.size());
  for (const double m : budgets) {
    const BathtubAllocation b = bathtub_allocate(model, Budget(m), source);
    out.push_back({m, objective_ivp(model, b.allocation)});
  }
  return out;
}

}  // namespace agesir
