#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "agesir/model.hpp"

namespace agesir {

/// Where the ranking ratio beta/mu comes from. kSeparable requires a kernel
/// depending on the infectious age only; kColumnMean uses the column mean of
/// beta and is accepted for any kernel (it coincides with kSeparable when the
/// kernel is separable).
enum class RatioSource { kSeparable, kColumnMean };

Eigen::VectorXd ranking_ratio(const EpidemicModel& model, RatioSource source);

/// Largest budget covered by the optimality theorem:
/// min(mu/beta) * int (beta/mu) S0.
double bathtub_budget_bound(const EpidemicModel& model, RatioSource source = RatioSource::kSeparable);

/// v = S0 on the top level set of beta/mu, fractional at the cut node so that
/// the budget is met exactly under the quadrature rule.
struct BathtubAllocation {
  double s_threshold = 0.0;
  StaticAllocation allocation;
  double budget_used = 0.0;
  double boundary_fraction = 0.0;
  /// -1 when the whole population is allocated.
  Eigen::Index cut_node = -1;
  /// Nodes by decreasing ratio, ties by ascending age index.
  std::vector<Eigen::Index> order;
  std::vector<std::string> warnings;
};

BathtubAllocation bathtub_allocate(const EpidemicModel& model, const Budget& budget,
                                   RatioSource source = RatioSource::kSeparable);

/// Projection in the weighted L2 inner product onto
/// {0 <= v <= upper, int v <= budget}: clip(z - tau, 0, upper), tau >= 0
/// found by bisection (tau = 0 when the budget is slack).
Eigen::VectorXd project_feasible(const Eigen::VectorXd& z, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& weights, double budget);

/// Same onto {0 <= v <= upper, int v = mass}; tau of either sign.
Eigen::VectorXd project_fixed_mass(const Eigen::VectorXd& z, const Eigen::VectorXd& upper,
                                   const Eigen::VectorXd& weights, double mass);

struct OptimizerOptions {
  double tol_kkt = 1e-6;
  int max_iter = 500;
  /// Finite-difference step relative to max S0.
  double fd_rel_step = 1e-6;
  int max_backtracks = 40;
  unsigned threads = 0;
};

struct OptimizerReport {
  StaticAllocation allocation;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<std::pair<int, double>> history;
  bool converged = false;
  bool stalled = false;
  std::string stop_reason;
};

/// Nodal partial derivatives of objective_ivp by central differences
/// (one-sided at the bounds 0 and S0).
Eigen::VectorXd objective_gradient(const EpidemicModel& model, const StaticAllocation& v, double step,
                                   unsigned threads = 0);

/// Projected-gradient ascent on objective_ivp over the budgeted box, with
/// backtracking. Works for any kernel; returns a KKT point.
OptimizerReport optimize_projected_gradient(const EpidemicModel& model, const Budget& budget,
                                            const StaticAllocation& init, const OptimizerOptions& options = {});

struct BudgetPoint {
  double m;
  double objective;
};

/// objective_ivp of the bathtub allocation for each budget.
std::vector<BudgetPoint> sweep_budget(const EpidemicModel& model, const std::vector<double>& budgets,
                                      RatioSource source = RatioSource::kSeparable);

}  // namespace agesir
