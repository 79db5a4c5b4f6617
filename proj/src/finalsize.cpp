#include "agesir/finalsize.hpp"

#include <cmath>
#include <sstream>

#include "agesir/errors.hpp"

namespace agesir {

namespace {

struct FixedPointMap {
  Eigen::VectorXd base;    // S0 - v
  Eigen::VectorXd offset;  // R (I0 + S0 - v)
  const Eigen::MatrixXd& ratio;

  FixedPointMap(const EpidemicModel& m, const StaticAllocation& v)
      : base((m.s0().values() - v.values()).cwiseMax(0.0)),
        offset(m.ratio_weighted() * (m.i0().values() + base)),
        ratio(m.ratio_weighted()) {}

  Eigen::VectorXd operator()(const Eigen::VectorXd& s) const {
    return base.cwiseProduct((ratio * s - offset).array().exp().matrix());
  }
};

}  // namespace

AgeDensity final_size_map(const EpidemicModel& model, const StaticAllocation& v, const AgeDensity& s) {
  require_same_grid(*model.grid(), *s.grid(), "final_size_map");
  return AgeDensity(model.grid(), FixedPointMap(model, v)(s.values()));
}

FinalSizeSolution solve_final_size(const EpidemicModel& model, const StaticAllocation& v,
                                   const FinalSizeOptions& options) {
  require_same_grid(*model.grid(), *v.v().grid(), "solve_final_size");
  const FixedPointMap phi(model, v);
  const double tol = options.tol_rel * model.s0().max_abs();

  Eigen::VectorXd lower = Eigen::VectorXd::Zero(phi.base.size());
  Eigen::VectorXd upper = phi.base;
  double gap = (upper - lower).maxCoeff();
  double best_gap = gap;
  int since_best = 0;
  int it = 0;
  while (gap > tol) {
    if (++it > options.max_iter) {
      std::ostringstream os;
      os << "final size: no convergence in " << options.max_iter << " iterations (gap " << gap << ")";
      throw NumericalError(os.str());
    }
    lower = phi(lower);
    upper = phi(upper);
    gap = (upper - lower).maxCoeff();
    if (gap < best_gap) {
      best_gap = gap;
      since_best = 0;
    } else if (++since_best >= options.stall_window) {
      std::ostringstream os;
      os << "final size: sandwich stalled at gap " << gap << " after " << it << " iterations";
      throw NumericalError(os.str());
    }
  }
  Eigen::VectorXd mid = 0.5 * (lower + upper);
  const double residual = (mid - phi(mid)).cwiseAbs().maxCoeff();
  const GridPtr& g = model.grid();
  return {AgeDensity(g, std::move(mid)), it, residual, AgeDensity(g, std::move(lower)),
          AgeDensity(g, std::move(upper))};
}

double scalar_final_sigma(double sigma0, double eta) {
  if (sigma0 < 0.0 || !(eta > 0.0) || eta > 1.0)
    throw PreconditionError("scalar final size: need sigma0 >= 0 and 0 < eta <= 1");
  if (sigma0 == 0.0) return 0.0;
  auto f = [](double x) { return x * std::exp(-x); };
  const double target = f(sigma0) * eta;
  // x e^{-x} increases on [0, 1]; the root below sigma0 lies in [0, min(sigma0, 1)].
  double lo = 0.0;
  double hi = std::min(sigma0, 1.0);
  if (f(hi) < target) throw NumericalError("scalar final size: bracket failure");
  for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ScalarSummary scalar_summary(const EpidemicModel& model, const StaticAllocation& v) {
  const Eigen::VectorXd r = model.separable_ratio();
  const Eigen::VectorXd& w = model.grid()->weights();
  ScalarSummary out;
  out.sigma0 = w.dot(r.cwiseProduct(model.s0().values() - v.values()));
  out.eta = std::exp(-w.dot(r.cwiseProduct(model.i0().values())));
  out.sigma_inf = scalar_final_sigma(std::max(out.sigma0, 0.0), out.eta);
  return out;
}

SeparableFinalSize solve_final_size_separable(const EpidemicModel& model, const StaticAllocation& v) {
  const ScalarSummary sum = scalar_summary(model, v);
  const FixedPointMap phi(model, v);
  Eigen::VectorXd s = phi.base * (std::exp(sum.sigma_inf - sum.sigma0) * sum.eta);
  const double residual = (s - phi(s)).cwiseAbs().maxCoeff();
  const GridPtr& g = model.grid();
  AgeDensity sd(g, s);
  return {FinalSizeSolution{sd, 0, residual, sd, sd}, sum};
}

double objective_ivp(const EpidemicModel& model, const StaticAllocation& v) {
  const FinalSizeSolution sol = solve_final_size(model, v);
  const double m = integrate(v.v());
  const double value = integrate(sol.s_inf) + m;
  if (model.separable()) {
    const ScalarSummary sum = scalar_summary(model, v);
    const double closed = m + (integrate(model.s0()) - m) * std::exp(sum.sigma_inf - sum.sigma0) * sum.eta;
    if (std::abs(closed - value) > 1e-9 * std::max(1.0, model.total_population())) {
      std::ostringstream os;
      os.precision(15);
      os << "objective_ivp: fixed point (" << value << ") and scalar closed form (" << closed << ") disagree";
      throw NumericalError(os.str());
    }
  }
  return value;
}

}  // namespace agesir
