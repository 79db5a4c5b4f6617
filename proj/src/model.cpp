#include "agesir/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "agesir/errors.hpp"

namespace agesir {

namespace {

std::string at_node(const AgeGrid& g, Eigen::Index i) {
  std::ostringstream os;
  os << "node " << i << " (age " << g.nodes()[i] << ")";
  return os.str();
}

}  // namespace

EpidemicModel::EpidemicModel(Kernel beta, AgeDensity mu, AgeDensity s0, AgeDensity i0, ModelChecks checks)
    : beta_(std::move(beta)), mu_(std::move(mu)), s0_(std::move(s0)), i0_(std::move(i0)), checks_(checks) {
  const AgeGrid& g = *beta_.grid();
  require_same_grid(g, *mu_.grid(), "model mu");
  require_same_grid(g, *s0_.grid(), "model S0");
  require_same_grid(g, *i0_.grid(), "model I0");

  const bool strict = checks == ModelChecks::kStrict;
  if (strict ? !beta_.strictly_positive() : beta_.values().minCoeff() < 0.0)
    throw ModelError(strict ? "beta must be > 0 everywhere" : "beta must be >= 0 everywhere");
  for (Eigen::Index i = 0; i < mu_.values().size(); ++i) {
    if (!(mu_.values()[i] > 0.0)) throw ModelError("mu must be > 0, fails at " + at_node(g, i));
    if (!(s0_.values()[i] > 0.0)) throw ModelError("S0 must be > 0, fails at " + at_node(g, i));
    if (i0_.values()[i] < 0.0) throw ModelError("I0 must be >= 0, fails at " + at_node(g, i));
  }
  if (strict && !(integrate(i0_) > 0.0)) throw ModelError("I0 must not vanish identically");

  beta_weighted_ = beta_.weighted();
  ratio_weighted_ = beta_weighted_ * mu_.values().cwiseInverse().asDiagonal();
}

double EpidemicModel::total_population() const { return integrate(s0_) + integrate(i0_); }

Eigen::VectorXd EpidemicModel::separable_ratio() const {
  if (!beta_.is_separable())
    throw PreconditionError("kernel is not separable: beta(x, y) depends on x");
  return beta_.column_profile().cwiseQuotient(mu_.values());
}

Eigen::VectorXd EpidemicModel::mean_ratio() const {
  const Eigen::VectorXd col_mean = beta_.values().colwise().mean().transpose();
  return col_mean.cwiseQuotient(mu_.values());
}

EpidemicModel EpidemicModel::with_s0(AgeDensity s0) const {
  return EpidemicModel(beta_, mu_, std::move(s0), i0_, checks_);
}

EpidemicModel EpidemicModel::with_i0(AgeDensity i0) const {
  return EpidemicModel(beta_, mu_, s0_, std::move(i0), checks_);
}

StaticAllocation::StaticAllocation(const EpidemicModel& model, AgeDensity v) : v_(std::move(v)) {
  require_same_grid(*model.grid(), *v_.grid(), "allocation");
  const double tol = 1e-12 * model.s0().max_abs();
  const Eigen::VectorXd& s0 = model.s0().values();
  for (Eigen::Index i = 0; i < s0.size(); ++i) {
    if (v_.values()[i] < -tol) throw ModelError("allocation negative at " + at_node(*model.grid(), i));
    if (v_.values()[i] > s0[i] + tol) throw ModelError("allocation exceeds S0 at " + at_node(*model.grid(), i));
  }
}

StaticAllocation StaticAllocation::none(const EpidemicModel& model) {
  return StaticAllocation(model, AgeDensity::zeros(model.grid()));
}

StaticAllocation StaticAllocation::fraction_of_s0(const EpidemicModel& model, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw ModelError("allocation fraction must lie in [0, 1]");
  return StaticAllocation(model, model.s0() * fraction);
}

Budget::Budget(double k_) : k(k_) {
  if (!(k_ >= 0.0) || !std::isfinite(k_)) throw ModelError("budget must be finite and >= 0");
}

TimeProfile TimeProfile::bump(double start, double width) {
  if (!(width > 0.0) || start < 0.0) throw ModelError("bump profile: need start >= 0, width > 0");
  return TimeProfile(Kind::kBump, start, width);
}

TimeProfile TimeProfile::box(double start, double width) {
  if (!(width > 0.0) || start < 0.0) throw ModelError("box profile: need start >= 0, width > 0");
  return TimeProfile(Kind::kBox, start, width);
}

TimeProfile TimeProfile::exponential(double rate, double horizon) {
  if (!(rate > 0.0) || !(horizon > 0.0)) throw ModelError("exponential profile: need rate, horizon > 0");
  return TimeProfile(Kind::kExponential, rate, horizon);
}

double TimeProfile::operator()(double t) const {
  switch (kind_) {
    case Kind::kBump: {
      const double u = (t - a_) / b_;
      if (u < 0.0 || u > 1.0) return 0.0;
      const double c = std::cos(std::numbers::pi * (u - 0.5));
      return 2.0 * c * c / b_;
    }
    case Kind::kBox: {
      const double u = (t - a_) / b_;
      return (u < 0.0 || u > 1.0) ? 0.0 : 1.0 / b_;
    }
    case Kind::kExponential:
      return (t < 0.0 || t > b_) ? 0.0 : a_ * std::exp(-a_ * t);
  }
  return 0.0;
}

double TimeProfile::cumulative(double t) const {
  switch (kind_) {
    case Kind::kBump: {
      const double u = std::clamp((t - a_) / b_, 0.0, 1.0);
      if (u == 1.0) return 1.0;
      return u - std::sin(2.0 * std::numbers::pi * u) / (2.0 * std::numbers::pi);
    }
    case Kind::kBox:
      return std::clamp((t - a_) / b_, 0.0, 1.0);
    case Kind::kExponential:
      return 1.0 - std::exp(-a_ * std::clamp(t, 0.0, b_));
  }
  return 0.0;
}

double TimeProfile::end() const { return kind_ == Kind::kExponential ? b_ : a_ + b_; }

std::vector<double> TimeProfile::breakpoints() const {
  if (kind_ == Kind::kExponential) return {b_};
  return {a_, a_ + b_};
}

VaccinationPlan::VaccinationPlan(GridPtr grid, std::variant<SeparablePlan, TabulatedPlan> repr, bool zero)
    : grid_(std::move(grid)), repr_(std::move(repr)), zero_(zero) {}

VaccinationPlan VaccinationPlan::none(GridPtr grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return VaccinationPlan(std::move(grid), SeparablePlan{TimeProfile::box(0.0, 1.0), Eigen::VectorXd::Zero(n)},
                         true);
}

VaccinationPlan VaccinationPlan::separable(TimeProfile profile, const AgeDensity& density) {
  if (density.min() < 0.0) throw ModelError("plan density must be >= 0");
  const bool zero = density.max_abs() == 0.0;
  return VaccinationPlan(density.grid(), SeparablePlan{profile, density.values()}, zero);
}

VaccinationPlan VaccinationPlan::tabulated(GridPtr grid, std::vector<double> times, Eigen::MatrixXd values) {
  if (times.empty()) throw ModelError("tabulated plan: no time points");
  if (static_cast<Eigen::Index>(times.size()) != values.rows() ||
      values.cols() != static_cast<Eigen::Index>(grid->size()))
    throw StructuralError("tabulated plan: values must be (#times) x (#ages)");
  if (times.front() < 0.0) throw ModelError("tabulated plan: times must be >= 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ModelError("tabulated plan: times must be increasing");
  if (!values.allFinite() || values.minCoeff() < 0.0) throw ModelError("tabulated plan: values must be finite, >= 0");
  const bool zero = values.cwiseAbs().maxCoeff() == 0.0;
  return VaccinationPlan(std::move(grid), TabulatedPlan{std::move(times), std::move(values)}, zero);
}

Eigen::VectorXd VaccinationPlan::rate(double t) const {
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (zero_) return Eigen::VectorXd::Zero(n);
  if (const auto* sep = std::get_if<SeparablePlan>(&repr_)) return sep->profile(t) * sep->density;
  const auto& tab = std::get<TabulatedPlan>(repr_);
  const auto& ts = tab.times;
  if (t < ts.front() || t > ts.back()) return Eigen::VectorXd::Zero(n);
  if (ts.size() == 1) return tab.values.row(0).transpose();
  const auto k = static_cast<Eigen::Index>(
      std::min<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin(), ts.size() - 1) - 1);
  const double th = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return ((1.0 - th) * tab.values.row(k) + th * tab.values.row(k + 1)).transpose();
}

Eigen::VectorXd VaccinationPlan::cumulative(double t) const {
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (zero_) return Eigen::VectorXd::Zero(n);
  if (const auto* sep = std::get_if<SeparablePlan>(&repr_)) return sep->profile.cumulative(t) * sep->density;
  const auto& tab = std::get<TabulatedPlan>(repr_);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  const auto& ts = tab.times;
  for (std::size_t k = 0; k + 1 < ts.size() && ts[k] < t; ++k) {
    const double t1 = std::min(t, ts[k + 1]);
    const auto r0 = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd a = tab.values.row(r0).transpose();
    const Eigen::VectorXd b = tab.values.row(r0 + 1).transpose();
    const double th = (t1 - ts[k]) / (ts[k + 1] - ts[k]);
    // exact integral of the linear interpolant over [ts[k], t1]
    acc += (t1 - ts[k]) * (a + 0.5 * th * (b - a));
  }
  return acc;
}

double VaccinationPlan::horizon() const {
  if (zero_) return 0.0;
  if (const auto* sep = std::get_if<SeparablePlan>(&repr_)) return sep->profile.end();
  return std::get<TabulatedPlan>(repr_).times.back();
}

std::vector<double> VaccinationPlan::breakpoints() const {
  if (zero_) return {};
  if (const auto* sep = std::get_if<SeparablePlan>(&repr_)) return sep->profile.breakpoints();
  return std::get<TabulatedPlan>(repr_).times;
}

AgeDensity nu_infinity(const VaccinationPlan& plan) {
  return AgeDensity(plan.grid(), plan.cumulative(plan.horizon()));
}

double total_mass(const VaccinationPlan& plan) { return integrate(nu_infinity(plan)); }

std::string to_string(Violation v) {
  switch (v) {
    case Violation::kNone: return "none";
    case Violation::kNegative: return "negative allocation";
    case Violation::kAboveS0: return "allocation above S0";
    case Violation::kOverBudget: return "budget exceeded";
    case Violation::kNegativeSusceptible: return "susceptible driven negative";
  }
  return "unknown";
}

AdmissibilityReport check_static_admissible(const EpidemicModel& model, const AgeDensity& v, const Budget& budget) {
  require_same_grid(*model.grid(), *v.grid(), "check_static_admissible");
  AdmissibilityReport rep;
  const Eigen::VectorXd& s0 = model.s0().values();
  const double tol = 1e-12 * model.s0().max_abs();
  const double most_negative = -v.values().minCoeff();
  const double most_above = (v.values() - s0).maxCoeff();
  if (most_negative > tol) {
    rep = {false, Violation::kNegative, "v < 0 somewhere", most_negative};
  } else if (most_above > tol) {
    rep = {false, Violation::kAboveS0, "v > S0 somewhere", most_above};
  } else {
    const double used = integrate(v);
    if (used > budget.k + 1e-9 * budget.k + 1e-15) {
      std::ostringstream os;
      os << "integral of v = " << used << " exceeds K = " << budget.k;
      rep = {false, Violation::kOverBudget, os.str(), used - budget.k};
    }
  }
  return rep;
}

}  // namespace agesir
