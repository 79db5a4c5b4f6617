#include "agesir/sampling.hpp"

#include <cmath>
#include <numbers>

#include "agesir/errors.hpp"
#include "agesir/ivp_optimizer.hpp"

namespace agesir {

Eigen::VectorXd random_fractions(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd out(n);
  if (unit(rng) < 0.5) {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = unit(rng);
    return out;
  }
  // a few random cosine modes squashed into [0, 1]
  const double a1 = unit(rng) * 2 - 1, a2 = unit(rng) * 2 - 1, a3 = unit(rng) * 2 - 1;
  const double p1 = unit(rng) * 2 * std::numbers::pi, p2 = unit(rng) * 2 * std::numbers::pi;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    const double s = a1 * std::cos(std::numbers::pi * u + p1) + a2 * std::cos(3 * std::numbers::pi * u + p2) + a3;
    out[i] = 0.5 * (1.0 + std::tanh(2.0 * s));
  }
  return out;
}

StaticAllocation random_allocation(const EpidemicModel& model, double mass, Rng& rng) {
  const Eigen::VectorXd& s0 = model.s0().values();
  const Eigen::VectorXd z = random_fractions(s0.size(), rng).cwiseProduct(s0);
  const Eigen::VectorXd v = project_fixed_mass(z, s0, model.grid()->weights(), mass);
  return StaticAllocation(model, AgeDensity(model.grid(), v));
}

VaccinationPlan random_plan(const EpidemicModel& model, const Budget& budget, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const GridPtr& g = model.grid();
  const Eigen::VectorXd& s0 = model.s0().values();
  Eigen::VectorXd density = random_fractions(s0.size(), rng).cwiseProduct(s0) * (0.2 + 0.7 * unit(rng));
  const double mass = g->weights().dot(density);
  if (mass > budget.k && mass > 0.0) density *= budget.k / mass;

  const int kind = static_cast<int>(unit(rng) * 4.0);
  const double start = unit(rng) < 0.3 ? 0.0 : 5.0 * unit(rng);
  const double width = 0.05 + 2.0 * unit(rng);
  switch (kind) {
    case 0: return VaccinationPlan::separable(TimeProfile::bump(start, width), AgeDensity(g, density));
    case 1: return VaccinationPlan::separable(TimeProfile::box(start, width), AgeDensity(g, density));
    case 2: {
      // exponential truncated at its horizon carries mass 1 - e^{-rate H} < 1
      const double rate = 0.5 + 4.0 * unit(rng);
      return VaccinationPlan::separable(TimeProfile::exponential(rate, 1.0 + 4.0 * unit(rng)), AgeDensity(g, density));
    }
    default: {
      const int k = 4;
      std::vector<double> times(k);
      Eigen::MatrixXd values(k, s0.size());
      for (int j = 0; j < k; ++j) {
        times[static_cast<std::size_t>(j)] = start + width * j / (k - 1);
        values.row(j) = (random_fractions(s0.size(), rng).cwiseProduct(density)).transpose();
      }
      VaccinationPlan plan = VaccinationPlan::tabulated(g, times, values);
      const double m = total_mass(plan);
      if (m > budget.k && m > 0.0) plan = VaccinationPlan::tabulated(g, times, values * (budget.k / m));
      return plan;
    }
  }
}

namespace {

VaccinationPlan scaled(const VaccinationPlan& plan, double c) {
  if (const auto* sep = std::get_if<SeparablePlan>(&plan.representation()))
    return VaccinationPlan::separable(sep->profile, AgeDensity(plan.grid(), sep->density * c));
  const auto& tab = std::get<TabulatedPlan>(plan.representation());
  return VaccinationPlan::tabulated(plan.grid(), tab.times, tab.values * c);
}

}  // namespace

VaccinationPlan random_admissible_plan(const EpidemicModel& model, const Budget& budget, const SimConfig& config,
                                       Rng& rng) {
  VaccinationPlan plan = random_plan(model, budget, rng);
  for (int k = 0; k < 30; ++k) {
    if (check_plan_admissible(model, plan, budget, config).admissible) return plan;
    plan = scaled(plan, 0.5);
  }
  throw NumericalError("random_admissible_plan: could not certify a plan");
}

}  // namespace agesir
