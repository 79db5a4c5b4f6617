#pragma once

#include <cstdint>
#include <random>

#include "agesir/dynamics.hpp"
#include "agesir/model.hpp"

namespace agesir {

using Rng = std::mt19937_64;

/// Random fractions in [0, 1] per node: either independent uniforms or a
/// random smooth profile, chosen at random.
Eigen::VectorXd random_fractions(Eigen::Index n, Rng& rng);

/// Random allocation with 0 <= v <= S0 and int v == mass.
StaticAllocation random_allocation(const EpidemicModel& model, double mass, Rng& rng);

/// Random time-dependent plan with total mass <= budget: bump, box,
/// exponential or tabulated profile.
VaccinationPlan random_plan(const EpidemicModel& model, const Budget& budget, Rng& rng);

/// random_plan, halving the density until check_plan_admissible passes.
VaccinationPlan random_admissible_plan(const EpidemicModel& model, const Budget& budget, const SimConfig& config,
                                       Rng& rng);

}  // namespace agesir
