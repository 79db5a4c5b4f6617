#pragma once

#include "agesir/model.hpp"

namespace agesir {

struct FinalSizeOptions {
  /// Gap tolerance relative to max S0.
  double tol_rel = 1e-12;
  int max_iter = 10000;
  /// Iterations without gap improvement before declaring a stall.
  int stall_window = 50;
};

/// Fixed point of the post-epidemic susceptible equation together with the
/// monotone bracket that certifies it.
struct FinalSizeSolution {
  AgeDensity s_inf;
  int iterations = 0;
  /// |s_inf - Phi(s_inf)|_inf
  double residual = 0.0;
  AgeDensity lower;
  AgeDensity upper;
};

/// sigma0 = int r (S0 - v), sigma_inf = int r S_inf, eta = exp(-int r I0)
/// with r = beta / mu for a kernel depending on the infectious age only.
struct ScalarSummary {
  double sigma0 = 0.0;
  double sigma_inf = 0.0;
  double eta = 1.0;
};

struct SeparableFinalSize {
  FinalSizeSolution solution;
  ScalarSummary summary;
};

/// Phi(S)(x) = (S0 - v)(x) exp( int beta(x,y)/mu(y) (S - I0 - S0 + v)(y) dy ).
AgeDensity final_size_map(const EpidemicModel& model, const StaticAllocation& v, const AgeDensity& s);

/// Monotone sandwich: lower iterate from 0, upper from S0 - v, both pushed
/// through Phi until they meet. Throws NumericalError on a stall or when the
/// iteration cap is hit.
FinalSizeSolution solve_final_size(const EpidemicModel& model, const StaticAllocation& v,
                                   const FinalSizeOptions& options = {});

/// The root x <= sigma0 of x e^{-x} = sigma0 e^{-sigma0} eta, by bisection.
double scalar_final_sigma(double sigma0, double eta);

/// Scalar reduction for separable kernels; throws PreconditionError otherwise.
SeparableFinalSize solve_final_size_separable(const EpidemicModel& model, const StaticAllocation& v);

ScalarSummary scalar_summary(const EpidemicModel& model, const StaticAllocation& v);

/// Survivors of the pre-vaccinated epidemic: int S_inf + int v. For
/// separable kernels the closed form m + (int S0 - m) e^{sigma_inf - sigma0} eta
/// is cross-checked to 1e-9.
double objective_ivp(const EpidemicModel& model, const StaticAllocation& v);

}  // namespace agesir
