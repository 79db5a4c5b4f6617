#pragma once

#include <string>

#include "agesir/grid.hpp"
#include "agesir/model.hpp"

namespace agesir {

struct EigenOptions {
  /// Stop once the Rayleigh quotient moves by less than tol * max(1, rho).
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Principal eigenpair of L phi = phi - int k(., y) phi(y) dy.
struct EigenResult {
  double lambda1 = 1.0;
  /// Spectral radius of the integral part; lambda1 = 1 - spectral_radius.
  double spectral_radius = 0.0;
  /// Eigenfunction normalised to max = 1.
  AgeDensity phi1;
  int iterations = 0;
  /// |M phi - rho phi|_inf
  double residual = 0.0;
};

/// Power iteration on the Nystrom discretisation of a non-negative kernel,
/// Rayleigh quotient in the quadrature-weighted inner product.
EigenResult principal_eigenvalue(const Kernel& k, const EigenOptions& options = {});

enum class Spread { kSpreads, kNoSpread };

std::string to_string(Spread s);

struct ThresholdResult {
  Spread classification;
  EigenResult eigen;
};

/// beta(x, y) S0(y) / mu(y)
Kernel threshold_kernel(const EpidemicModel& model);

/// beta(x, y) S_inf(y) / mu(y)
Kernel post_epidemic_kernel(const EpidemicModel& model, const AgeDensity& s_inf);

/// lambda1 >= 0: no spread; lambda1 < 0: the disease spreads.
ThresholdResult classify_threshold(const EpidemicModel& model, const EigenOptions& options = {});

/// Principal eigenvalue of phi - int beta(., y) S_inf(y) / mu(y) phi(y) dy;
/// strictly positive for any genuine final state.
EigenResult post_epidemic_eigenvalue(const EpidemicModel& model, const AgeDensity& s_inf,
                                     const EigenOptions& options = {});

}  // namespace agesir
