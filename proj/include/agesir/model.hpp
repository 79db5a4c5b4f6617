#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "agesir/grid.hpp"

namespace agesir {

/// Which of the standing positivity assumptions are enforced on construction.
/// `kRelaxed` admits beta >= 0 and I0 == 0, the degenerate cases used as
/// sanity checks (no contagion, disease-free state).
enum class ModelChecks { kStrict, kRelaxed };

/// Fixed problem data: transmission kernel beta(x, y), removal rate mu(x),
/// initial susceptible and infectious densities.
class EpidemicModel {
 public:
  EpidemicModel(Kernel beta, AgeDensity mu, AgeDensity s0, AgeDensity i0,
                ModelChecks checks = ModelChecks::kStrict);

  const GridPtr& grid() const noexcept { return beta_.grid(); }
  const Kernel& beta() const noexcept { return beta_; }
  const AgeDensity& mu() const noexcept { return mu_; }
  const AgeDensity& s0() const noexcept { return s0_; }
  const AgeDensity& i0() const noexcept { return i0_; }

  /// beta(x_i, y_j) w_j : the force of infection is `beta_weighted() * I`.
  const Eigen::MatrixXd& beta_weighted() const noexcept { return beta_weighted_; }
  /// beta(x_i, y_j) w_j / mu(y_j).
  const Eigen::MatrixXd& ratio_weighted() const noexcept { return ratio_weighted_; }

  double total_population() const;

  /// beta(y)/mu(y) for a separable kernel; throws PreconditionError otherwise.
  Eigen::VectorXd separable_ratio() const;
  /// Column mean of beta divided by mu: the separable projection of a general
  /// kernel, equal to `separable_ratio()` when beta depends on y only.
  Eigen::VectorXd mean_ratio() const;

  bool separable() const { return beta_.is_separable(); }

  /// Same model with a different initial susceptible density.
  EpidemicModel with_s0(AgeDensity s0) const;
  EpidemicModel with_i0(AgeDensity i0) const;

 private:
  Kernel beta_;
  AgeDensity mu_, s0_, i0_;
  ModelChecks checks_;
  Eigen::MatrixXd beta_weighted_;
  Eigen::MatrixXd ratio_weighted_;
};

/// Pre-epidemic allocation 0 <= v <= S0.
class StaticAllocation {
 public:
  /// Throws ModelError when v leaves [0, S0] by more than 1e-12 * max S0.
  StaticAllocation(const EpidemicModel& model, AgeDensity v);
  static StaticAllocation none(const EpidemicModel& model);
  /// v = fraction * S0.
  static StaticAllocation fraction_of_s0(const EpidemicModel& model, double fraction);

  const AgeDensity& v() const noexcept { return v_; }
  const Eigen::VectorXd& values() const noexcept { return v_.values(); }

 private:
  AgeDensity v_;
};

struct Budget {
  explicit Budget(double k);
  double k;
};

/// Scalar time profile p(t) >= 0, zero outside its support.
class TimeProfile {
 public:
  enum class Kind { kBump, kBox, kExponential };

  /// 2 cos^2(pi (u - 1/2)) / width on [start, start + width], unit mass.
  static TimeProfile bump(double start, double width);
  /// 1/width on [start, start + width], unit mass.
  static TimeProfile box(double start, double width);
  /// rate * exp(-rate t) on [0, horizon].
  static TimeProfile exponential(double rate, double horizon);

  Kind kind() const noexcept { return kind_; }
  double start() const noexcept { return a_; }
  double width() const noexcept { return b_; }
  double rate_parameter() const noexcept { return a_; }

  double operator()(double t) const;
  /// Integral of p over [0, t].
  double cumulative(double t) const;
  /// End of the support.
  double end() const;
  /// Times where p is not smooth; the integrator lands on them.
  std::vector<double> breakpoints() const;

 private:
  TimeProfile(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_, b_;
};

/// nu(t, x) = profile(t) * density(x).
struct SeparablePlan {
  TimeProfile profile;
  Eigen::VectorXd density;
};

/// Rows of `values` are ages at `times[k]`; linear in t in between, zero before
/// the first and after the last time.
struct TabulatedPlan {
  std::vector<double> times;
  Eigen::MatrixXd values;
};

/// Time-dependent vaccination rate nu(t, x) >= 0 with finite horizon.
class VaccinationPlan {
 public:
  static VaccinationPlan none(GridPtr grid);
  static VaccinationPlan separable(TimeProfile profile, const AgeDensity& density);
  static VaccinationPlan tabulated(GridPtr grid, std::vector<double> times, Eigen::MatrixXd values);

  const GridPtr& grid() const noexcept { return grid_; }
  bool is_zero() const noexcept { return zero_; }
  const std::variant<SeparablePlan, TabulatedPlan>& representation() const noexcept { return repr_; }

  /// nu(t, .)
  Eigen::VectorXd rate(double t) const;
  /// integral of nu over [0, t].
  Eigen::VectorXd cumulative(double t) const;
  /// Time after which nu == 0.
  double horizon() const;
  std::vector<double> breakpoints() const;

 private:
  VaccinationPlan(GridPtr grid, std::variant<SeparablePlan, TabulatedPlan> repr, bool zero);
  GridPtr grid_;
  std::variant<SeparablePlan, TabulatedPlan> repr_;
  bool zero_;
};

/// x -> integral over t of nu(t, x). Closed form for separable plans,
/// trapezoid in t for tabulated ones.
AgeDensity nu_infinity(const VaccinationPlan& plan);

/// Total doses: double integral of nu.
double total_mass(const VaccinationPlan& plan);

enum class Violation { kNone, kNegative, kAboveS0, kOverBudget, kNegativeSusceptible };

std::string to_string(Violation v);

struct AdmissibilityReport {
  bool admissible = true;
  Violation violation = Violation::kNone;
  std::string message;
  /// Size of the worst violation in the violated constraint's units.
  double magnitude = 0.0;
};

/// 0 <= v <= S0 pointwise and integral of v <= K (1 + 1e-9).
AdmissibilityReport check_static_admissible(const EpidemicModel& model, const AgeDensity& v,
                                            const Budget& budget);

}  // namespace agesir
