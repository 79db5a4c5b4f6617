#include "agesir/spectral.hpp"

#include <cmath>
#include <sstream>

#include "agesir/errors.hpp"

namespace agesir {

EigenResult principal_eigenvalue(const Kernel& k, const EigenOptions& options) {
  if (k.values().minCoeff() < 0.0) throw PreconditionError("principal_eigenvalue: kernel must be non-negative");
  const GridPtr& g = k.grid();
  const Eigen::VectorXd& w = g->weights();
  const Eigen::MatrixXd op = k.weighted();
  const auto n = op.rows();

  Eigen::VectorXd phi = Eigen::VectorXd::Ones(n);
  auto rayleigh = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& mx) {
    return w.dot(x.cwiseProduct(mx)) / w.dot(x.cwiseProduct(x));
  };

  EigenResult res{1.0, 0.0, AgeDensity(g, phi), 0, 0.0};
  Eigen::VectorXd mphi = op * phi;
  if (mphi.cwiseAbs().maxCoeff() == 0.0) return res;  // zero operator: L is the identity

  double rho = rayleigh(phi, mphi);
  for (int it = 1; it <= options.max_iter; ++it) {
    phi = mphi / mphi.cwiseAbs().maxCoeff();
    mphi = op * phi;
    const double next = rayleigh(phi, mphi);
    const double change = std::abs(next - rho);
    rho = next;
    const double residual = (mphi - rho * phi).cwiseAbs().maxCoeff();
    if (change < options.tol * std::max(1.0, std::abs(rho)) && residual < 1e-9 * std::max(1.0, rho)) {
      res.lambda1 = 1.0 - rho;
      res.spectral_radius = rho;
      res.phi1 = AgeDensity(g, phi);
      res.iterations = it;
      res.residual = residual;
      return res;
    }
  }
  std::ostringstream os;
  os << "principal_eigenvalue: power iteration did not settle in " << options.max_iter << " iterations";
  throw NumericalError(os.str());
}

std::string to_string(Spread s) { return s == Spread::kSpreads ? "Spreads" : "NoSpread"; }

Kernel threshold_kernel(const EpidemicModel& model) {
  const Eigen::VectorXd col = model.s0().values().cwiseQuotient(model.mu().values());
  return Kernel(model.grid(), model.beta().values() * col.asDiagonal());
}

Kernel post_epidemic_kernel(const EpidemicModel& model, const AgeDensity& s_inf) {
  require_same_grid(*model.grid(), *s_inf.grid(), "post_epidemic_kernel");
  const Eigen::VectorXd col = s_inf.values().cwiseMax(0.0).cwiseQuotient(model.mu().values());
  return Kernel(model.grid(), model.beta().values() * col.asDiagonal());
}

ThresholdResult classify_threshold(const EpidemicModel& model, const EigenOptions& options) {
  EigenResult eig = principal_eigenvalue(threshold_kernel(model), options);
  const Spread cls = eig.lambda1 >= 0.0 ? Spread::kNoSpread : Spread::kSpreads;
  return {cls, std::move(eig)};
}

EigenResult post_epidemic_eigenvalue(const EpidemicModel& model, const AgeDensity& s_inf,
                                     const EigenOptions& options) {
  return principal_eigenvalue(post_epidemic_kernel(model, s_inf), options);
}

}  // namespace agesir
