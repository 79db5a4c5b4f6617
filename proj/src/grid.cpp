#include "agesir/grid.hpp"

#include <cmath>
#include <string>

#include "agesir/errors.hpp"

namespace agesir {

AgeGrid::AgeGrid(double a_max, std::size_t n) : a_max_(a_max) {
  if (!(a_max > 0.0) || !std::isfinite(a_max))
    throw ModelError("age grid: a_max must be positive and finite");
  if (n < 2) throw ModelError("age grid: need at least two nodes");
  const auto m = static_cast<Eigen::Index>(n);
  const double h = a_max / static_cast<double>(n - 1);
  nodes_.resize(m);
  weights_.setConstant(m, h);
  for (Eigen::Index i = 0; i < m; ++i) nodes_[i] = h * static_cast<double>(i);
  nodes_[m - 1] = a_max;
  weights_[0] = weights_[m - 1] = 0.5 * h;
}

GridPtr make_grid(double a_max, std::size_t n) { return std::make_shared<const AgeGrid>(a_max, n); }

void require_same_grid(const AgeGrid& a, const AgeGrid& b, const char* what) {
  if (!(a == b))
    throw StructuralError(std::string(what) + ": grid mismatch (n=" + std::to_string(a.size()) +
                          " vs n=" + std::to_string(b.size()) + ")");
}

AgeDensity::AgeDensity(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw StructuralError("density: null grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw StructuralError("density: length " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_->size()));
  if (!values_.allFinite()) throw ModelError("density: non-finite value");
}

AgeDensity AgeDensity::zeros(GridPtr grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return AgeDensity(std::move(grid), Eigen::VectorXd::Zero(n));
}

AgeDensity AgeDensity::constant(GridPtr grid, double value) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return AgeDensity(std::move(grid), Eigen::VectorXd::Constant(n, value));
}

AgeDensity AgeDensity::operator+(const AgeDensity& o) const {
  require_same_grid(*grid_, *o.grid_, "density +");
  return AgeDensity(grid_, values_ + o.values_);
}

AgeDensity AgeDensity::operator-(const AgeDensity& o) const {
  require_same_grid(*grid_, *o.grid_, "density -");
  return AgeDensity(grid_, values_ - o.values_);
}

AgeDensity AgeDensity::operator*(double c) const { return AgeDensity(grid_, values_ * c); }

Kernel::Kernel(GridPtr grid, Eigen::MatrixXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw StructuralError("kernel: null grid");
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (values_.rows() != n || values_.cols() != n)
    throw StructuralError("kernel: expected " + std::to_string(n) + "x" + std::to_string(n) +
                          " matrix");
  if (!values_.allFinite()) throw ModelError("kernel: non-finite entry");
}

bool Kernel::is_separable(double rel_tol) const {
  const Eigen::RowVectorXd first = values_.row(0);
  const double scale = first.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 1; i < values_.rows(); ++i)
    if ((values_.row(i) - first).cwiseAbs().maxCoeff() > rel_tol * scale) return false;
  return true;
}

Eigen::MatrixXd Kernel::weighted() const {
  return values_ * grid_->weights().asDiagonal();
}

double integrate(const AgeDensity& f) { return f.grid()->weights().dot(f.values()); }

AgeDensity apply_kernel(const Kernel& k, const AgeDensity& f) {
  require_same_grid(*k.grid(), *f.grid(), "apply_kernel");
  const Eigen::VectorXd wf = f.grid()->weights().cwiseProduct(f.values());
  return AgeDensity(f.grid(), k.values() * wf);
}

}  // namespace agesir
