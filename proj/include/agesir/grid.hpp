#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Dense>

namespace agesir {

/// Uniform nodes on [0, a_max] with composite trapezoid weights.
class AgeGrid {
 public:
  AgeGrid(double a_max, std::size_t n);

  double a_max() const noexcept { return a_max_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(nodes_.size()); }
  double spacing() const noexcept { return a_max_ / static_cast<double>(size() - 1); }
  const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  bool operator==(const AgeGrid& other) const noexcept {
    return a_max_ == other.a_max_ && size() == other.size();
  }

 private:
  double a_max_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const AgeGrid>;

GridPtr make_grid(double a_max, std::size_t n);

/// Nodal values of a function of age. Values must be finite; sign is left to
/// the owner (differences of densities are legitimately signed).
class AgeDensity {
 public:
  AgeDensity(GridPtr grid, Eigen::VectorXd values);

  static AgeDensity zeros(GridPtr grid);
  static AgeDensity constant(GridPtr grid, double value);
  template <class F>
  static AgeDensity from_function(GridPtr grid, F&& f) {
    Eigen::VectorXd v(grid->size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(grid->nodes()[i]);
    return AgeDensity(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }
  double min() const { return values_.minCoeff(); }

  AgeDensity operator+(const AgeDensity& o) const;
  AgeDensity operator-(const AgeDensity& o) const;
  AgeDensity operator*(double c) const;

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

inline AgeDensity operator*(double c, const AgeDensity& f) { return f * c; }

/// Dense n x n kernel; row index is the susceptible age x, column the
/// infectious age y.
class Kernel {
 public:
  Kernel(GridPtr grid, Eigen::MatrixXd values);

  template <class F>
  static Kernel from_function(GridPtr grid, F&& k) {
    const auto n = static_cast<Eigen::Index>(grid->size());
    Eigen::MatrixXd m(n, n);
    const auto& x = grid->nodes();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = k(x[i], x[j]);
    return Kernel(std::move(grid), std::move(m));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  bool strictly_positive() const { return values_.minCoeff() > 0.0; }

  /// True when every row equals the first within `rel_tol` (i.e. the kernel
  /// depends on the infectious age only).
  bool is_separable(double rel_tol = 1e-12) const;

  /// Row-independent profile beta(y). Only meaningful when separable.
  Eigen::VectorXd column_profile() const { return values_.row(0).transpose(); }

  /// Nystrom matrix K(i, j) * w_j, so that `weighted() * f` applies the
  /// integral operator.
  Eigen::MatrixXd weighted() const;

  Kernel transposed() const { return Kernel(grid_, values_.transpose()); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd values_;
};

void require_same_grid(const AgeGrid& a, const AgeGrid& b, const char* what);

/// Sum of weights[i] * values[i].
double integrate(const AgeDensity& f);

/// x -> integral of k(x, y) f(y) dy.
AgeDensity apply_kernel(const Kernel& k, const AgeDensity& f);

}  // namespace agesir
