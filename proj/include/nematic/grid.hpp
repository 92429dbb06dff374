#pragma once

#include <Eigen/Core>
#include <string>

namespace nematic {

struct Grading {
  enum class Kind { Uniform, Geometric, Composite };
  Kind kind = Kind::Composite;
  /// Geometric only: ratio of the last cell width to the first.
  double ratio = 1.0;

  static Grading uniform() { return {Kind::Uniform, 1.0}; }
  static Grading geometric(double ratio) { return {Kind::Geometric, ratio}; }
  static Grading composite() { return {Kind::Composite, 1.0}; }

  std::string describe() const;
  static Grading parse(const std::string& text);
};

/// Mesh 0 = r_0 < r_1 < ... < r_N = R with finite-volume weights for \int f r dr.
///
/// Node i owns the annulus between the neighbouring cell midpoints, so
/// weight_i = (r_{i+1/2}^2 - r_{i-1/2}^2) / 2 with r_{-1/2} = 0 and
/// r_{N+1/2} = R. The weights sum to R^2/2 exactly.
class RadialGrid {
 public:
  RadialGrid(Eigen::VectorXd nodes, Grading grading);

  Eigen::Index size() const noexcept { return nodes_.size(); }
  Eigen::Index last() const noexcept { return nodes_.size() - 1; }
  double radius() const noexcept { return nodes_[last()]; }

  const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double r(Eigen::Index i) const { return nodes_[i]; }
  double weight(Eigen::Index i) const { return weights_[i]; }
  /// Width of cell [r_i, r_{i+1}].
  double h(Eigen::Index i) const { return nodes_[i + 1] - nodes_[i]; }
  /// Midpoint of cell [r_i, r_{i+1}].
  double mid(Eigen::Index i) const { return 0.5 * (nodes_[i] + nodes_[i + 1]); }
  const Grading& grading() const noexcept { return grading_; }

  /// Index of the first node with r >= value (size() if none).
  Eigen::Index lower_bound(double value) const;

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Grading grading_;
};

inline constexpr Eigen::Index kMinCells = 16;

/// `cells` is the number of intervals; the grid has cells + 1 nodes.
/// Composite grading puts ceil(cells/4) uniform cells on [0, min(1, R/10)]
/// and grows the remaining cells geometrically from the core spacing.
RadialGrid build_grid(double R, Eigen::Index cells, Grading grading);

/// Finite-volume quadrature of \int_0^R f(r) r dr.
double quadrature(const RadialGrid& g, const Eigen::VectorXd& f);

/// Applies f'' + f'/r - m^2 f / r^2 in conservative form (1/r)(r f')'.
///
/// Row 0: for m = 0 the half-cell balance 4 (f_1 - f_0) / h^2, which equals
/// 2 f''(0) for even f; for m >= 1 the identity row f_0 (enforcing f(0) = 0).
/// Row N carries no stencil and is returned as 0.
Eigen::VectorXd apply_radial_laplacian(const RadialGrid& g, const Eigen::VectorXd& f, int m);

/// Piecewise-linear interpolation of samples on `from` at radius r; constant beyond the ends.
double interpolate(const RadialGrid& from, const Eigen::VectorXd& f, double r);

}  // namespace nematic
