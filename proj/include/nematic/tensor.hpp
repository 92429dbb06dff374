#pragma once

#include <array>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "nematic/core.hpp"
#include "nematic/solver.hpp"

namespace nematic {

using Coords5 = std::array<double, 5>;

/// Q = u sqrt2 (n n^T - I2/2) + v sqrt(3/2) (e3 e3^T - I/3), n = (cos(k phi/2), sin(k phi/2), 0).
Eigen::Matrix3d q_matrix(double u, double v, int k, double phi);

/// Orthonormal basis E_0 .. E_4 at angle phi (only E_1, E_2 depend on it).
std::array<Eigen::Matrix3d, 5> e_basis(int k, double phi);

/// Coordinates tr(Q E_i(phi)).
Coords5 e_coords(const Eigen::Matrix3d& q, int k, double phi);

/// Rotation by k psi / 2 about e3.
Eigen::Matrix3d winding_rotation(int k, double psi);

struct QField {
  int k = 0;
  Eigen::VectorXd radii;   ///< sampled profile nodes
  Eigen::VectorXd angles;  ///< phi_j = 2 pi j / count
  Eigen::VectorXd u, v;    ///< profile values at the sampled radii
  /// Per sampled radius: disk quadrature weight and 1/2(u'^2 + v'^2) from the profile.
  Eigen::VectorXd radial_weights, gradient_density;
  std::vector<Eigen::Matrix3d> matrices;  ///< radius-major
  std::vector<Coords5> coords;

  Eigen::Index index(Eigen::Index ir, Eigen::Index ia) const { return ir * angles.size() + ia; }
  std::size_t node_count() const { return matrices.size(); }
};

/// Samples every `stride`-th radial node (the outermost node is always kept).
QField reconstruct(const ProfilePair& profile, int angles = 256, int stride = 1);

/// 1/2 |grad Q|^2 + f_bulk per node, radius-major. With stride 1 the disk
/// quadrature of this density equals 2 pi times the discrete energy.
Eigen::VectorXd energy_density_2d(const QField& field, const MaterialParams& p);

/// sum over nodes of density * radial weight * (2 pi / angle count).
double disk_integral(const QField& field, const Eigen::VectorXd& density);

/// Columns x, y, r, phi, u, v, q11, q12, q13, q22, q23, w0 .. w4; radius-major.
void write_qfield_csv(std::ostream& out, const QField& field);

}  // namespace nematic
