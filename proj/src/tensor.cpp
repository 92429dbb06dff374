#include "nematic/tensor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nematic/csv.hpp"

namespace nematic {

namespace {
const double kSqrt2 = std::sqrt(2.0);

Eigen::Matrix3d sym(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a * b.transpose() + b * a.transpose();
}
}  // namespace

std::array<Eigen::Matrix3d, 5> e_basis(int k, double phi) {
  const double t = 0.5 * k * phi;
  const Eigen::Vector3d n(std::cos(t), std::sin(t), 0.0);
  const Eigen::Vector3d m(-std::sin(t), std::cos(t), 0.0);
  const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX(), e2 = Eigen::Vector3d::UnitY(),
                        e3 = Eigen::Vector3d::UnitZ();
  Eigen::Matrix3d i2 = Eigen::Matrix3d::Zero();
  i2(0, 0) = i2(1, 1) = 1.0;
  return {std::sqrt(1.5) * (e3 * e3.transpose() - Eigen::Matrix3d::Identity() / 3.0),
          kSqrt2 * (n * n.transpose() - 0.5 * i2), sym(n, m) / kSqrt2, sym(e1, e3) / kSqrt2,
          sym(e2, e3) / kSqrt2};
}

Eigen::Matrix3d q_matrix(double u, double v, int k, double phi) {
  const auto e = e_basis(k, phi);
  return v * e[0] + u * e[1];
}

Coords5 e_coords(const Eigen::Matrix3d& q, int k, double phi) {
  const auto e = e_basis(k, phi);
  Coords5 c{};
  for (int i = 0; i < 5; ++i) c[i] = (q * e[i]).trace();
  return c;
}

Eigen::Matrix3d winding_rotation(int k, double psi) {
  const double t = 0.5 * k * psi;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(0, 0) = std::cos(t);
  r(0, 1) = -std::sin(t);
  r(1, 0) = std::sin(t);
  r(1, 1) = std::cos(t);
  return r;
}

QField reconstruct(const ProfilePair& profile, int angles, int stride) {
  if (angles < 1) throw std::invalid_argument("reconstruct: need at least one angle");
  if (stride < 1) throw std::invalid_argument("reconstruct: stride must be positive");
  const RadialGrid& g = profile.grid;
  std::vector<Eigen::Index> picked;
  for (Eigen::Index i = 0; i < g.size(); i += stride) picked.push_back(i);
  if (picked.back() != g.last()) picked.push_back(g.last());

  // Cell gradient energy split evenly between the two end nodes.
  Eigen::VectorXd node_grad = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    const double du = profile.u[i + 1] - profile.u[i];
    const double dv = profile.v[i + 1] - profile.v[i];
    const double cell = 0.5 * g.mid(i) * (du * du + dv * dv) / g.h(i);
    node_grad[i] += 0.5 * cell;
    node_grad[i + 1] += 0.5 * cell;
  }

  QField f;
  f.k = profile.params.k();
  const auto nr = static_cast<Eigen::Index>(picked.size());
  f.radii.resize(nr);
  f.u.resize(nr);
  f.v.resize(nr);
  f.gradient_density.resize(nr);
  for (Eigen::Index j = 0; j < nr; ++j) {
    const Eigen::Index i = picked[j];
    f.radii[j] = g.r(i);
    f.u[j] = profile.u[i];
    f.v[j] = profile.v[i];
    f.gradient_density[j] = node_grad[i] / g.weight(i);
  }
  if (stride == 1) {
    f.radial_weights = g.weights();
  } else {
    // Same annulus rule as the grid, on the sampled radii.
    f.radial_weights.resize(nr);
    for (Eigen::Index j = 0; j < nr; ++j) {
      const double lo = j == 0 ? 0.0 : 0.5 * (f.radii[j - 1] + f.radii[j]);
      const double hi = j + 1 == nr ? f.radii[j] : 0.5 * (f.radii[j] + f.radii[j + 1]);
      f.radial_weights[j] = 0.5 * (hi * hi - lo * lo);
    }
  }

  f.angles.resize(angles);
  for (int a = 0; a < angles; ++a) f.angles[a] = 2.0 * std::numbers::pi * a / angles;
  f.matrices.reserve(nr * angles);
  f.coords.reserve(nr * angles);
  for (Eigen::Index j = 0; j < nr; ++j) {
    for (int a = 0; a < angles; ++a) {
      const Eigen::Matrix3d q = q_matrix(f.u[j], f.v[j], f.k, f.angles[a]);
      f.matrices.push_back(q);
      f.coords.push_back(e_coords(q, f.k, f.angles[a]));
    }
  }
  return f;
}

Eigen::VectorXd energy_density_2d(const QField& field, const MaterialParams& p) {
  const double k2 = double(field.k) * field.k;
  const Eigen::Index na = field.angles.size();
  Eigen::VectorXd out(field.radii.size() * na);
  for (Eigen::Index j = 0; j < field.radii.size(); ++j) {
    const double r = field.radii[j];
    double e = field.gradient_density[j] + bulk_density(p, field.u[j], field.v[j]);
    if (r > 0.0) e += 0.5 * k2 * field.u[j] * field.u[j] / (r * r);
    out.segment(j * na, na).setConstant(e);
  }
  return out;
}

double disk_integral(const QField& field, const Eigen::VectorXd& density) {
  const Eigen::Index na = field.angles.size();
  if (density.size() != field.radii.size() * na)
    throw std::invalid_argument("disk_integral: density size mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < field.radii.size(); ++j)
    total += field.radial_weights[j] * density.segment(j * na, na).sum();
  return total * 2.0 * std::numbers::pi / double(na);
}

void write_qfield_csv(std::ostream& out, const QField& field) {
  const std::vector<std::string> header{"x",   "y",   "r",   "phi", "u",  "v",  "q11", "q12", "q13",
                                        "q22", "q23", "w0", "w1",  "w2", "w3", "w4"};
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  const Eigen::Index na = field.angles.size();
  for (Eigen::Index j = 0; j < field.radii.size(); ++j) {
    const double r = field.radii[j];
    for (Eigen::Index a = 0; a < na; ++a) {
      const double phi = field.angles[a];
      const auto& q = field.matrices[field.index(j, a)];
      const auto& c = field.coords[field.index(j, a)];
      const double row[] = {r * std::cos(phi), r * std::sin(phi), r, phi, field.u[j], field.v[j],
                            q(0, 0), q(0, 1), q(0, 2), q(1, 1), q(1, 2),
                            c[0], c[1], c[2], c[3], c[4]};
      bool first = true;
      for (double x : row) {
        out << (first ? "" : ",") << format_double(x);
        first = false;
      }
      out << '\n';
    }
  }
}

}  // namespace nematic
