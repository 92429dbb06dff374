#include "nematic/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nematic {

namespace {
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt6 = std::sqrt(6.0);
}  // namespace

MaterialParams::MaterialParams(double a2, double b2, double c2, int k, bool allow_b_zero)
    : a2_(a2), b2_(b2), c2_(c2), k_(k), allow_b_zero_(allow_b_zero) {
  if (!(a2 > 0.0) || !std::isfinite(a2)) throw std::invalid_argument("a2 must be positive");
  if (!(c2 > 0.0) || !std::isfinite(c2)) throw std::invalid_argument("c2 must be positive");
  if (!(b2 >= 0.0) || !std::isfinite(b2)) throw std::invalid_argument("b2 must be nonnegative");
  if (k == 0) throw std::invalid_argument("k must be nonzero");
  if (b2 == 0.0 && !allow_b_zero)
    throw std::invalid_argument("b2 = 0 requires the diagnostic flag (allow_b_zero)");
}

DerivedConstants derive_constants(const MaterialParams& p) {
  const double root = std::sqrt(p.b2() * p.b2() + 24.0 * p.a2() * p.c2());
  DerivedConstants d{};
  d.s_plus = (p.b2() + root) / (4.0 * p.c2());
  d.s_minus = (p.b2() - root) / (4.0 * p.c2());
  d.mu = p.b2() / root;
  d.u_inf = d.s_plus / kSqrt2;
  d.v_inf = -d.s_plus / kSqrt6;
  const double s = d.s_plus;
  d.f_min = -p.a2() * s * s / 3.0 + p.c2() * s * s * s * s / 9.0 - 2.0 * p.b2() * s * s * s / 27.0;
  return d;
}

std::string_view to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::Supercritical: return "SUPERCRITICAL";
    case RegimeTag::Critical: return "CRITICAL";
    case RegimeTag::Subcritical: return "SUBCRITICAL";
    case RegimeTag::BZero: return "B_ZERO";
  }
  return "UNKNOWN";
}

Regime classify_regime(const MaterialParams& p, double tol) {
  if (tol < 0.0) throw std::invalid_argument("regime tolerance must be nonnegative");
  const double b4 = p.b2() * p.b2();
  const double ac = 3.0 * p.a2() * p.c2();
  Regime r{RegimeTag::Subcritical, b4 - ac, tol};
  if (p.b_zero()) {
    r.tag = RegimeTag::BZero;
  } else if (std::abs(r.discriminant) <= tol * (b4 + ac)) {
    r.tag = RegimeTag::Critical;
  } else if (r.discriminant > 0.0) {
    r.tag = RegimeTag::Supercritical;
  }
  return r;
}

double bulk_density(const MaterialParams& p, double u, double v) {
  const double rho = u * u + v * v;
  return -0.5 * p.a2() * rho + 0.25 * p.c2() * rho * rho -
         p.b2() / (3.0 * kSqrt6) * v * (v * v - 3.0 * u * u);
}

Eigen::Vector2d bulk_gradient(const MaterialParams& p, double u, double v) {
  const double rho = u * u + v * v;
  const double gu = u * (-p.a2() + 2.0 / kSqrt6 * p.b2() * v + p.c2() * rho);
  const double gv = v * (-p.a2() - p.b2() * v / kSqrt6 + p.c2() * rho) + p.b2() * u * u / kSqrt6;
  return {gu, gv};
}

Eigen::Matrix2d bulk_hessian(const MaterialParams& p, double u, double v) {
  const double rho = u * u + v * v;
  const double beta = 2.0 * p.b2() / kSqrt6;
  Eigen::Matrix2d h;
  h(0, 0) = -p.a2() + p.c2() * rho + 2.0 * p.c2() * u * u + beta * v;
  h(0, 1) = 2.0 * p.c2() * u * v + beta * u;
  h(1, 0) = h(0, 1);
  h(1, 1) = -p.a2() + p.c2() * rho + 2.0 * p.c2() * v * v - beta * v;
  return h;
}

}  // namespace nematic
