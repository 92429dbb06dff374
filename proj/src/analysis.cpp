#include "nematic/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nematic {

namespace {
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);
const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Tracker {
  BoundRecord rec;
  explicit Tracker(std::string name) {
    rec.name = std::move(name);
    rec.worst_violation = -std::numeric_limits<double>::infinity();
  }
  void add(double violation, double r) {
    if (violation > rec.worst_violation) {
      rec.worst_violation = violation;
      rec.worst_location = r;
    }
  }
  BoundRecord finish(double tol) {
    rec.satisfied = rec.worst_violation <= tol;
    return rec;
  }
};
}  // namespace

bool BoundsReport::all_satisfied() const {
  for (const auto& b : bounds)
    if (!b.satisfied) return false;
  return true;
}

const BoundRecord& BoundsReport::get(const std::string& name) const {
  for (const auto& b : bounds)
    if (b.name == name) return b;
  throw std::out_of_range("no bound named " + name);
}

BoundsReport verify_bounds(const ProfilePair& profile, double tol,
                           std::optional<RegimeTag> expected) {
  const MaterialParams& p = profile.params;
  const Regime regime = classify_regime(p);
  if (expected && *expected != regime.tag) {
    throw RegimeMismatch("profile regime " + std::string(to_string(regime.tag)) +
                         " does not match requested " + std::string(to_string(*expected)));
  }
  const auto d = derive_constants(p);
  const RadialGrid& g = profile.grid;
  const auto& u = profile.u;
  const auto& v = profile.v;
  const Eigen::Index last = g.last();

  Tracker positivity("POSITIVITY"), negativity("NEGATIVITY"), cone("CONE"), ball("BALL"),
      window("V_WINDOW"), upper("U_UPPER"), comparison("COMPARISON");

  const double v_plus = -d.s_plus / kSqrt6;             // -s+/sqrt6
  const double v_minus = std::sqrt(2.0 / 3.0) * d.s_minus;  // sqrt(2/3) s-
  const double ball_r2 = 2.0 / 3.0 * d.s_plus * d.s_plus;

  std::optional<Eigen::VectorXd> lower;
  if (regime.tag == RegimeTag::Supercritical || regime.tag == RegimeTag::Critical) {
    lower = solve_scalar(p, g, ScalarKind::UI).w;
  } else if (regime.tag == RegimeTag::Subcritical) {
    lower = solve_scalar(p, g, ScalarKind::UIII).w;
  }

  for (Eigen::Index i = 0; i < last; ++i) {
    const double r = g.r(i);
    if (i > 0) positivity.add(-u[i], r);
    negativity.add(v[i], r);
    cone.add(u[i] + kSqrt3 * v[i], r);
    ball.add(u[i] * u[i] + v[i] * v[i] - ball_r2, r);
    upper.add(u[i] - d.u_inf, r);
    switch (regime.tag) {
      case RegimeTag::Supercritical:
        window.add(std::max(v_plus - v[i], v[i] - v_minus), r);
        break;
      case RegimeTag::Critical:
        window.add(std::abs(v[i] - v_plus), r);
        break;
      case RegimeTag::Subcritical:
      case RegimeTag::BZero:
        window.add(std::max(v_minus - v[i], v[i] - v_plus), r);
        break;
    }
    if (lower) comparison.add((*lower)[i] - u[i], r);
  }

  BoundsReport report{regime.tag, tol, {}};
  report.bounds.push_back(positivity.finish(tol));
  report.bounds.push_back(negativity.finish(tol));
  report.bounds.push_back(cone.finish(tol));
  report.bounds.push_back(ball.finish(tol));
  report.bounds.push_back(window.finish(tol));
  report.bounds.push_back(upper.finish(tol));
  if (lower) {
    report.bounds.push_back(comparison.finish(tol));
  } else {
    BoundRecord na{"COMPARISON", false, true, kNaN, kNaN};
    report.bounds.push_back(na);
  }
  return report;
}

std::pair<double, double> predicted_tail_coeffs(const MaterialParams& p) {
  if (p.b_zero()) throw std::invalid_argument("tail coefficients are undefined for b2 = 0");
  const auto d = derive_constants(p);
  const double k2 = double(p.k()) * double(p.k());
  const double b2 = p.b2();
  const double cs = p.c2() * d.s_plus;
  const double denom = b2 * (-b2 + 4.0 * cs);
  const double a_u = kSqrt2 * k2 / 2.0 * (2.0 * b2 + cs) / denom;
  const double a_v = kSqrt6 * k2 / 2.0 * (-b2 + cs) / denom;
  return {a_u, a_v};
}

double boundary_layer_width(const MaterialParams& p) {
  const auto d = derive_constants(p);
  const double s = d.s_plus;
  const double mass_x = p.b2() * s;
  const double mass_y = (4.0 * p.c2() * s * s - p.b2() * s) / 3.0;
  const double m = p.b_zero() ? mass_y : std::min(mass_x, mass_y);
  return 12.0 / std::sqrt(m);
}

double loglog_decay_order(const std::vector<double>& r, const std::vector<double>& y,
                          double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double a = std::abs(y[i]);
    if (!(a > floor)) continue;
    const double lx = std::log(r[i]);
    const double ly = std::log(a);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 3) return kNaN;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

namespace {

// Node weights for a continuous L2(dr) fit over the selected nodes.
Eigen::VectorXd spacing_weights(const RadialGrid& g, Eigen::Index first, Eigen::Index count) {
  Eigen::VectorXd w(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index i = first + j;
    const double left = (j == 0) ? 0.0 : g.r(i) - g.r(i - 1);
    const double right = (j + 1 == count) ? 0.0 : g.r(i + 1) - g.r(i);
    w[j] = 0.5 * (left + right);
  }
  if (count == 1) w[0] = 1.0;
  return w;
}

// Returns (const, coeff) with y ~ const - coeff r^-2, and the max fit residual.
struct TwoTermFit {
  double c0, coeff, max_residual;
};

TwoTermFit fit_two_term(const RadialGrid& g, const Eigen::VectorXd& y, Eigen::Index first,
                        Eigen::Index count) {
  const Eigen::VectorXd w = spacing_weights(g, first, count);
  const double r_ref = g.r(first);
  Eigen::MatrixXd a(count, 2);
  Eigen::VectorXd b(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const double r = g.r(first + j);
    const double sw = std::sqrt(w[j]);
    a(j, 0) = sw;
    a(j, 1) = sw * (r_ref * r_ref) / (r * r);
    b[j] = sw * y[first + j];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  TwoTermFit fit{c[0], -c[1] * r_ref * r_ref, 0.0};
  for (Eigen::Index j = 0; j < count; ++j) {
    const double r = g.r(first + j);
    fit.max_residual =
        std::max(fit.max_residual, std::abs(y[first + j] - (fit.c0 - fit.coeff / (r * r))));
  }
  return fit;
}

std::pair<Eigen::Index, Eigen::Index> window_nodes(const RadialGrid& g, double lo, double hi) {
  const Eigen::Index first = g.lower_bound(lo);
  Eigen::Index end = first;
  while (end < g.size() && g.r(end) <= hi) ++end;
  return {first, end - first};
}

double relative_error(double fitted, double predicted) {
  if (!std::isfinite(predicted) || predicted == 0.0) return kNaN;
  return std::abs(fitted - predicted) / std::abs(predicted);
}

// Upper radius for order estimates: stays clear of the truncation layer at R.
double order_window_end(const ProfilePair& profile, double hi) {
  if (profile.boundary.kind != Boundary::Kind::TruncatedInfinite) return hi;
  const double R = profile.grid.radius();
  const double layer = std::min(boundary_layer_width(profile.params), 0.25 * R);
  return std::min(hi, R - layer);
}

}  // namespace

TailFit fit_tail(const ProfilePair& profile, double r_lo, double r_hi) {
  const RadialGrid& g = profile.grid;
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || r_hi > g.radius() * (1.0 + 1e-12))
    throw std::invalid_argument("tail window must lie inside (0, R]");
  const auto [first, count] = window_nodes(g, r_lo, r_hi);
  if (count < 20) throw std::invalid_argument("tail window holds fewer than 20 nodes");

  TailFit t;
  t.r_lo = r_lo;
  t.r_hi = r_hi;
  t.nodes = static_cast<int>(count);
  const TwoTermFit fu = fit_two_term(g, profile.u, first, count);
  const TwoTermFit fv = fit_two_term(g, profile.v, first, count);
  t.fitted_u_const = fu.c0;
  t.fitted_u_coeff = fu.coeff;
  t.fitted_v_const = fv.c0;
  t.fitted_v_coeff = fv.coeff;
  t.fit_residual_u = fu.max_residual;
  t.fit_residual_v = fv.max_residual;
  t.v_to_u_coeff_ratio = std::abs(fv.coeff) / std::abs(fu.coeff);

  if (profile.params.b_zero()) {
    t.predicted_u_coeff = t.predicted_v_coeff = kNaN;
    t.rel_err_u = t.rel_err_v = kNaN;
    t.remainder_order_estimate = kNaN;
    return t;
  }
  const auto [a_u, a_v] = predicted_tail_coeffs(profile.params);
  t.predicted_u_coeff = a_u;
  t.predicted_v_coeff = a_v;
  t.rel_err_u = relative_error(fu.coeff, a_u);
  t.rel_err_v = relative_error(fv.coeff, a_v);

  const auto d = derive_constants(profile.params);
  const double end = order_window_end(profile, r_hi);
  std::vector<double> rs, rem;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index i = first + j;
    const double r = g.r(i);
    if (r > end) break;
    const double inv2 = 1.0 / (r * r);
    rs.push_back(r);
    rem.push_back(std::abs(profile.u[i] - d.u_inf + a_u * inv2) +
                  std::abs(profile.v[i] - d.v_inf + a_v * inv2));
  }
  t.remainder_order_estimate = loglog_decay_order(rs, rem);
  return t;
}

DecoupledTailReport decoupled_tail_check(const ProfilePair& profile) {
  if (profile.boundary.kind != Boundary::Kind::TruncatedInfinite)
    throw std::invalid_argument("decoupled tail check needs a truncated-infinite profile");
  const MaterialParams& p = profile.params;
  if (p.b_zero()) throw std::invalid_argument("decoupled tail check is undefined for b2 = 0");
  const RadialGrid& g = profile.grid;
  const double R = g.radius();
  const auto [first, count] = window_nodes(g, 0.5 * R, R);
  if (count < 20) throw std::invalid_argument("insufficient tail resolution");

  const auto d = derive_constants(p);
  const double k2 = double(p.k()) * double(p.k());
  DecoupledTailReport rep;
  rep.r_lo = 0.5 * R;
  rep.r_hi = R;
  rep.x_coeff_predicted = k2 / (kSqrt2 * p.b2());
  rep.y_coeff_predicted = 3.0 * kSqrt3 * k2 / (kSqrt2 * (4.0 * p.c2() * d.s_plus - p.b2()));

  Eigen::VectorXd x(g.size()), y(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double uh = profile.u[i] - d.u_inf;
    const double vh = profile.v[i] - d.v_inf;
    x[i] = uh + kSqrt3 * vh;
    y[i] = kSqrt3 * uh - vh;
  }
  rep.x_coeff_fitted = fit_two_term(g, x, first, count).coeff;
  rep.y_coeff_fitted = fit_two_term(g, y, first, count).coeff;

  const double end = order_window_end(profile, R);
  std::vector<double> rs, xb, yb;
  double dev = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index i = first + j;
    const double r = g.r(i);
    if (x[i] != 0.0) dev = std::max(dev, std::abs(y[i] / x[i] - kSqrt3));
    if (r > end) continue;
    const double inv2 = 1.0 / (r * r);
    rs.push_back(r);
    xb.push_back(x[i] + rep.x_coeff_predicted * inv2);
    yb.push_back(y[i] + rep.y_coeff_predicted * inv2);
  }
  rep.x_bar_order = loglog_decay_order(rs, xb);
  rep.y_bar_order = loglog_decay_order(rs, yb);
  rep.y_over_x_max_deviation = dev;
  return rep;
}

}  // namespace nematic
