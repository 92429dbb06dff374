#include "nematic/stability.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nematic/errors.hpp"

namespace nematic {

namespace {
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);
constexpr double kPi = std::numbers::pi;

void check_compact(const ProfilePair& profile, const Eigen::VectorXd& f, const char* what) {
  if (f.size() != profile.grid.size())
    throw std::invalid_argument(std::string(what) + ": sample count does not match the grid");
  if (f[0] != 0.0 || f[profile.grid.last()] != 0.0)
    throw SupportViolation(std::string(what) + ": perturbation must vanish at r = 0 and r = R");
}

// -(b2/sqrt2)(u + sqrt3 v)
double coupling_potential(const MaterialParams& p, double u, double v) {
  return -p.b2() / kSqrt2 * (u + kSqrt3 * v);
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

int parity_constant(int k) { return (k % 2 != 0) ? 1 : 0; }

double w_form(const ProfilePair& profile, const Eigen::VectorXd& w, const FormOptions& opts) {
  check_compact(profile, w, "w_form");
  const RadialGrid& g = profile.grid;
  const MaterialParams& p = profile.params;
  const int k = opts.k.value_or(p.k());
  const double coeff = (double(k) * k + parity_constant(k)) / 4.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    const double dw = w[i + 1] - w[i];
    total += g.mid(i) * dw * dw / g.h(i);
  }
  for (Eigen::Index i = 1; i < g.last(); ++i) {
    const double r = g.r(i);
    double pot = coeff / (r * r);
    if (opts.potential) {
      const double u = profile.u[i], v = profile.v[i];
      pot += -p.a2() + 2.0 / kSqrt6 * p.b2() * v + p.c2() * (u * u + v * v) +
             coupling_potential(p, u, v);
    }
    total += g.weight(i) * pot * w[i] * w[i];
  }
  return total;
}

double xi_form(const ProfilePair& profile, const Eigen::VectorXd& xi, const FormOptions& opts) {
  check_compact(profile, xi, "xi_form");
  const RadialGrid& g = profile.grid;
  const MaterialParams& p = profile.params;
  const int k = opts.k.value_or(p.k());
  const double hardy = (3.0 * double(k) * k - parity_constant(k)) / 4.0;
  const auto& u = profile.u;
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    const double um = opts.unit_weight ? 1.0 : 0.5 * (u[i] + u[i + 1]);
    const double d = xi[i + 1] - xi[i];
    total += g.mid(i) * um * um * d * d / g.h(i);
  }
  for (Eigen::Index i = 1; i < g.last(); ++i) {
    const double r = g.r(i);
    const double weight = opts.unit_weight ? 1.0 : u[i] * u[i];
    double pot = -hardy / (r * r);
    if (opts.potential) pot += coupling_potential(p, u[i], profile.v[i]);
    total += g.weight(i) * weight * pot * xi[i] * xi[i];
  }
  return total;
}

TestFamily TestFamily::log_sine(int n) {
  if (n < 0) throw std::invalid_argument("log_sine: n must be nonnegative");
  TestFamily f;
  f.kind = Kind::LogSine;
  f.n = n;
  f.omega = 0.5;
  f.r_a = std::exp(2.0 * n * kPi);
  return f;
}

TestFamily TestFamily::rescaled(double omega, double r_a) {
  if (!(omega > 0.0) || !(r_a > 0.0))
    throw std::invalid_argument("rescaled log-sine: omega and r_a must be positive");
  TestFamily f;
  f.kind = Kind::RescaledLogSine;
  f.omega = omega;
  f.r_a = r_a;
  return f;
}

TestFamily TestFamily::spanning(double r_a, double r_b) {
  if (!(r_a > 0.0) || !(r_b > r_a)) throw std::invalid_argument("spanning: need 0 < r_a < r_b");
  return rescaled(kPi / std::log(r_b / r_a), r_a);
}

TestFamily TestFamily::bump(double center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("bump: width must be positive");
  TestFamily f;
  f.kind = Kind::Bump;
  f.center = center;
  f.width = width;
  return f;
}

std::pair<double, double> TestFamily::support() const {
  switch (kind) {
    case Kind::LogSine:
      return {std::exp(2.0 * n * kPi), std::exp(2.0 * (n + 1) * kPi)};
    case Kind::RescaledLogSine:
      return {r_a, r_a * std::exp(kPi / omega)};
    case Kind::Bump:
      return {center - width, center + width};
  }
  return {0.0, 0.0};
}

std::string TestFamily::id() const {
  switch (kind) {
    case Kind::LogSine:
      return "log_sine(n=" + std::to_string(n) + ")";
    case Kind::RescaledLogSine:
      return "rescaled_log_sine(omega=" + format_number(omega) + ",r_a=" + format_number(r_a) + ")";
    case Kind::Bump:
      return "bump(center=" + format_number(center) + ",width=" + format_number(width) + ")";
  }
  return "unknown";
}

Eigen::VectorXd test_function(const RadialGrid& g, const TestFamily& family, double smoothing) {
  const auto [lo, hi] = family.support();
  if (!(lo > 0.0) || hi > g.radius() * (1.0 + 1e-12))
    throw SupportViolation("test function support [" + format_number(lo) + ", " +
                           format_number(hi) + "] is not inside (0, R]");
  if (smoothing < 0.0 || smoothing > 0.5 * (hi - lo))
    throw std::invalid_argument("smoothing length must lie in [0, half the support]");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    if (r <= lo * (1.0 + 1e-12) || r >= hi * (1.0 - 1e-12)) continue;
    double value = 0.0;
    if (family.kind == TestFamily::Kind::Bump) {
      const double s = (r - family.center) / family.width;
      value = std::exp(1.0 - 1.0 / (1.0 - s * s));
    } else if (family.kind == TestFamily::Kind::LogSine) {
      value = std::sin((std::log(r) - 2.0 * family.n * kPi) / 2.0);
    } else {
      value = std::sin(family.omega * std::log(r / family.r_a));
    }
    if (smoothing > 0.0) value *= smooth_step((r - lo) / smoothing) * smooth_step((hi - r) / smoothing);
    out[i] = value;
  }
  return out;
}

Eigen::VectorXd random_test_function(const RadialGrid& g, double r_a, double r_b,
                                     std::mt19937_64& rng) {
  const double span = r_b - r_a;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = span * (0.15 + 0.3 * unit(rng));
  const double center = r_a + width + (span - 2.0 * width) * unit(rng);
  const double amplitude = 0.5 + 1.5 * unit(rng);
  const double freq = 1.0 + 2.0 * unit(rng);
  const double phase = 2.0 * kPi * unit(rng);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i = 1; i < g.last(); ++i) {
    const double s = (g.r(i) - center) / width;
    if (std::abs(s) >= 1.0) continue;
    out[i] = amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s)) *
             (1.0 + 0.3 * std::sin(freq * kPi * s + phase));
  }
  return out;
}

double hardy_identity_error(const ProfilePair& profile, double r_a, double r_b, int count,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int j = 0; j < count; ++j) {
    const Eigen::VectorXd xi = random_test_function(profile.grid, r_a, r_b, rng);
    const Eigen::VectorXd w = profile.u.cwiseProduct(xi);
    const double a = w_form(profile, w);
    const double b = xi_form(profile, xi);
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
  }
  return worst;
}

Support default_support(int k, double R_max) {
  const double gamma = (double(k) * k - parity_constant(k)) / 4.0;
  if (gamma <= 0.0) return {0.25 * R_max, R_max};
  return {R_max * std::exp(-1.2 * kPi / std::sqrt(gamma)), R_max};
}

ReducedOperator reduced_xi_operator(const ProfilePair& profile, Support support) {
  const RadialGrid& g = profile.grid;
  const MaterialParams& p = profile.params;
  if (!(support.r_a > 0.0) || !(support.r_b > support.r_a) ||
      support.r_b > g.radius() * (1.0 + 1e-12))
    throw SupportViolation("support must satisfy 0 < r_a < r_b <= R_max");
  Eigen::Index first = g.lower_bound(support.r_a);
  while (first < g.size() && g.r(first) <= support.r_a) ++first;
  Eigen::Index end = first;
  while (end < g.last() && g.r(end) < support.r_b * (1.0 - 1e-12)) ++end;
  const Eigen::Index m = end - first;
  if (m < 30) throw std::invalid_argument("support too coarse: fewer than 30 interior nodes");

  const auto& u = profile.u;
  const double hardy = (3.0 * double(p.k()) * p.k() - parity_constant(p.k())) / 4.0;
  ReducedOperator op;
  op.first = first;
  op.diag = Eigen::VectorXd::Zero(m);
  op.off = Eigen::VectorXd::Zero(m - 1);
  op.mass.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index i = first + j;
    const double r = g.r(i);
    if (!(u[i] > 0.0)) throw std::domain_error("profile u must be positive on the support");
    op.mass[j] = g.weight(i) * u[i] * u[i];
    op.diag[j] = op.mass[j] * (-hardy / (r * r) + coupling_potential(p, u[i], profile.v[i]));
  }
  // Every cell with at least one unknown endpoint contributes its gradient energy.
  for (Eigen::Index i = first - 1; i < end; ++i) {
    const double um = 0.5 * (u[i] + u[i + 1]);
    const double c = g.mid(i) * um * um / g.h(i);
    const Eigen::Index a = i - first, b = i + 1 - first;
    if (a >= 0) op.diag[a] += c;
    if (b < m) op.diag[b] += c;
    if (a >= 0 && b < m) op.off[a] -= c;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    op.diag[j] /= op.mass[j];
    if (j + 1 < m) op.off[j] /= std::sqrt(op.mass[j] * op.mass[j + 1]);
  }
  return op;
}

namespace {

// Number of eigenvalues strictly below x.
Eigen::Index sturm_count(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double x) {
  const double tiny = std::numeric_limits<double>::min();
  Eigen::Index count = 0;
  double d = diag[0] - x;
  if (d < 0.0) ++count;
  for (Eigen::Index i = 1; i < diag.size(); ++i) {
    if (d == 0.0) d = tiny;
    d = diag[i] - x - off[i - 1] * off[i - 1] / d;
    if (d < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift I) x = rhs in place; returns false if a pivot is not positive.
bool shifted_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double shift,
                   Eigen::VectorXd& rhs) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d(n);
  d[0] = diag[0] - shift;
  if (!(d[0] > 0.0)) return false;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double l = off[i - 1] / d[i - 1];
    d[i] = diag[i] - shift - l * off[i - 1];
    if (!(d[i] > 0.0)) return false;
    rhs[i] -= l * rhs[i - 1];
  }
  rhs[n - 1] /= d[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / d[i];
  return true;
}

double tridiagonal_quotient(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                            const Eigen::VectorXd& y) {
  double num = diag.cwiseProduct(y).cwiseProduct(y).sum();
  for (Eigen::Index i = 0; i + 1 < y.size(); ++i) num += 2.0 * off[i] * y[i] * y[i + 1];
  return num / y.squaredNorm();
}

}  // namespace

StabilityReport minimize_rayleigh(const ProfilePair& profile, Support support,
                                  const RayleighOptions& opts) {
  if (profile.boundary.kind != Boundary::Kind::TruncatedInfinite)
    throw std::invalid_argument("minimize_rayleigh needs a truncated-infinite profile");
  const ReducedOperator op = reduced_xi_operator(profile, support);
  const Eigen::Index m = op.diag.size();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double radius = (j > 0 ? std::abs(op.off[j - 1]) : 0.0) + (j + 1 < m ? std::abs(op.off[j]) : 0.0);
    lo = std::min(lo, op.diag[j] - radius);
    hi = std::max(hi, op.diag[j] + radius);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  // Bracket the lowest eigenvalue: count(lo) = 0 and count(hi) >= 1.
  for (int it = 0; it < 300 && hi - lo > 1e-15 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(op.diag, op.off, mid) >= 1) hi = mid;
    else lo = mid;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Ones(m) / std::sqrt(double(m));
  double shift = lo - std::max(hi - lo, 1e-14 * scale);
  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd z = y;
    if (!shifted_solve(op.diag, op.off, shift, z)) {
      shift -= std::max(1e-12 * scale, 2.0 * (hi - lo));
      continue;
    }
    z.normalize();
    if (z.dot(y) < 0.0) z = -z;
    const double change = (z - y).lpNorm<Eigen::Infinity>();
    y = std::move(z);
    if (change < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence(50, 0.0, "inverse iteration");
  lambda = tridiagonal_quotient(op.diag, op.off, y);

  const RadialGrid& g = profile.grid;
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(g.size());
  Eigen::Index peak = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    xi[op.first + j] = y[j] / std::sqrt(op.mass[j]);
    if (std::abs(y[j]) > std::abs(y[peak])) peak = j;
  }
  if (y[peak] < 0.0) xi = -xi;

  StabilityReport rep;
  rep.k = profile.params.k();
  rep.c_k = parity_constant(rep.k);
  rep.support = support;
  rep.support_nodes = static_cast<int>(m);
  rep.min_rayleigh = lambda;
  rep.tolerance = opts.tolerance;
  rep.certificate_form_value = xi_form(profile, xi);
  if (lambda < -opts.tolerance) rep.certificate = xi;
  rep.radii = g.nodes();
  rep.open_question = std::abs(rep.k) == 1;
  rep.hardy_identity_error =
      hardy_identity_error(profile, support.r_a, support.r_b, opts.hardy_samples, opts.seed);

  std::vector<TestFamily> families{
      TestFamily::spanning(support.r_a, support.r_b),
      TestFamily::bump(0.5 * (support.r_a + support.r_b), 0.5 * (support.r_b - support.r_a))};
  if (TestFamily::log_sine(0).support().second <= g.radius()) families.push_back(TestFamily::log_sine(0));
  for (const auto& f : families) {
    rep.form_values[f.id()] = xi_form(profile, test_function(g, f));
  }
  return rep;
}

}  // namespace nematic
