#include <cmath>
#include <stdexcept>

#include "nematic/solver.hpp"

namespace nematic {

double discrete_energy(const MaterialParams& p, const RadialGrid& g, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v, bool renormalize) {
  if (u.size() != g.size() || v.size() != g.size())
    throw std::invalid_argument("energy: sample count mismatch");
  const double k2 = double(p.k()) * double(p.k());
  double e = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    const double du = u[i + 1] - u[i];
    const double dv = v[i + 1] - v[i];
    e += 0.5 * g.mid(i) * (du * du + dv * dv) / g.h(i);
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double density = bulk_density(p, u[i], v[i]);
    if (i > 0) density += 0.5 * k2 * u[i] * u[i] / (g.r(i) * g.r(i));
    e += g.weight(i) * density;
  }
  if (renormalize) {
    const double R = g.radius();
    e -= derive_constants(p).f_min * 0.5 * R * R;
  }
  return e;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> energy_gradient(const MaterialParams& p,
                                                            const RadialGrid& g,
                                                            const Eigen::VectorXd& u,
                                                            const Eigen::VectorXd& v) {
  const Eigen::Index n = g.size();
  const double k2 = double(p.k()) * double(p.k());
  Eigen::VectorXd gu = Eigen::VectorXd::Zero(n), gv = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double c = g.mid(i) / g.h(i);
    const double fu = c * (u[i + 1] - u[i]);
    const double fv = c * (v[i + 1] - v[i]);
    gu[i] -= fu;
    gu[i + 1] += fu;
    gv[i] -= fv;
    gv[i + 1] += fv;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d b = bulk_gradient(p, u[i], v[i]);
    gu[i] += g.weight(i) * b[0];
    gv[i] += g.weight(i) * b[1];
    if (i > 0) gu[i] += g.weight(i) * k2 * u[i] / (g.r(i) * g.r(i));
  }
  return {std::move(gu), std::move(gv)};
}

namespace {

// Solves the SPD tridiagonal system (sub = super = off) in place on rhs.
void solve_spd_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                           Eigen::VectorXd& rhs) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd c(n), d = diag;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double m = off[i - 1] / d[i - 1];
    d[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= d[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / d[i];
}

// H^1-type metric restricted to the free unknowns [first, last).
struct Preconditioner {
  Eigen::VectorXd diag, off;
  Eigen::Index first, count;

  Preconditioner(const RadialGrid& g, Eigen::Index first_free, double k2, double sigma)
      : first(first_free), count(g.last() - first_free) {
    diag.resize(count);
    off.resize(count > 0 ? count - 1 : 0);
    for (Eigen::Index j = 0; j < count; ++j) {
      const Eigen::Index i = first + j;
      double dd = g.mid(i) / g.h(i) + g.weight(i) * sigma;
      if (i > 0) dd += g.mid(i - 1) / g.h(i - 1) + g.weight(i) * k2 / (g.r(i) * g.r(i));
      diag[j] = dd;
      if (j + 1 < count) off[j] = -g.mid(i) / g.h(i);
    }
  }

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& grad) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grad.size());
    Eigen::VectorXd rhs = grad.segment(first, count);
    solve_spd_tridiagonal(diag, off, rhs);
    out.segment(first, count) = rhs;
    return out;
  }
};

Eigen::VectorXd project_nonpositive(Eigen::VectorXd v) { return v.cwiseMin(0.0); }

double projected_scaled_norm(const RadialGrid& g, const Eigen::VectorXd& gu,
                             const Eigen::VectorXd& gv, const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < g.last(); ++i) {
    if (i > 0) m = std::max(m, std::abs(gu[i]) / g.weight(i));
    // At the constraint v = 0 a negative gradient points out of the set.
    const bool blocked = v[i] >= 0.0 && gv[i] < 0.0;
    if (!blocked) m = std::max(m, std::abs(gv[i]) / g.weight(i));
  }
  return m;
}

}  // namespace

ProfilePair minimize_energy(const MaterialParams& p, const RadialGrid& g, const ProfilePair& init,
                            const StepRule& rule, double tol) {
  if (init.u.size() != g.size() || init.v.size() != g.size())
    throw std::invalid_argument("minimize_energy: init does not match grid");
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_energy: tol must be positive");
  const auto d = derive_constants(p);
  const double k2 = double(p.k()) * double(p.k());
  const double sigma = p.a2() + p.c2() * d.s_plus * d.s_plus;
  const Preconditioner pre_u(g, 1, k2, sigma);
  const Preconditioner pre_v(g, 0, 0.0, sigma);

  Eigen::VectorXd u = init.u;
  Eigen::VectorXd v = project_nonpositive(init.v);
  u[0] = 0.0;
  double energy = discrete_energy(p, g, u, v);
  auto grad = energy_gradient(p, g, u, v);
  double pg = projected_scaled_norm(g, grad.first, grad.second, v);

  int it = 0;
  for (; it < rule.max_iter && pg > tol; ++it) {
    const Eigen::VectorXd du = -pre_u.apply_inverse(grad.first);
    const Eigen::VectorXd dv = -pre_v.apply_inverse(grad.second);
    double step = rule.initial_step;
    bool accepted = false;
    for (int b = 0; b <= rule.max_backtracks; ++b) {
      const Eigen::VectorXd u_try = u + step * du;
      const Eigen::VectorXd v_try = project_nonpositive(v + step * dv);
      const double e_try = discrete_energy(p, g, u_try, v_try);
      const double predicted = grad.first.dot(u_try - u) + grad.second.dot(v_try - v);
      if (e_try <= energy + rule.sufficient_decrease * predicted) {
        u = u_try;
        v = v_try;
        energy = e_try;
        accepted = true;
        break;
      }
      step *= rule.shrink;
    }
    if (!accepted) break;
    grad = energy_gradient(p, g, u, v);
    pg = projected_scaled_norm(g, grad.first, grad.second, v);
  }
  if (pg > tol) throw NoConvergence(it, pg, "projected gradient descent");

  Boundary bc = init.boundary;
  bc.u_outer = u[g.last()];
  bc.v_outer = v[g.last()];
  return ProfilePair{g, std::move(u), std::move(v), p, pg, SolveMethod::EnergyMin, bc};
}

}  // namespace nematic
