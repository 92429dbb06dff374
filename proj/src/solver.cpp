#include "nematic/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nematic/analysis.hpp"

namespace nematic {

std::string_view to_string(SolveMethod m) {
  return m == SolveMethod::Newton ? "newton" : "energy_min";
}

std::string_view to_string(BcMode m) {
  return m == BcMode::DirichletConst ? "dirichlet_const" : "asymptotic_corrected";
}

Boundary Boundary::finite(const MaterialParams& p, double R) {
  const auto d = derive_constants(p);
  return {Kind::Finite, R, BcMode::DirichletConst, d.u_inf, d.v_inf};
}

Boundary Boundary::truncated(const MaterialParams& p, double R, BcMode bc) {
  const auto d = derive_constants(p);
  Boundary b{Kind::TruncatedInfinite, R, bc, d.u_inf, d.v_inf};
  if (bc == BcMode::AsymptoticCorrected) {
    const auto [a_u, a_v] = predicted_tail_coeffs(p);
    b.u_outer -= a_u / (R * R);
    b.v_outer -= a_v / (R * R);
  }
  return b;
}

namespace {

void check_samples(const RadialGrid& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != g.size() || v.size() != g.size())
    throw std::invalid_argument("profile samples do not match the grid");
}

// Stencil of the conservative operator at node i: out = lo*f[i-1] + di*f[i] + hi*f[i+1].
struct Stencil {
  double lo, di, hi;
};

Stencil stencil(const RadialGrid& g, Eigen::Index i) {
  const double hi = g.mid(i) / g.h(i) / g.weight(i);
  const double lo = (i == 0) ? 0.0 : g.mid(i - 1) / g.h(i - 1) / g.weight(i);
  return {lo, -(lo + hi), hi};
}

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

Triplets jacobian_triplets(const MaterialParams& p, const RadialGrid& g, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v) {
  const Eigen::Index n = g.size();
  const Eigen::Index last = g.last();
  const double k2 = double(p.k()) * double(p.k());
  Triplets t;
  t.reserve(static_cast<std::size_t>(8 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ru = 2 * i, rv = 2 * i + 1;
    if (i == last) {
      t.emplace_back(ru, ru, 1.0);
      t.emplace_back(rv, rv, 1.0);
      continue;
    }
    const Stencil s = stencil(g, i);
    const Eigen::Matrix2d hess = bulk_hessian(p, u[i], v[i]);
    if (i == 0) {
      t.emplace_back(ru, ru, 1.0);
    } else {
      t.emplace_back(ru, ru - 2, s.lo);
      t.emplace_back(ru, ru, s.di - k2 / (g.r(i) * g.r(i)) - hess(0, 0));
      t.emplace_back(ru, ru + 2, s.hi);
      t.emplace_back(ru, rv, -hess(0, 1));
    }
    if (i > 0) t.emplace_back(rv, rv - 2, s.lo);
    t.emplace_back(rv, rv, s.di - hess(1, 1));
    t.emplace_back(rv, rv + 2, s.hi);
    t.emplace_back(rv, ru, -hess(1, 0));
  }
  return t;
}

Eigen::VectorXd interleave(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x(2 * a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    x[2 * i] = a[i];
    x[2 * i + 1] = b[i];
  }
  return x;
}

bool in_cone(const Eigen::VectorXd& u, const Eigen::VectorXd& v, std::string* detail) {
  const Eigen::Index n = u.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(u[i] > 0.0)) {
      if (detail) *detail = "u <= 0 at node " + std::to_string(i);
      return false;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(v[i] < 0.0)) {
      if (detail) *detail = "v >= 0 at node " + std::to_string(i);
      return false;
    }
  }
  return true;
}

struct NewtonResult {
  Eigen::VectorXd u, v;
  double norm;
};

NewtonResult newton(const MaterialParams& p, const RadialGrid& g, const Boundary& bc,
                    Eigen::VectorXd u, Eigen::VectorXd v, const NewtonOptions& opts) {
  const Eigen::Index n = g.size();
  const double step_tol = 1e-11;
  u[0] = 0.0;
  u[g.last()] = bc.u_outer;
  v[g.last()] = bc.v_outer;

  auto full_norm = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& vv) {
    const auto res = ode_residual(p, g, uu, vv, bc);
    return std::max(res.first.lpNorm<Eigen::Infinity>(), res.second.lpNorm<Eigen::Infinity>());
  };

  auto res = ode_residual(p, g, u, v, bc);
  double norm = std::max(res.first.lpNorm<Eigen::Infinity>(), res.second.lpNorm<Eigen::Infinity>());
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  SpMat jac(2 * n, 2 * n);
  bool pattern_ready = false;

  for (int it = 0; it < opts.max_iter; ++it) {
    const Triplets t = jacobian_triplets(p, g, u, v);
    jac.setFromTriplets(t.begin(), t.end());
    if (!pattern_ready) {
      lu.analyzePattern(jac);
      pattern_ready = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw NoConvergence(it, norm, "singular Jacobian");
    const Eigen::VectorXd dx = lu.solve(-interleave(res.first, res.second));
    const double dx_norm = dx.lpNorm<Eigen::Infinity>();

    const bool polishing = norm <= opts.tol;
    double lambda = 1.0;
    Eigen::VectorXd u_try(n), v_try(n);
    double trial = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving) {
      for (Eigen::Index i = 0; i < n; ++i) {
        u_try[i] = u[i] + lambda * dx[2 * i];
        v_try[i] = v[i] + lambda * dx[2 * i + 1];
      }
      trial = full_norm(u_try, v_try);
      if (polishing) {
        accepted = trial <= std::max(norm, opts.tol);
        break;
      }
      if (std::isfinite(trial) && trial <= (1.0 - 1e-4 * lambda) * norm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (polishing) return {u, v, interior_residual_norm(res)};
      throw NoConvergence(it + 1, norm, "line search failed");
    }
    u = std::move(u_try);
    v = std::move(v_try);
    norm = trial;
    res = ode_residual(p, g, u, v, bc);
    const double scale = 1.0 + std::max(u.lpNorm<Eigen::Infinity>(), v.lpNorm<Eigen::Infinity>());
    if (norm <= opts.tol && lambda * dx_norm <= step_tol * scale) {
      return {u, v, interior_residual_norm(res)};
    }
  }
  if (norm <= opts.tol) return {u, v, interior_residual_norm(res)};
  throw NoConvergence(opts.max_iter, norm);
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> ode_residual(const MaterialParams& p,
                                                         const RadialGrid& g,
                                                         const Eigen::VectorXd& u,
                                                         const Eigen::VectorXd& v,
                                                         const Boundary& bc) {
  check_samples(g, u, v);
  const Eigen::Index n = g.size();
  const double k2 = double(p.k()) * double(p.k());
  Eigen::VectorXd ru(n), rv(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Stencil s = stencil(g, i);
    const Eigen::Vector2d grad = bulk_gradient(p, u[i], v[i]);
    if (i == 0) {
      ru[i] = u[0];
      rv[i] = s.di * v[0] + s.hi * v[1] - grad[1];
    } else {
      const double r2 = g.r(i) * g.r(i);
      ru[i] = s.lo * u[i - 1] + s.di * u[i] + s.hi * u[i + 1] - k2 * u[i] / r2 - grad[0];
      rv[i] = s.lo * v[i - 1] + s.di * v[i] + s.hi * v[i + 1] - grad[1];
    }
  }
  ru[n - 1] = u[n - 1] - bc.u_outer;
  rv[n - 1] = v[n - 1] - bc.v_outer;
  return {std::move(ru), std::move(rv)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ode_residual(const MaterialParams& p,
                                                         const RadialGrid& g,
                                                         const Eigen::VectorXd& u,
                                                         const Eigen::VectorXd& v) {
  return ode_residual(p, g, u, v, Boundary::finite(p, g.radius()));
}

double interior_residual_norm(const std::pair<Eigen::VectorXd, Eigen::VectorXd>& res) {
  const Eigen::Index n = res.first.size();
  double m = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (i > 0) m = std::max(m, std::abs(res.first[i]));
    m = std::max(m, std::abs(res.second[i]));
  }
  return m;
}

Eigen::MatrixXd ode_jacobian_dense(const MaterialParams& p, const RadialGrid& g,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  check_samples(g, u, v);
  const Triplets t = jacobian_triplets(p, g, u, v);
  SpMat jac(2 * g.size(), 2 * g.size());
  jac.setFromTriplets(t.begin(), t.end());
  return Eigen::MatrixXd(jac);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> default_initial_guess(const MaterialParams& p,
                                                                  const RadialGrid& g,
                                                                  const Boundary& bc) {
  const auto d = derive_constants(p);
  const int ak = std::abs(p.k());
  const Eigen::Index n = g.size();
  Eigen::VectorXd u(n), v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = g.r(i);
    u[i] = d.u_inf * std::tanh(r / std::sqrt(2.0)) * std::pow(r / (1.0 + r), ak - 1);
    v[i] = d.v_inf;
  }
  u[0] = 0.0;
  u[n - 1] = bc.u_outer;
  v[n - 1] = bc.v_outer;
  return {std::move(u), std::move(v)};
}

ProfilePair solve_bvp(const MaterialParams& p, const RadialGrid& g, const Boundary& bc,
                      const std::optional<ProfilePair>& init, const NewtonOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  auto attempt = [&](Eigen::VectorXd u0, Eigen::VectorXd v0) {
    return newton(p, g, bc, std::move(u0), std::move(v0), opts);
  };

  std::string detail;
  if (init) {
    check_samples(g, init->u, init->v);
    try {
      NewtonResult r = attempt(init->u, init->v);
      if (in_cone(r.u, r.v, &detail))
        return ProfilePair{g, std::move(r.u), std::move(r.v), p, r.norm, SolveMethod::Newton, bc};
    } catch (const NoConvergence&) {
      // fall through to the default initializer
    }
  }
  auto [u0, v0] = default_initial_guess(p, g, bc);
  NewtonResult r = attempt(std::move(u0), std::move(v0));
  if (!in_cone(r.u, r.v, &detail)) throw SignViolation("converged outside u > 0, v < 0: " + detail);
  return ProfilePair{g, std::move(r.u), std::move(r.v), p, r.norm, SolveMethod::Newton, bc};
}

ProfilePair solve_finite(const MaterialParams& p, const RadialGrid& g,
                         const std::optional<ProfilePair>& init, const NewtonOptions& opts) {
  return solve_bvp(p, g, Boundary::finite(p, g.radius()), init, opts);
}

ProfilePair solve_infinite(const MaterialParams& p, double R_max, Eigen::Index cells,
                           const InfiniteOptions& opts) {
  if (!(R_max >= 50.0)) throw std::invalid_argument("R_max must be at least 50");
  BcMode bc_mode = opts.bc;
  if (p.b_zero()) {
    if (!p.allow_b_zero())
      throw RefusedMode("b2 = 0 has no solution on the infinite domain");
    bc_mode = BcMode::DirichletConst;
  }
  const auto d = derive_constants(p);
  std::optional<ProfilePair> prev;
  for (double fraction : {0.125, 0.25, 0.5, 1.0}) {
    const double R = R_max * fraction;
    RadialGrid g = build_grid(R, cells, Grading::composite());
    const Boundary bc = Boundary::truncated(p, R, bc_mode);
    std::optional<ProfilePair> init;
    if (prev) {
      Eigen::VectorXd u(g.size()), v(g.size());
      double a_u = 0.0, a_v = 0.0;
      if (bc_mode == BcMode::AsymptoticCorrected) std::tie(a_u, a_v) = predicted_tail_coeffs(p);
      const double R_prev = prev->grid.radius();
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double r = g.r(i);
        if (r <= R_prev) {
          u[i] = interpolate(prev->grid, prev->u, r);
          v[i] = interpolate(prev->grid, prev->v, r);
        } else {
          u[i] = d.u_inf - a_u / (r * r);
          v[i] = d.v_inf - a_v / (r * r);
        }
      }
      init = ProfilePair{g, std::move(u), std::move(v), p, 0.0, SolveMethod::Newton, bc};
    }
    try {
      prev = solve_bvp(p, g, bc, init, opts.newton);
    } catch (const NoConvergence& e) {
      std::ostringstream where;
      where << "ladder rung R = " << R;
      throw NoConvergence(e.iterations(), e.last_norm(), where.str());
    }
  }
  return std::move(*prev);
}

}  // namespace nematic
