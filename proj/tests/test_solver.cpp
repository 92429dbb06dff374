#include <doctest.h>

#include <cmath>
#include <random>

#include "nematic/analysis.hpp"
#include "nematic/solver.hpp"

using namespace nematic;

namespace {
const double kSqrt3 = std::sqrt(3.0);

double max_abs(const Eigen::VectorXd& x) { return x.cwiseAbs().maxCoeff(); }

// Independent evaluation of the interior residual through the grid operator and the bulk gradient.
double reference_residual(const ProfilePair& pr) {
  const auto& g = pr.grid;
  const double k2 = double(pr.params.k()) * pr.params.k();
  const Eigen::VectorXd lu = apply_radial_laplacian(g, pr.u, 0);
  const Eigen::VectorXd lv = apply_radial_laplacian(g, pr.v, 0);
  double worst = 0.0;
  for (Eigen::Index i = 1; i < g.last(); ++i) {
    const Eigen::Vector2d b = bulk_gradient(pr.params, pr.u[i], pr.v[i]);
    worst = std::max(worst, std::abs(lu[i] - k2 * pr.u[i] / (g.r(i) * g.r(i)) - b[0]));
    worst = std::max(worst, std::abs(lv[i] - b[1]));
  }
  return worst;
}

Eigen::VectorXd bump(const RadialGrid& g, double c, double w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double s = (g.r(i) - c) / w;
    if (std::abs(s) < 1) out[i] = std::exp(1 - 1 / (1 - s * s));
  }
  return out;
}
}  // namespace

TEST_CASE("residual vanishes identically for the critical constant state with u = 0") {
  const MaterialParams p(1, kSqrt3, 1, 1);
  const auto d = derive_constants(p);
  const RadialGrid g = build_grid(10.0, 200, Grading::composite());
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(g.size());
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(g.size(), d.v_inf);
  const auto res = ode_residual(p, g, u, v);
  CHECK(max_abs(res.first.segment(1, g.size() - 2)) == 0.0);
  CHECK(max_abs(res.second.segment(0, g.size() - 1)) <= 1e-11);
}

TEST_CASE("residual of the far-field constants is -k^2 u_inf / r^2") {
  for (int k : {1, 2, 3}) {
    const MaterialParams p(1, 1, 1, k);
    const auto d = derive_constants(p);
    const RadialGrid g = build_grid(10.0, 100, Grading::composite());
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(g.size(), d.u_inf);
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(g.size(), d.v_inf);
    const auto res = ode_residual(p, g, u, v);
    for (Eigen::Index i = 1; i < g.last(); ++i) {
      const double expect = -double(k * k) * d.u_inf / (g.r(i) * g.r(i));
      CHECK(res.first[i] == doctest::Approx(expect).epsilon(1e-12));
      CHECK(std::abs(res.second[i]) <= 1e-11);
    }
  }
}

TEST_CASE("critical regime: v = v_inf and u = u_II solve the discrete system") {
  const MaterialParams p(1, kSqrt3, 1, 1);
  const auto d = derive_constants(p);
  const RadialGrid g = build_grid(20.0, 400, Grading::composite());
  const ScalarProfile s = solve_scalar(p, g, ScalarKind::UII);
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(g.size(), d.v_inf);
  CHECK(interior_residual_norm(ode_residual(p, g, s.w, v)) <= 1e-8);
}

TEST_CASE("analytic Jacobian matches finite differences") {
  for (int k : {1, 2}) {
    const MaterialParams p(1, 3, 1.5, k);
    const RadialGrid g = build_grid(6.0, 24, Grading::composite());
    const Eigen::Index n = g.size();
    Eigen::VectorXd u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = g.r(i);
      u[i] = 0.9 * std::tanh(r) + 0.1 * std::sin(2 * r);
      v[i] = -0.5 - 0.2 * std::cos(r);
    }
    const Eigen::MatrixXd J = ode_jacobian_dense(p, g, u, v);
    REQUIRE(J.rows() == 2 * n);
    const double h = 1e-6;
    for (Eigen::Index col = 0; col < 2 * n; ++col) {
      Eigen::VectorXd up = u, um = u, vp = v, vm = v;
      if (col % 2 == 0) {
        up[col / 2] += h;
        um[col / 2] -= h;
      } else {
        vp[col / 2] += h;
        vm[col / 2] -= h;
      }
      const auto rp = ode_residual(p, g, up, vp);
      const auto rm = ode_residual(p, g, um, vm);
      for (Eigen::Index row = 0; row < n; ++row) {
        const double fu = (rp.first[row] - rm.first[row]) / (2 * h);
        const double fv = (rp.second[row] - rm.second[row]) / (2 * h);
        const double su = 1.0 + std::abs(J(2 * row, col));
        const double sv = 1.0 + std::abs(J(2 * row + 1, col));
        CHECK(std::abs(J(2 * row, col) - fu) <= 1e-5 * su);
        CHECK(std::abs(J(2 * row + 1, col) - fv) <= 1e-5 * sv);
      }
    }
  }
}

TEST_CASE("finite solve, critical parameters") {
  const MaterialParams p(1, kSqrt3, 1, 1);
  const RadialGrid g = build_grid(20.0, 800, Grading::composite());
  const ProfilePair pr = solve_finite(p, g);
  CHECK(pr.residual_norm <= 1e-8);
  CHECK((pr.v.array() + 1.0 / std::sqrt(2.0)).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("finite solve, subcritical parameters: residual and bounds") {
  const MaterialParams p(1, 1, 1, 1);
  const RadialGrid g = build_grid(20.0, 800, Grading::composite());
  const ProfilePair pr = solve_finite(p, g);
  CHECK(pr.method == SolveMethod::Newton);
  CHECK(pr.u[0] == 0.0);
  const auto d = derive_constants(p);
  CHECK(pr.u[g.last()] == d.u_inf);
  CHECK(pr.v[g.last()] == d.v_inf);
  CHECK(pr.residual_norm <= 1e-8);
  CHECK(reference_residual(pr) <= 1e-8);
  CHECK(verify_bounds(pr, 1e-6).all_satisfied());
}

TEST_CASE("finite solve is deterministic") {
  const MaterialParams p(1, 3, 1, 2);
  const RadialGrid g = build_grid(15.0, 300, Grading::composite());
  const ProfilePair a = solve_finite(p, g);
  const ProfilePair b = solve_finite(p, g);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.residual_norm == b.residual_norm);
}

TEST_CASE("small domain: random initializations reach the same solution") {
  const MaterialParams p(1, 1, 1, 1);
  const RadialGrid g = build_grid(0.2, 200, Grading::uniform());
  const auto d = derive_constants(p);
  const ProfilePair ref = solve_finite(p, g);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(g.size()), v(g.size());
    const double a = unit(rng), b = unit(rng), c = unit(rng);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double s = g.r(i) / 0.2;
      u[i] = d.u_inf * s * (0.5 + a * std::sin(3 * s) * std::sin(3 * s) + b);
      v[i] = d.v_inf * (0.2 + 1.5 * c * (1 - s) + s);
    }
    u[g.last()] = d.u_inf;
    v[g.last()] = d.v_inf;
    const ProfilePair init{g, u, v, p, 0.0, SolveMethod::Newton, Boundary::finite(p, 0.2)};
    const ProfilePair out = solve_finite(p, g, init);
    CHECK(max_abs(out.u - ref.u) <= 1e-8);
    CHECK(max_abs(out.v - ref.v) <= 1e-8);
  }
}

TEST_CASE("an initializer outside the sign cone falls back to the default start") {
  const MaterialParams p(1, 1, 1, 2);
  const RadialGrid g = build_grid(10.0, 200, Grading::composite());
  const auto d = derive_constants(p);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(g.size(), -0.3);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(g.size(), 0.4);
  u[0] = 0.0;
  u[g.last()] = d.u_inf;
  v[g.last()] = d.v_inf;
  const ProfilePair out =
      solve_finite(p, g, ProfilePair{g, u, v, p, 0.0, SolveMethod::Newton, Boundary::finite(p, 10.0)});
  CHECK(out.u.segment(1, g.size() - 1).minCoeff() > 0.0);
  CHECK(out.v.maxCoeff() < 0.0);
}

TEST_CASE("Newton reports non-convergence with its budget") {
  const MaterialParams p(1, 1, 1, 3);
  const RadialGrid g = build_grid(20.0, 400, Grading::composite());
  try {
    solve_finite(p, g, std::nullopt, NewtonOptions{1e-12, 1});
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_norm() > 1e-12);
  }
}

TEST_CASE("discrete energy matches an independent quadrature") {
  const MaterialParams p(1.3, 0.7, 2.1, 2);
  const RadialGrid g = build_grid(8.0, 150, Grading::composite());
  CHECK(discrete_energy(p, g, Eigen::VectorXd::Zero(g.size()), Eigen::VectorXd::Zero(g.size())) == 0.0);

  Eigen::VectorXd u(g.size()), v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    u[i] = 0.8 * r * r / (1 + r * r) + 0.05 * std::sin(r);
    v[i] = -0.4 - 0.1 * std::cos(0.7 * r);
  }
  // Node weights rebuilt from cell midpoints: w_i = (m_i^2 - m_{i-1}^2) / 2.
  const Eigen::Index n = g.size();
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : 0.5 * (g.r(i - 1) + g.r(i));
    const double hi = i == n - 1 ? g.r(i) : 0.5 * (g.r(i) + g.r(i + 1));
    const double w = 0.5 * (hi * hi - lo * lo);
    const double rho = u[i] * u[i] + v[i] * v[i];
    double dens = -0.5 * p.a2() * rho + 0.25 * p.c2() * rho * rho -
                  p.b2() / (3 * std::sqrt(6.0)) * v[i] * (v[i] * v[i] - 3 * u[i] * u[i]);
    if (i > 0) dens += 0.5 * 4.0 * u[i] * u[i] / (g.r(i) * g.r(i));
    e += w * dens;
    if (i + 1 < n) {
      const double h = g.r(i + 1) - g.r(i);
      const double du = (u[i + 1] - u[i]) / h, dv = (v[i + 1] - v[i]) / h;
      e += 0.5 * (du * du + dv * dv) * 0.5 * (g.r(i + 1) * g.r(i + 1) - g.r(i) * g.r(i));
    }
  }
  CHECK(std::abs(discrete_energy(p, g, u, v) - e) <= 1e-10 * (1 + std::abs(e)));
  const double R = g.radius();
  CHECK(discrete_energy(p, g, u, v, true) ==
        doctest::Approx(e - derive_constants(p).f_min * 0.5 * R * R).epsilon(1e-12));
}

TEST_CASE("energy gradient matches finite differences") {
  const MaterialParams p(1, 1, 1, 1);
  const RadialGrid g = build_grid(5.0, 40, Grading::composite());
  Eigen::VectorXd u(g.size()), v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    u[i] = std::tanh(g.r(i));
    v[i] = -0.6 + 0.1 * std::sin(g.r(i));
  }
  const auto [gu, gv] = energy_gradient(p, g, u, v);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Eigen::VectorXd a = u, b = u;
    a[i] += h;
    b[i] -= h;
    CHECK(gu[i] == doctest::Approx((discrete_energy(p, g, a, v) - discrete_energy(p, g, b, v)) / (2 * h)).epsilon(1e-6));
    a = v;
    b = v;
    a[i] += h;
    b[i] -= h;
    CHECK(gv[i] == doctest::Approx((discrete_energy(p, g, u, a) - discrete_energy(p, g, u, b)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("energy refinement study is Cauchy") {
  const MaterialParams p(1, 1, 1, 1);
  double prev = 0.0;
  for (Eigen::Index n : {800, 1600}) {
    const RadialGrid g = build_grid(20.0, n, Grading::composite());
    const ProfilePair pr = solve_finite(p, g);
    const double e = discrete_energy(p, g, pr.u, pr.v);
    CHECK(std::isfinite(e));
    if (n == 1600) CHECK(std::abs(e - prev) <= 1e-4);
    prev = e;
  }
}

TEST_CASE("energy minimization: descent, agreement with Newton, local minimality") {
  const MaterialParams p(1, 1, 1, 1);
  const RadialGrid g = build_grid(20.0, 800, Grading::composite());
  const Boundary bc = Boundary::finite(p, 20.0);
  auto [u0, v0] = default_initial_guess(p, g, bc);
  const ProfilePair init{g, u0, v0, p, 0.0, SolveMethod::EnergyMin, bc};
  const ProfilePair em = minimize_energy(p, g, init, {}, 1e-7);
  CHECK(em.method == SolveMethod::EnergyMin);
  CHECK(em.residual_norm <= 1e-7);
  CHECK(em.v.maxCoeff() <= 0.0);
  CHECK(discrete_energy(p, g, em.u, em.v) <= discrete_energy(p, g, u0, v0));

  const ProfilePair newton = solve_finite(p, g);
  const ProfilePair polished = solve_finite(p, g, em);
  CHECK(std::max(max_abs(polished.u - newton.u), max_abs(polished.v - newton.v)) <= 1e-4);
  CHECK(std::max(max_abs(em.u - newton.u), max_abs(em.v - newton.v)) <= 1e-4);

  ProfilePair kicked = newton;
  kicked.v += 0.1 * bump(g, 5.0, 3.0);
  const double e_ref = discrete_energy(p, g, newton.u, newton.v);
  CHECK(discrete_energy(p, g, kicked.u, kicked.v) > e_ref);
  const ProfilePair back = minimize_energy(p, g, kicked, {}, 1e-7);
  CHECK(std::abs(discrete_energy(p, g, back.u, back.v) - e_ref) <= 1e-8);
}

TEST_CASE("energy minimization reports non-convergence") {
  const MaterialParams p(1, 1, 1, 1);
  const RadialGrid g = build_grid(20.0, 200, Grading::composite());
  const Boundary bc = Boundary::finite(p, 20.0);
  auto [u0, v0] = default_initial_guess(p, g, bc);
  StepRule rule;
  rule.max_iter = 2;
  CHECK_THROWS_AS(minimize_energy(p, g, ProfilePair{g, u0, v0, p, 0.0, SolveMethod::EnergyMin, bc}, rule, 1e-10),
                  NoConvergence);
}

TEST_CASE("scalar comparison profiles") {
  SUBCASE("U_II is increasing and inside (0, u_inf)") {
    const MaterialParams p(1, kSqrt3, 1, 1);
    const auto d = derive_constants(p);
    const RadialGrid g = build_grid(20.0, 800, Grading::composite());
    const ScalarProfile s = solve_scalar(p, g, ScalarKind::UII);
    CHECK(s.w[0] == 0.0);
    CHECK(s.w[g.last()] == d.u_inf);
    for (Eigen::Index i = 1; i < g.last(); ++i) {
      CHECK(s.w[i] > s.w[i - 1]);
      CHECK(s.w[i] < d.u_inf);
    }
  }
  SUBCASE("U_III is U_II with c2 scaled by mu") {
    const MaterialParams p(1, 1, 1, 1);
    const auto d = derive_constants(p);
    const RadialGrid g = build_grid(20.0, 400, Grading::composite());
    const ScalarProfile s3 = solve_scalar(p, g, ScalarKind::UIII);
    const double c2 = d.mu * p.c2();
    const ScalarNonlinearity scaled{-c2 * d.s_plus * d.s_plus / 2, 0.0, c2};
    const Eigen::VectorXd w = solve_scalar_equation(g, 1, scaled, d.u_inf, {});
    CHECK(max_abs(s3.w - w) <= 1e-12);
    CHECK(d.mu * p.c2() == doctest::Approx(0.2));
  }
  SUBCASE("U_I grows like r^|k| at the core") {
    for (int k : {1, 2, 3}) {
      const MaterialParams p(1, 3, 1, k);
      const RadialGrid g = build_grid(20.0, 800, Grading::composite());
      const ScalarProfile s = solve_scalar(p, g, ScalarKind::UI);
      const double r0 = g.r(1);
      std::vector<double> rs, ws;
      for (Eigen::Index i = 1; g.r(i) <= 10 * r0 * (1 + 1e-12); ++i) {
        rs.push_back(g.r(i));
        ws.push_back(s.w[i]);
      }
      CHECK(std::abs(loglog_decay_order(rs, ws) + k) <= 0.05);
    }
  }
}

TEST_CASE("infinite-domain continuation") {
  SUBCASE("critical tail coefficient") {
    const MaterialParams p(1, kSqrt3, 1, 1);
    const ProfilePair pr = solve_infinite(p, 200.0, 4000);
    CHECK(pr.boundary.kind == Boundary::Kind::TruncatedInfinite);
    CHECK(pr.boundary.bc == BcMode::AsymptoticCorrected);
    const auto [a_u, a_v] = predicted_tail_coeffs(p);
    const auto d = derive_constants(p);
    CHECK(pr.u[pr.grid.last()] == doctest::Approx(d.u_inf - a_u / 40000.0).epsilon(1e-15));
    CHECK(pr.v[pr.grid.last()] == doctest::Approx(d.v_inf - a_v / 40000.0).epsilon(1e-15));
    const TailFit t = fit_tail(pr, 100.0, 200.0);
    CHECK(std::abs(t.fitted_u_coeff - 0.40824829046386301637) <= 0.02 * 0.40824829046386301637);
  }
  SUBCASE("truncation modes agree away from the outer boundary") {
    const MaterialParams p(1, 1, 1, 1);
    const ProfilePair a = solve_infinite(p, 200.0, 2000, {BcMode::AsymptoticCorrected, {}});
    const ProfilePair b = solve_infinite(p, 200.0, 2000, {BcMode::DirichletConst, {}});
    double diff = 0.0;
    for (Eigen::Index i = 0; i < a.grid.size() && a.grid.r(i) <= 100.0; ++i)
      diff = std::max({diff, std::abs(a.u[i] - b.u[i]), std::abs(a.v[i] - b.v[i])});
    CHECK(diff <= 5e-3);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(solve_infinite(MaterialParams(1, 1, 1, 1), 40.0, 400), std::invalid_argument);
  }
  SUBCASE("b2 = 0 drift report") {
    const MaterialParams p(1, 0, 1, 1, true);
    for (double R : {50.0, 100.0, 200.0}) {
      const ProfilePair pr = solve_infinite(p, R, 1000);
      CHECK(pr.boundary.bc == BcMode::DirichletConst);
      double vmax = 0.0;
      for (Eigen::Index i = 0; i < pr.grid.size() && pr.grid.r(i) <= R / 2; ++i)
        vmax = std::max(vmax, std::abs(pr.v[i]));
      MESSAGE("b2 = 0, R_max = " << R << ": max |v| on [0, R/2] = " << vmax);
    }
  }
}
