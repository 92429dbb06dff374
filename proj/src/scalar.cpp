#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nematic/solver.hpp"

namespace nematic {

std::string_view to_string(ScalarKind k) {
  switch (k) {
    case ScalarKind::UI: return "U_I";
    case ScalarKind::UII: return "U_II";
    case ScalarKind::UIII: return "U_III";
  }
  return "unknown";
}

ScalarNonlinearity scalar_nonlinearity(const MaterialParams& p, ScalarKind kind) {
  const auto d = derive_constants(p);
  const double half_s2 = 0.5 * d.s_plus * d.s_plus;
  switch (kind) {
    case ScalarKind::UI:
      return {-p.a2(), -std::sqrt(2.0) / 3.0 * p.b2(), 4.0 * p.c2() / 3.0};
    case ScalarKind::UII:
      return {-p.c2() * half_s2, 0.0, p.c2()};
    case ScalarKind::UIII:
      return {-d.mu * p.c2() * half_s2, 0.0, d.mu * p.c2()};
  }
  throw std::invalid_argument("unknown scalar kind");
}

namespace {

Eigen::VectorXd scalar_residual(const RadialGrid& g, double k2, const ScalarNonlinearity& nl,
                                double target, const Eigen::VectorXd& w) {
  const Eigen::Index n = g.size();
  Eigen::VectorXd res(n);
  res[0] = w[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double hi = g.mid(i) / g.h(i);
    const double lo = g.mid(i - 1) / g.h(i - 1);
    const double lap = (hi * (w[i + 1] - w[i]) - lo * (w[i] - w[i - 1])) / g.weight(i);
    const double x = w[i];
    res[i] = lap - k2 * x / (g.r(i) * g.r(i)) - x * (nl.linear + x * (nl.quadratic + x * nl.cubic));
  }
  res[n - 1] = w[n - 1] - target;
  return res;
}

}  // namespace

Eigen::VectorXd solve_scalar_equation(const RadialGrid& g, int k, const ScalarNonlinearity& nl,
                                      double target, const NewtonOptions& opts,
                                      double* residual_norm) {
  const Eigen::Index n = g.size();
  const double k2 = double(k) * double(k);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = g.r(i);
    w[i] = target * std::tanh(r / std::sqrt(2.0)) * std::pow(r / (1.0 + r), std::abs(k) - 1);
  }
  w[0] = 0.0;
  w[n - 1] = target;

  auto interior_norm = [&](const Eigen::VectorXd& res) {
    return res.segment(1, n - 2).lpNorm<Eigen::Infinity>();
  };
  Eigen::VectorXd res = scalar_residual(g, k2, nl, target, w);
  double norm = res.lpNorm<Eigen::Infinity>();
  Eigen::SparseMatrix<double> jac(n, n);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eigen::Triplet<double>> t;
  bool analyzed = false;

  for (int it = 0; it < opts.max_iter; ++it) {
    t.clear();
    t.emplace_back(0, 0, 1.0);
    t.emplace_back(n - 1, n - 1, 1.0);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      const double hi = g.mid(i) / g.h(i) / g.weight(i);
      const double lo = g.mid(i - 1) / g.h(i - 1) / g.weight(i);
      const double x = w[i];
      const double dn = nl.linear + x * (2.0 * nl.quadratic + 3.0 * x * nl.cubic);
      t.emplace_back(i, i - 1, lo);
      t.emplace_back(i, i, -lo - hi - k2 / (g.r(i) * g.r(i)) - dn);
      t.emplace_back(i, i + 1, hi);
    }
    jac.setFromTriplets(t.begin(), t.end());
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw NoConvergence(it, norm, "scalar: singular Jacobian");
    Eigen::VectorXd dw = lu.solve(-res);
    // Boundary rows are already exact; keep them free of solve roundoff.
    dw[0] = 0.0;
    dw[n - 1] = 0.0;

    const bool polishing = norm <= opts.tol;
    double lambda = 1.0;
    Eigen::VectorXd trial_w;
    Eigen::VectorXd trial_res;
    double trial = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving) {
      trial_w = w + lambda * dw;
      trial_res = scalar_residual(g, k2, nl, target, trial_w);
      trial = trial_res.lpNorm<Eigen::Infinity>();
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
      if (polishing) break;
      throw NoConvergence(it + 1, norm, "scalar: line search failed");
    }
    w = std::move(trial_w);
    res = std::move(trial_res);
    norm = trial;
    if (norm <= opts.tol && lambda * dw.lpNorm<Eigen::Infinity>() <= 1e-11 * (1.0 + std::abs(target)))
      break;
    if (it + 1 == opts.max_iter && norm > opts.tol) throw NoConvergence(opts.max_iter, norm, "scalar");
  }
  if (norm > opts.tol) throw NoConvergence(opts.max_iter, norm, "scalar");
  if (residual_norm) *residual_norm = interior_norm(res);
  return w;
}

ScalarProfile solve_scalar(const MaterialParams& p, const RadialGrid& g, ScalarKind kind,
                           const NewtonOptions& opts) {
  const auto d = derive_constants(p);
  double norm = 0.0;
  Eigen::VectorXd w =
      solve_scalar_equation(g, p.k(), scalar_nonlinearity(p, kind), d.u_inf, opts, &norm);
  return ScalarProfile{g, std::move(w), kind, p, norm};
}

}  // namespace nematic
