#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>
#include <utility>

#include "nematic/core.hpp"
#include "nematic/errors.hpp"
#include "nematic/grid.hpp"

namespace nematic {

enum class SolveMethod { Newton, EnergyMin };
enum class BcMode { DirichletConst, AsymptoticCorrected };

std::string_view to_string(SolveMethod m);
std::string_view to_string(BcMode m);

struct Boundary {
  enum class Kind { Finite, TruncatedInfinite };
  Kind kind = Kind::Finite;
  double R = 0.0;
  BcMode bc = BcMode::DirichletConst;
  double u_outer = 0.0;  ///< imposed u(R)
  double v_outer = 0.0;  ///< imposed v(R)

  /// u(R) = s+/sqrt2, v(R) = -s+/sqrt6.
  static Boundary finite(const MaterialParams& p, double R);
  /// Outer values for a truncated infinite domain; the corrected mode subtracts
  /// the r^-2 far-field terms.
  static Boundary truncated(const MaterialParams& p, double R, BcMode bc);
};

struct ProfilePair {
  RadialGrid grid;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  MaterialParams params;
  double residual_norm = 0.0;
  SolveMethod method = SolveMethod::Newton;
  Boundary boundary;
};

enum class ScalarKind { UI, UII, UIII };
std::string_view to_string(ScalarKind k);

struct ScalarProfile {
  RadialGrid grid;
  Eigen::VectorXd w;
  ScalarKind kind;
  MaterialParams params;
  double residual_norm = 0.0;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

/// Residuals of the coupled system on the grid.
///
/// Interior rows: u'' + u'/r - k^2 u/r^2 - df/du and v'' + v'/r - df/dv in
/// conservative form. Row 0 of u is u_0, row 0 of v the half-cell balance
/// enforcing v'(0) = 0, and row N of each is the Dirichlet mismatch.
std::pair<Eigen::VectorXd, Eigen::VectorXd> ode_residual(const MaterialParams& p,
                                                         const RadialGrid& g,
                                                         const Eigen::VectorXd& u,
                                                         const Eigen::VectorXd& v,
                                                         const Boundary& bc);

/// Same with the finite-domain boundary values.
std::pair<Eigen::VectorXd, Eigen::VectorXd> ode_residual(const MaterialParams& p,
                                                         const RadialGrid& g,
                                                         const Eigen::VectorXd& u,
                                                         const Eigen::VectorXd& v);

/// Max-norm over interior rows (u: 1..N-1, v: 0..N-1).
double interior_residual_norm(const std::pair<Eigen::VectorXd, Eigen::VectorXd>& res);

/// Analytic Jacobian of ode_residual, unknowns interleaved as (u_0, v_0, u_1, v_1, ...).
Eigen::MatrixXd ode_jacobian_dense(const MaterialParams& p, const RadialGrid& g,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Starting profile that is ~ r^|k| at the core, equals the outer values at R,
/// and lies in the cone u > 0, v < 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> default_initial_guess(const MaterialParams& p,
                                                                  const RadialGrid& g,
                                                                  const Boundary& bc);

/// Damped Newton for the boundary value problem with the given outer values.
/// Throws NoConvergence or SignViolation.
ProfilePair solve_bvp(const MaterialParams& p, const RadialGrid& g, const Boundary& bc,
                      const std::optional<ProfilePair>& init, const NewtonOptions& opts);

/// Finite domain [0, R] with u(R) = s+/sqrt2, v(R) = -s+/sqrt6.
ProfilePair solve_finite(const MaterialParams& p, const RadialGrid& g,
                         const std::optional<ProfilePair>& init = std::nullopt,
                         const NewtonOptions& opts = {});

/// Discrete reduced energy: cell-midpoint gradient terms plus node-weighted
/// k^2 u^2 / (2 r^2) and bulk terms. `renormalize` subtracts f_min R^2 / 2.
double discrete_energy(const MaterialParams& p, const RadialGrid& g, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v, bool renormalize = false);

/// Euclidean gradient of discrete_energy with respect to the nodal values.
std::pair<Eigen::VectorXd, Eigen::VectorXd> energy_gradient(const MaterialParams& p,
                                                            const RadialGrid& g,
                                                            const Eigen::VectorXd& u,
                                                            const Eigen::VectorXd& v);

struct StepRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 30;
  int max_iter = 50000;
};

/// Projected, H^1-preconditioned gradient descent on discrete_energy over
/// {v <= 0}. Boundary values are taken from `init`. Energy decreases monotonically.
ProfilePair minimize_energy(const MaterialParams& p, const RadialGrid& g, const ProfilePair& init,
                            const StepRule& rule = {}, double tol = 1e-7);

/// Scalar comparison problem w'' + w'/r - k^2 w / r^2 = w (lin + quad w + cub w^2),
/// w(0) = 0, w(R) = target.
struct ScalarNonlinearity {
  double linear;
  double quadratic;
  double cubic;
};

ScalarNonlinearity scalar_nonlinearity(const MaterialParams& p, ScalarKind kind);

Eigen::VectorXd solve_scalar_equation(const RadialGrid& g, int k, const ScalarNonlinearity& nl,
                                      double target, const NewtonOptions& opts,
                                      double* residual_norm = nullptr);

ScalarProfile solve_scalar(const MaterialParams& p, const RadialGrid& g, ScalarKind kind,
                           const NewtonOptions& opts = {});

struct InfiniteOptions {
  BcMode bc = BcMode::AsymptoticCorrected;
  NewtonOptions newton{};
};

/// Continuation over R_max/8, R_max/4, R_max/2, R_max on composite grids with
/// `cells` intervals each. Refuses b^2 = 0 unless the diagnostic flag is set.
ProfilePair solve_infinite(const MaterialParams& p, double R_max, Eigen::Index cells,
                           const InfiniteOptions& opts = {});

}  // namespace nematic
