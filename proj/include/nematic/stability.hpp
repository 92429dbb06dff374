#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Core>

#include "nematic/grid.hpp"
#include "nematic/solver.hpp"

namespace nematic {

/// 1 for odd k, 0 for even k.
int parity_constant(int k);

enum class FormKind { W, Xi };

struct FormOptions {
  std::optional<int> k;     ///< overrides the winding number in the 1/r^2 coefficient only
  bool potential = true;    ///< include the bulk terms built from (u, v)
  bool unit_weight = false; ///< xi form only: replace the u^2 weight by 1
};

/// Quadrature of
///   |w'|^2 + (k^2 + c_k)/(4 r^2) w^2 + (-a2 + (2/sqrt6) b2 v + c2 (u^2+v^2)) w^2
///   - (b2/sqrt2)(u + sqrt3 v) w^2
/// against r dr. Gradient terms use cell midpoints, the rest node weights.
/// Throws SupportViolation if w is nonzero at r = 0 or at r = R.
double w_form(const ProfilePair& profile, const Eigen::VectorXd& w, const FormOptions& opts = {});

/// Quadrature of { |xi'|^2 - (3k^2 - c_k)/(4 r^2) xi^2 - (b2/sqrt2)(u + sqrt3 v) xi^2 } u^2 r dr.
double xi_form(const ProfilePair& profile, const Eigen::VectorXd& xi, const FormOptions& opts = {});

struct TestFamily {
  enum class Kind { LogSine, RescaledLogSine, Bump };
  Kind kind = Kind::RescaledLogSine;
  int n = 0;           // LogSine: support (e^{2n pi}, e^{2(n+1) pi})
  double omega = 0.5;  // RescaledLogSine: sin(omega ln(r/r_a)) on (r_a, r_a e^{pi/omega})
  double r_a = 1.0;
  double center = 0.0;  // Bump: exp(1 - 1/(1 - s^2)), s = (r - center)/width
  double width = 1.0;

  static TestFamily log_sine(int n);
  static TestFamily rescaled(double omega, double r_a);
  /// Rescaled log-sine filling [r_a, r_b] exactly.
  static TestFamily spanning(double r_a, double r_b);
  static TestFamily bump(double center, double width);

  std::pair<double, double> support() const;
  std::string id() const;
};

/// Samples on the grid, exactly zero outside the open support. With smoothing > 0
/// the samples are multiplied by a C-infinity cutoff rising over that length at both ends.
/// Throws SupportViolation if the support is not inside (0, R].
Eigen::VectorXd test_function(const RadialGrid& g, const TestFamily& family, double smoothing = 0.0);

/// A smooth random bump supported inside [r_a, r_b].
Eigen::VectorXd random_test_function(const RadialGrid& g, double r_a, double r_b,
                                     std::mt19937_64& rng);

/// max over `count` random xi of |w_form(u xi) - xi_form(xi)| / (1 + |xi_form(xi)|).
double hardy_identity_error(const ProfilePair& profile, double r_a, double r_b, int count,
                            std::uint64_t seed);

struct Support {
  double r_a = 0.0, r_b = 0.0;
};

/// [R exp(-1.2 pi / sqrt(gamma)), R] with gamma = (k^2 - c_k)/4, the far-field
/// coefficient of the net 1/r^2 term; [R/4, R] when gamma = 0.
Support default_support(int k, double R_max);

struct StabilityReport {
  int k = 0;
  int c_k = 0;
  Support support;
  int support_nodes = 0;
  double min_rayleigh = 0.0;
  double tolerance = 0.0;
  std::optional<Eigen::VectorXd> certificate;  ///< full-grid samples, normalized to unit weighted mass
  double certificate_form_value = 0.0;         ///< xi_form of the certificate by direct quadrature
  Eigen::VectorXd radii;
  std::map<std::string, double> form_values;
  double hardy_identity_error = 0.0;
  bool open_question = false;  ///< |k| = 1: no claim about the sign
};

struct RayleighOptions {
  double tolerance = 1e-10;
  std::uint64_t seed = 20240601;
  int hardy_samples = 5;
};

/// Lowest generalized eigenvalue of the discretized xi form against diag(weight u^2)
/// on the nodes strictly inside the support (Dirichlet at both ends). Sturm bisection
/// brackets the eigenvalue and shifted inverse iteration recovers the eigenvector.
StabilityReport minimize_rayleigh(const ProfilePair& profile, Support support,
                                  const RayleighOptions& opts = {});

/// Tridiagonal symmetric matrix of the restricted problem, scaled by M^{-1/2} on both sides.
struct ReducedOperator {
  Eigen::VectorXd diag, off;
  Eigen::Index first = 0;  ///< grid index of the first unknown
  Eigen::VectorXd mass;    ///< weight_i u_i^2 for the unknowns
};
ReducedOperator reduced_xi_operator(const ProfilePair& profile, Support support);

}  // namespace nematic
