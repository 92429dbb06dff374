#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nematic/core.hpp"
#include "nematic/solver.hpp"

namespace nematic {

struct BoundRecord {
  std::string name;
  bool applicable = true;
  bool satisfied = true;
  /// max over checked nodes of (lhs - rhs); <= 0 means strict satisfaction.
  double worst_violation = 0.0;
  double worst_location = 0.0;
};

struct BoundsReport {
  RegimeTag regime;
  double tolerance;
  std::vector<BoundRecord> bounds;

  bool all_satisfied() const;
  const BoundRecord& get(const std::string& name) const;
};

/// Checks POSITIVITY, NEGATIVITY, CONE, BALL, V_WINDOW, U_UPPER and COMPARISON
/// pointwise at the nodes. COMPARISON solves u_I (super/critical) or u_III
/// (subcritical) on the profile grid. Throws RegimeMismatch if `expected`
/// disagrees with the profile parameters.
BoundsReport verify_bounds(const ProfilePair& profile, double tol,
                           std::optional<RegimeTag> expected = std::nullopt);

/// Far-field r^-2 coefficients: u ~ u_inf - A_u / r^2, v ~ v_inf - A_v / r^2.
std::pair<double, double> predicted_tail_coeffs(const MaterialParams& p);

/// Width of the layer next to r = R_max in which the truncation condition is felt.
double boundary_layer_width(const MaterialParams& p);

struct TailFit {
  double r_lo = 0.0, r_hi = 0.0;
  int nodes = 0;
  double fitted_u_const = 0.0, fitted_u_coeff = 0.0;
  double fitted_v_const = 0.0, fitted_v_coeff = 0.0;
  double predicted_u_coeff = 0.0, predicted_v_coeff = 0.0;
  double rel_err_u = 0.0, rel_err_v = 0.0;  ///< NaN when the prediction is zero or undefined
  double v_to_u_coeff_ratio = 0.0;          ///< |fitted_v_coeff| / |fitted_u_coeff|
  double fit_residual_u = 0.0, fit_residual_v = 0.0;
  /// Decay order of |u - u_inf + A_u r^-2| + |v - v_inf + A_v r^-2| (ideally 4).
  double remainder_order_estimate = 0.0;
};

/// Weighted least squares of u and v against {1, r^-2} on the nodes inside [r_lo, r_hi].
/// Throws std::invalid_argument when fewer than 20 nodes fall in the window.
TailFit fit_tail(const ProfilePair& profile, double r_lo, double r_hi);

struct DecoupledTailReport {
  double r_lo = 0.0, r_hi = 0.0;
  double x_coeff_predicted = 0.0;  ///< X ~ -x_coeff r^-2
  double y_coeff_predicted = 0.0;  ///< Y ~ -y_coeff r^-2
  double x_coeff_fitted = 0.0;
  double y_coeff_fitted = 0.0;
  double x_bar_order = 0.0;  ///< decay order of |X + x_coeff r^-2|
  double y_bar_order = 0.0;
  double y_over_x_max_deviation = 0.0;  ///< max |Y/X - sqrt3| (only meaningful when v = v_inf)
};

/// Works on X = (u - u_inf) + sqrt3 (v - v_inf), Y = sqrt3 (u - u_inf) - (v - v_inf)
/// over [R/2, R], excluding the truncation boundary layer from the order estimates.
DecoupledTailReport decoupled_tail_check(const ProfilePair& profile);

/// Least-squares decay order -d log|y| / d log r over entries with |y| above `floor`.
double loglog_decay_order(const std::vector<double>& r, const std::vector<double>& y,
                          double floor = 1e-15);

}  // namespace nematic
