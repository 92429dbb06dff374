#pragma once

#include <Eigen/Core>
#include <string_view>

namespace nematic {

/// Landau-de Gennes material constants (a^2, b^2, c^2) and the half-winding index k.
///
/// b2 == 0 is the low-temperature diagnostic mode and must be requested
/// explicitly through `allow_b_zero`.
class MaterialParams {
 public:
  MaterialParams(double a2, double b2, double c2, int k, bool allow_b_zero = false);

  double a2() const noexcept { return a2_; }
  double b2() const noexcept { return b2_; }
  double c2() const noexcept { return c2_; }
  int k() const noexcept { return k_; }
  bool b_zero() const noexcept { return b2_ == 0.0; }
  bool allow_b_zero() const noexcept { return allow_b_zero_; }

  MaterialParams with_k(int k) const { return {a2_, b2_, c2_, k, allow_b_zero_}; }

  bool operator==(const MaterialParams&) const = default;

 private:
  double a2_;
  double b2_;
  double c2_;
  int k_;
  bool allow_b_zero_;
};

struct DerivedConstants {
  double s_plus;
  double s_minus;
  double mu;     ///< b^2 / sqrt(b^4 + 24 a^2 c^2)
  double u_inf;  ///< s_plus / sqrt(2)
  double v_inf;  ///< -s_plus / sqrt(6)
  double f_min;  ///< bulk density at (u_inf, v_inf)
};

DerivedConstants derive_constants(const MaterialParams& p);

enum class RegimeTag { Supercritical, Critical, Subcritical, BZero };

std::string_view to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag;
  double discriminant;  ///< b^4 - 3 a^2 c^2
  double tolerance;
};

inline constexpr double kCriticalTolerance = 1e-9;

/// Classifies by the sign of b^4 - 3a^2c^2; |disc| <= tol (b^4 + 3a^2c^2) is Critical.
Regime classify_regime(const MaterialParams& p, double tol = kCriticalTolerance);

// Bulk potential restricted to Q = u E1 + v E0.
double bulk_density(const MaterialParams& p, double u, double v);
Eigen::Vector2d bulk_gradient(const MaterialParams& p, double u, double v);
Eigen::Matrix2d bulk_hessian(const MaterialParams& p, double u, double v);

}  // namespace nematic
