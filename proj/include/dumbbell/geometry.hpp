#pragma once

#include <utility>
#include <vector>

namespace dumbbell {

/// Plate coefficients: Poisson-type ratio `sigma` in (-1, 1) and lateral
/// tension `tau` >= 0.
struct MaterialParams {
  double sigma = 0.0;
  double tau = 0.0;

  void validate() const;
  bool operator==(const MaterialParams&) const = default;
};

enum class ProfileKind { Constant, Polynomial, CosineBump };

/// Channel profile g on [0, 1] together with the monotonicity window used by
/// the end-monotonicity check.
///
///   Constant:    g(x) = c
///   Polynomial:  g(x) = sum_i coeffs[i] x^i
///   CosineBump:  g(x) = a + b (1 - cos 2 pi x)
class ProfileSpec {
 public:
  static ProfileSpec constant(double c, double delta = 0.25);
  static ProfileSpec polynomial(std::vector<double> coeffs, double delta = 0.25);
  static ProfileSpec cosine_bump(double a, double b, double delta = 0.25);

  ProfileKind kind() const { return kind_; }
  double delta() const { return delta_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double constant_value() const;  // throws UnsupportedProfile unless Constant
  bool is_constant() const { return kind_ == ProfileKind::Constant; }

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  /// Exact integral of g over [0, 1].
  double integral() const;
  /// Maximum of g over [0, 1] (dense sampling plus endpoints; exact for constants).
  double max_value() const;
  double min_value() const;

  bool operator==(const ProfileSpec&) const = default;

 private:
  ProfileSpec(ProfileKind kind, std::vector<double> coeffs, double delta);

  ProfileKind kind_ = ProfileKind::Constant;
  // Constant: {c}; Polynomial: ascending coefficients; CosineBump: {a, b}.
  std::vector<double> coeffs_;
  double delta_ = 0.25;
};

struct MPReport {
  bool holds = false;
  double delta_used = 0.0;
  std::vector<std::pair<double, double>> violations;  // (x, g'(x))
};

/// Checks non-strict monotonicity of g near the channel ends: non-increasing
/// on [0, delta] and non-decreasing on [1 - delta, 1]. Throws
/// NonPositiveProfile when g is not positive on [0, 1].
MPReport validate_profile(const ProfileSpec& profile);

/// Height eps * g(x) of the channel at abscissa x.
double channel_height(const ProfileSpec& profile, double epsilon, double x);

/// Dumbbell made of Omega_L = (-l, 0) x (-1, 1), Omega_R = (1, 1 + r) x (-1, 1)
/// and the channel R_eps = {0 < x < 1, 0 < y < eps g(x)}.
struct DumbbellSpec {
  double left_length = 1.0;
  double right_length = 1.0;
  ProfileSpec profile = ProfileSpec::constant(1.0);
  double epsilon = 0.1;

  void validate() const;
  double area() const;
  double omega_area() const { return 2.0 * (left_length + right_length); }
  double channel_area() const { return epsilon * profile.integral(); }
};

}  // namespace dumbbell
