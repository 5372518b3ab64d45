#include "dumbbell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dumbbell/error.hpp"

namespace dumbbell {

namespace {

constexpr int kPositivitySamples = 4097;
constexpr int kWindowSamples = 1001;

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "profile delta must lie in (0, 1/2), got " + std::to_string(delta));
  }
}

}  // namespace

void MaterialParams::validate() const {
  if (!(sigma > -1.0 && sigma < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "sigma must lie in (-1, 1), got " + std::to_string(sigma));
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::InvalidArgument, "tau must be >= 0, got " + std::to_string(tau));
  }
}

ProfileSpec::ProfileSpec(ProfileKind kind, std::vector<double> coeffs, double delta)
    : kind_(kind), coeffs_(std::move(coeffs)), delta_(delta) {
  check_delta(delta_);
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "profile coefficients must be finite");
  }
}

ProfileSpec ProfileSpec::constant(double c, double delta) {
  return ProfileSpec(ProfileKind::Constant, {c}, delta);
}

ProfileSpec ProfileSpec::polynomial(std::vector<double> coeffs, double delta) {
  if (coeffs.empty()) throw Error(ErrorKind::InvalidArgument, "polynomial profile needs at least one coefficient");
  return ProfileSpec(ProfileKind::Polynomial, std::move(coeffs), delta);
}

ProfileSpec ProfileSpec::cosine_bump(double a, double b, double delta) {
  return ProfileSpec(ProfileKind::CosineBump, {a, b}, delta);
}

double ProfileSpec::constant_value() const {
  if (kind_ != ProfileKind::Constant) {
    throw Error(ErrorKind::UnsupportedProfile, "operation requires a constant channel profile");
  }
  return coeffs_[0];
}

double ProfileSpec::value(double x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return coeffs_[0];
    case ProfileKind::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case ProfileKind::CosineBump:
      return coeffs_[0] + coeffs_[1] * (1.0 - std::cos(2.0 * std::numbers::pi * x));
  }
  return 0.0;
}

double ProfileSpec::d1(double x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return 0.0;
    case ProfileKind::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * coeffs_[i];
      return acc;
    }
    case ProfileKind::CosineBump:
      return coeffs_[1] * 2.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * x);
  }
  return 0.0;
}

double ProfileSpec::d2(double x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return 0.0;
    case ProfileKind::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 2;) {
        acc = acc * x + static_cast<double>(i * (i - 1)) * coeffs_[i];
      }
      return acc;
    }
    case ProfileKind::CosineBump: {
      const double w = 2.0 * std::numbers::pi;
      return coeffs_[1] * w * w * std::cos(w * x);
    }
  }
  return 0.0;
}

double ProfileSpec::integral() const {
  switch (kind_) {
    case ProfileKind::Constant:
      return coeffs_[0];
    case ProfileKind::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = 0; i < coeffs_.size(); ++i) acc += coeffs_[i] / static_cast<double>(i + 1);
      return acc;
    }
    case ProfileKind::CosineBump:
      return coeffs_[0] + coeffs_[1];
  }
  return 0.0;
}

double ProfileSpec::max_value() const {
  if (kind_ == ProfileKind::Constant) return coeffs_[0];
  double m = std::max(value(0.0), value(1.0));
  for (int i = 0; i < kPositivitySamples; ++i) {
    m = std::max(m, value(static_cast<double>(i) / (kPositivitySamples - 1)));
  }
  return m;
}

double ProfileSpec::min_value() const {
  if (kind_ == ProfileKind::Constant) return coeffs_[0];
  double m = std::min(value(0.0), value(1.0));
  for (int i = 0; i < kPositivitySamples; ++i) {
    m = std::min(m, value(static_cast<double>(i) / (kPositivitySamples - 1)));
  }
  return m;
}

MPReport validate_profile(const ProfileSpec& profile) {
  const double gmin = profile.min_value();
  if (!(gmin > 0.0)) {
    throw Error(ErrorKind::NonPositiveProfile, "profile minimum " + std::to_string(gmin) + " is not positive");
  }

  MPReport report;
  report.delta_used = profile.delta();
  const double delta = profile.delta();
  // Slopes below this are treated as zero (flat profiles must pass).
  const double slope_tol = 1e-12 * std::max(1.0, profile.max_value());

  for (int i = 0; i < kWindowSamples; ++i) {
    const double t = static_cast<double>(i) / (kWindowSamples - 1);
    const double xl = t * delta;
    const double sl = profile.d1(xl);
    if (sl > slope_tol) report.violations.emplace_back(xl, sl);
  }
  for (int i = 0; i < kWindowSamples; ++i) {
    const double t = static_cast<double>(i) / (kWindowSamples - 1);
    const double xr = 1.0 - delta + t * delta;
    const double sr = profile.d1(xr);
    if (sr < -slope_tol) report.violations.emplace_back(xr, sr);
  }
  report.holds = report.violations.empty();
  return report;
}

double channel_height(const ProfileSpec& profile, double epsilon, double x) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidEpsilon, "epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::OutOfDomain, "x = " + std::to_string(x) + " is outside [0, 1]");
  }
  return epsilon * profile.value(x);
}

void DumbbellSpec::validate() const {
  if (!(left_length > 0.0) || !(right_length > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "box side lengths must be positive");
  }
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidEpsilon, "epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (!(profile.min_value() > 0.0)) {
    throw Error(ErrorKind::NonPositiveProfile, "channel profile must be positive on [0, 1]");
  }
  if (!(epsilon * profile.max_value() < 1.0)) {
    throw Error(ErrorKind::InvalidEpsilon,
                "channel must fit inside the attachment segments: eps * max g = " +
                    std::to_string(epsilon * profile.max_value()) + " >= 1");
  }
}

double DumbbellSpec::area() const { return omega_area() + channel_area(); }

}  // namespace dumbbell
