#pragma once

// Closed-form 1D profiles with analytic derivatives, used for initial data
// and external potentials.

#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "twofluid/error.hpp"

namespace twofluid {

class Profile {
 public:
  enum class Kind { kConstant, kStep, kSine, kGauss, kLinear };

  Profile() = default;

  static Profile constant(double c) { return Profile(Kind::kConstant, c, 0.0, 0.0, 0.0); }

  /// left for x < x0, right otherwise.
  static Profile step(double x0, double left, double right) { return Profile(Kind::kStep, x0, left, right, 0.0); }

  /// mean + amp sin(k x + phase).
  static Profile sine(double mean, double amp, double k, double phase = 0.0) {
    return Profile(Kind::kSine, mean, amp, k, phase);
  }

  /// base + amp exp(-((x - center) / width)^2).
  static Profile gauss(double base, double amp, double center, double width) {
    if (!(width > 0.0)) throw DomainError(fmt::format("gauss width = {} must be positive", width));
    return Profile(Kind::kGauss, base, amp, center, width);
  }

  /// intercept + slope x.
  static Profile linear(double slope, double intercept = 0.0) {
    return Profile(Kind::kLinear, slope, intercept, 0.0, 0.0);
  }

  Kind kind() const noexcept { return kind_; }
  bool is_zero() const noexcept { return kind_ == Kind::kConstant && p0_ == 0.0; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::kConstant: return p0_;
      case Kind::kStep: return x < p0_ ? p1_ : p2_;
      case Kind::kSine: return p0_ + p1_ * std::sin(p2_ * x + p3_);
      case Kind::kGauss: {
        const double z = (x - p2_) / p3_;
        return p0_ + p1_ * std::exp(-z * z);
      }
      case Kind::kLinear: return p1_ + p0_ * x;
    }
    return 0.0;
  }

  /// d/dx; zero for the step (its jump is not a gradient).
  double derivative(double x) const {
    switch (kind_) {
      case Kind::kConstant:
      case Kind::kStep: return 0.0;
      case Kind::kSine: return p1_ * p2_ * std::cos(p2_ * x + p3_);
      case Kind::kGauss: {
        const double z = (x - p2_) / p3_;
        return -2.0 * z / p3_ * p1_ * std::exp(-z * z);
      }
      case Kind::kLinear: return p0_;
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::kConstant: return fmt::format("{}", p0_);
      case Kind::kStep: return fmt::format("step({}, {}, {})", p0_, p1_, p2_);
      case Kind::kSine: return fmt::format("{} + {} sin({} x + {})", p0_, p1_, p2_, p3_);
      case Kind::kGauss: return fmt::format("gauss({}, {}, {}, {})", p0_, p1_, p2_, p3_);
      case Kind::kLinear: return fmt::format("{} + {} x", p1_, p0_);
    }
    return {};
  }

 private:
  Profile(Kind kind, double p0, double p1, double p2, double p3)
      : kind_(kind), p0_(p0), p1_(p1), p2_(p2), p3_(p3) {}

  Kind kind_ = Kind::kConstant;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
};

/// sin with n full periods over [x_lo, x_hi].
inline Profile periodic_sine(double mean, double amp, double n, double x_lo, double x_hi, double phase = 0.0) {
  const double k = 2.0 * std::numbers::pi * n / (x_hi - x_lo);
  return Profile::sine(mean, amp, k, phase - k * x_lo);
}

}  // namespace twofluid
