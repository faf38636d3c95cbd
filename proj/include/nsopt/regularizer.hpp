#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "nsopt/prox.hpp"

namespace nsopt {

/// A block regularizer r_i: evaluation, weighted proximal map, subgradient
/// selection and distance-to-subdifferential queries, plus the lower bound
/// r_i* the complexity calculators consume.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  virtual double eval(const Vector& x) const = 0;

  /// argmin_x r(x) + (weight/2) ||x - v||^2
  virtual Vector prox(const Vector& v, double weight) const = 0;

  /// one element of the general subdifferential at x
  virtual Vector subgrad_select(const Vector& x) const = 0;

  /// Euclidean distance from g to the general subdifferential at x
  virtual double dist_to_subdiff(const Vector& x, const Vector& g) const = 0;

  virtual double lower_bound() const { return 0.0; }

  /// Lipschitz constant of r on its domain, when known (needed in Setting 1).
  virtual std::optional<double> lipschitz_const() const { return std::nullopt; }

  virtual bool is_zero() const { return false; }
  virtual bool is_convex() const = 0;

  /// Scalar penalty parameters when r is a separable scalar penalty.
  virtual std::optional<ScalarPenaltyParams> scalar_params() const { return std::nullopt; }
};

using RegularizerPtr = std::shared_ptr<const Regularizer>;

class ZeroRegularizer final : public Regularizer {
 public:
  double eval(const Vector&) const override { return 0.0; }
  Vector prox(const Vector& v, double weight) const override {
    if (!(weight > 0)) throw InvalidParameter("prox: weight must be positive");
    return v;
  }
  Vector subgrad_select(const Vector& x) const override { return Vector::Zero(x.size()); }
  double dist_to_subdiff(const Vector&, const Vector& g) const override { return g.norm(); }
  std::optional<double> lipschitz_const() const override { return 0.0; }
  bool is_zero() const override { return true; }
  bool is_convex() const override { return true; }
};

/// r(x) = sum_j phi(x_j) for one of the scalar penalty families.
class SeparablePenalty final : public Regularizer {
 public:
  explicit SeparablePenalty(ScalarPenaltyParams p) : p_(p) { p_.validate(); }

  double eval(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) s += penalty_value(p_, x[j]);
    return s;
  }

  Vector prox(const Vector& v, double weight) const override {
    if (!(weight > 0)) throw InvalidParameter("prox: weight must be positive");
    Vector out(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) out[j] = prox_scalar_penalty(v[j], weight, p_);
    return out;
  }

  Vector subgrad_select(const Vector& x) const override {
    Vector g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = scalar_subgrad_select(p_, x[j]);
    return g;
  }

  double dist_to_subdiff(const Vector& x, const Vector& g) const override {
    if (x.size() != g.size()) throw DimensionError("dist_to_subdiff: size mismatch");
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double d = dist_to_scalar_subdiff(p_, x[j], g[j]);
      s += d * d;
    }
    return std::sqrt(s);
  }

  std::optional<double> lipschitz_const() const override {
    // every family has global slope bounded by the slope at 0+, per coordinate;
    // over a vector the l2 Lipschitz constant scales with sqrt(dim), which the
    // caller applies. We report the scalar slope bound.
    return penalty_slope_at_zero(p_);
  }

  bool is_convex() const override { return p_.variant == Penalty::L1; }

  std::optional<ScalarPenaltyParams> scalar_params() const override { return p_; }

 private:
  ScalarPenaltyParams p_;
};

inline RegularizerPtr make_zero_reg() { return std::make_shared<ZeroRegularizer>(); }
inline RegularizerPtr make_l1_reg(double alpha) {
  return std::make_shared<SeparablePenalty>(ScalarPenaltyParams::l1(alpha));
}
inline RegularizerPtr make_penalty_reg(ScalarPenaltyParams p) {
  return std::make_shared<SeparablePenalty>(p);
}

}  // namespace nsopt
