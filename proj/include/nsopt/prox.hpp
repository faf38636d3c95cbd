#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nsopt/block_vector.hpp"
#include "nsopt/errors.hpp"

namespace nsopt {

enum class Penalty { L1, SCAD, MCP, CappedL1, LSP };

/// Scalar penalty family phi(x), separable over coordinates.
/// alpha is the weight; theta is the shape parameter of the variant
/// (SCAD a > 2, MCP gamma > 0, capped-l1 cap b > 0, LSP theta > 0).
/// L1 ignores theta.
struct ScalarPenaltyParams {
  Penalty variant = Penalty::L1;
  double alpha = 1.0;
  double theta = 0.0;

  void validate() const {
    if (!(alpha > 0)) throw InvalidParameter("penalty: alpha must be positive");
    switch (variant) {
      case Penalty::L1:
        break;
      case Penalty::SCAD:
        if (!(theta > 2)) throw InvalidParameter("SCAD: shape a must be > 2");
        break;
      case Penalty::MCP:
        if (!(theta > 0)) throw InvalidParameter("MCP: gamma must be > 0");
        break;
      case Penalty::CappedL1:
        if (!(theta > 0)) throw InvalidParameter("capped-l1: cap b must be > 0");
        break;
      case Penalty::LSP:
        if (!(theta > 0)) throw InvalidParameter("LSP: theta must be > 0");
        break;
    }
  }

  static ScalarPenaltyParams l1(double alpha) { return {Penalty::L1, alpha, 0.0}; }
  static ScalarPenaltyParams scad(double alpha, double a) { return {Penalty::SCAD, alpha, a}; }
  static ScalarPenaltyParams mcp(double alpha, double gamma) { return {Penalty::MCP, alpha, gamma}; }
  static ScalarPenaltyParams capped_l1(double alpha, double b) { return {Penalty::CappedL1, alpha, b}; }
  static ScalarPenaltyParams lsp(double alpha, double theta) { return {Penalty::LSP, alpha, theta}; }
};

inline double penalty_value(const ScalarPenaltyParams& p, double x) {
  const double t = std::abs(x);
  const double a = p.alpha;
  switch (p.variant) {
    case Penalty::L1:
      return a * t;
    case Penalty::SCAD: {
      const double s = p.theta;
      if (t <= a) return a * t;
      if (t <= s * a) return (2.0 * s * a * t - t * t - a * a) / (2.0 * (s - 1.0));
      return a * a * (s + 1.0) / 2.0;
    }
    case Penalty::MCP: {
      const double g = p.theta;
      if (t <= g * a) return a * t - t * t / (2.0 * g);
      return g * a * a / 2.0;
    }
    case Penalty::CappedL1:
      return a * std::min(t, p.theta);
    case Penalty::LSP:
      return a * std::log1p(t / p.theta);
  }
  return 0.0;  // unreachable
}

/// One-sided derivative d/dt phi(t) for t > 0.
inline double penalty_derivative_pos(const ScalarPenaltyParams& p, double t) {
  const double a = p.alpha;
  switch (p.variant) {
    case Penalty::L1:
      return a;
    case Penalty::SCAD: {
      const double s = p.theta;
      if (t <= a) return a;
      if (t <= s * a) return (s * a - t) / (s - 1.0);
      return 0.0;
    }
    case Penalty::MCP:
      return t <= p.theta * a ? a - t / p.theta : 0.0;
    case Penalty::CappedL1:
      return t < p.theta ? a : 0.0;
    case Penalty::LSP:
      return a / (p.theta + t);
  }
  return 0.0;
}

/// Slope of phi at 0+ (the subdifferential at 0 is [-slope0, slope0]).
inline double penalty_slope_at_zero(const ScalarPenaltyParams& p) {
  return p.variant == Penalty::LSP ? p.alpha / p.theta : p.alpha;
}

namespace detail {

/// Region breakpoints of phi on the positive ray.
inline void penalty_breakpoints(const ScalarPenaltyParams& p, std::vector<double>& out) {
  switch (p.variant) {
    case Penalty::L1:
      break;
    case Penalty::SCAD:
      out.push_back(p.alpha);
      out.push_back(p.theta * p.alpha);
      break;
    case Penalty::MCP:
      out.push_back(p.theta * p.alpha);
      break;
    case Penalty::CappedL1:
      out.push_back(p.theta);
      break;
    case Penalty::LSP:
      break;
  }
}

/// Stationary points of phi(t) + (w/2)(t - v)^2 on the ray t > 0,
/// one candidate per piecewise region (possibly invalid, caller evaluates).
inline void penalty_stationary_points(const ScalarPenaltyParams& p, double v, double w,
                                      std::vector<double>& out) {
  const double a = p.alpha;
  switch (p.variant) {
    case Penalty::L1:
      out.push_back(v - a / w);
      break;
    case Penalty::SCAD: {
      const double s = p.theta;
      out.push_back(v - a / w);
      const double den = w * (s - 1.0) - 1.0;
      if (std::abs(den) > 1e-15) out.push_back((w * (s - 1.0) * v - s * a) / den);
      out.push_back(v);
      break;
    }
    case Penalty::MCP: {
      const double den = w - 1.0 / p.theta;
      if (std::abs(den) > 1e-15) out.push_back((w * v - a) / den);
      out.push_back(v);
      break;
    }
    case Penalty::CappedL1:
      out.push_back(v - a / w);
      out.push_back(v);
      break;
    case Penalty::LSP: {
      // w(t - v)(theta + t) + a = 0
      const double A = w, B = w * (p.theta - v), C = a - w * p.theta * v;
      const double disc = B * B - 4.0 * A * C;
      if (disc >= 0) {
        const double r = std::sqrt(disc);
        out.push_back((-B + r) / (2.0 * A));
        out.push_back((-B - r) / (2.0 * A));
      }
      break;
    }
  }
}

}  // namespace detail

/// Global minimizer of phi(x) + (w/2)(x - v)^2, by enumeration of the
/// piecewise closed-form candidates. Ties resolved toward smaller |x|.
inline double prox_scalar_penalty(double v, double w, const ScalarPenaltyParams& p) {
  p.validate();
  if (!(w > 0)) throw InvalidParameter("prox: weight must be positive");

  const double s = v >= 0 ? 1.0 : -1.0;
  const double av = std::abs(v);

  std::vector<double> cand;
  cand.push_back(0.0);
  cand.push_back(av);
  detail::penalty_breakpoints(p, cand);
  detail::penalty_stationary_points(p, av, w, cand);

  // minimizer lies in [0, |v|] on the positive ray
  double best_t = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  std::sort(cand.begin(), cand.end());
  for (double t : cand) {
    if (t < 0.0 || t > av) continue;
    const double val = penalty_value(p, t) + 0.5 * w * (t - av) * (t - av);
    if (val < best_val) {
      best_val = val;
      best_t = t;
    }
  }
  return s * best_t;
}

/// Minimizer of phi(x) + (w/2)(x - v)^2 over the interval [lo, hi].
inline double prox_scalar_penalty_box(double v, double w, const ScalarPenaltyParams& p,
                                      double lo, double hi) {
  p.validate();
  if (!(w > 0)) throw InvalidParameter("prox: weight must be positive");
  if (lo > hi) throw InvalidParameter("prox box: lo > hi");

  std::vector<double> cand{lo, hi, 0.0, v};
  std::vector<double> pos;
  detail::penalty_breakpoints(p, pos);
  for (double t : pos) {
    cand.push_back(t);
    cand.push_back(-t);
  }
  // stationary points on both rays; the negative ray is the positive-ray
  // problem with v -> -v, mirrored
  std::vector<double> st;
  detail::penalty_stationary_points(p, v, w, st);
  for (double t : st) cand.push_back(t);
  st.clear();
  detail::penalty_stationary_points(p, -v, w, st);
  for (double t : st) cand.push_back(-t);

  double best_x = lo;
  double best_val = std::numeric_limits<double>::infinity();
  std::sort(cand.begin(), cand.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b);
  });
  for (double x : cand) {
    x = std::clamp(x, lo, hi);
    const double val = penalty_value(p, x) + 0.5 * w * (x - v) * (x - v);
    if (val < best_val) {
      best_val = val;
      best_x = x;
    }
  }
  return best_x;
}

/// Distance from g to the general subdifferential of phi at x.
inline double dist_to_scalar_subdiff(const ScalarPenaltyParams& p, double x, double g) {
  if (x == 0.0) {
    const double c = penalty_slope_at_zero(p);
    return std::max(std::abs(g) - c, 0.0);
  }
  const double sgn = x > 0 ? 1.0 : -1.0;
  const double t = std::abs(x);
  if (p.variant == Penalty::CappedL1 && t == p.theta) {
    // concave kink: limiting subgradients are the two one-sided slopes
    return std::min(std::abs(g), std::abs(g - sgn * p.alpha));
  }
  return std::abs(g - sgn * penalty_derivative_pos(p, t));
}

/// One element of the subdifferential of phi at x (0 at the origin).
inline double scalar_subgrad_select(const ScalarPenaltyParams& p, double x) {
  if (x == 0.0) return 0.0;
  const double sgn = x > 0 ? 1.0 : -1.0;
  if (p.variant == Penalty::CappedL1 && std::abs(x) == p.theta) return 0.0;
  return sgn * penalty_derivative_pos(p, std::abs(x));
}

// ---------------------------------------------------------------------------

/// Coordinatewise sign(v_j) max(|v_j| - tau, 0): the exact minimizer of
/// tau ||x||_1 + (1/2) ||x - v||^2.
inline Vector soft_threshold(const Vector& v, double tau) {
  if (!(tau > 0)) throw InvalidParameter("soft_threshold: tau must be positive");
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]) - tau;
    out[j] = a > 0 ? (v[j] > 0 ? a : -a) : 0.0;
  }
  return out;
}

inline double soft_threshold(double v, double tau) {
  if (!(tau > 0)) throw InvalidParameter("soft_threshold: tau must be positive");
  const double a = std::abs(v) - tau;
  return a > 0 ? (v > 0 ? a : -a) : 0.0;
}

/// Euclidean projection onto the ball of the given radius centered at 0.
inline Vector project_ball(const Vector& v, double radius) {
  if (!(radius > 0)) throw InvalidParameter("project_ball: radius must be positive");
  const double n = v.norm();
  if (n <= radius) return v;
  return v * (radius / n);
}

/// Coordinatewise clamp onto [lo, hi].
inline Vector project_box(const Vector& v, const Vector& lo, const Vector& hi) {
  if (v.size() != lo.size() || v.size() != hi.size())
    throw DimensionError("project_box: size mismatch");
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (lo[j] > hi[j]) throw InvalidParameter("project_box: lo > hi");
    out[j] = std::clamp(v[j], lo[j], hi[j]);
  }
  return out;
}

}  // namespace nsopt
