#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "nsopt/prox.hpp"

namespace nsopt {

/// A constraint set X_i (or S): projection, linear minimization oracle,
/// p-diameter, membership.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  virtual Vector project(const Vector& v) const = 0;

  /// argmin_{y in set} c^T y, deterministic tie rule
  virtual Vector lmo(const Vector& c) const = 0;

  /// diam_p = max_{x,y in set} ||x - y||_p
  virtual double diameter_p(double p) const = 0;

  virtual bool contains(const Vector& x, double tol) const = 0;

  virtual bool is_whole_space() const { return false; }
  virtual bool is_bounded() const { return true; }

  virtual Eigen::Index dim() const = 0;
};

using ConstraintSetPtr = std::shared_ptr<const ConstraintSet>;

class WholeSpace final : public ConstraintSet {
 public:
  explicit WholeSpace(Eigen::Index n) : n_(n) {
    if (n <= 0) throw InvalidParameter("WholeSpace: dim must be positive");
  }
  Vector project(const Vector& v) const override { return v; }
  Vector lmo(const Vector& c) const override {
    if (c.size() != n_) throw DimensionError("lmo: size mismatch");
    if (c.norm() == 0.0) return Vector::Zero(n_);
    throw UnsupportedPairing("lmo over the whole space is unbounded for nonzero c");
  }
  double diameter_p(double) const override { return std::numeric_limits<double>::infinity(); }
  bool contains(const Vector& x, double) const override { return x.size() == n_; }
  bool is_whole_space() const override { return true; }
  bool is_bounded() const override { return false; }
  Eigen::Index dim() const override { return n_; }

 private:
  Eigen::Index n_;
};

/// Euclidean ball of given radius centered at the origin.
class Ball final : public ConstraintSet {
 public:
  Ball(Eigen::Index n, double radius) : n_(n), radius_(radius) {
    if (n <= 0) throw InvalidParameter("Ball: dim must be positive");
    if (!(radius > 0)) throw InvalidParameter("Ball: radius must be positive");
  }
  Vector project(const Vector& v) const override {
    if (v.size() != n_) throw DimensionError("project: size mismatch");
    return project_ball(v, radius_);
  }
  Vector lmo(const Vector& c) const override {
    if (c.size() != n_) throw DimensionError("lmo: size mismatch");
    const double n = c.norm();
    if (n == 0.0) return Vector::Zero(n_);
    return c * (-radius_ / n);
  }
  double diameter_p(double p) const override {
    if (!(p >= 1)) throw InvalidParameter("diameter_p: p must be >= 1");
    // max ||x - y||_p over the l2 ball: attained at antipodal +-radius e
    // aligned to the l2/lp norm-ratio extremizer
    if (p >= 2) return 2.0 * radius_;
    return 2.0 * radius_ * std::pow(static_cast<double>(n_), 1.0 / p - 0.5);
  }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == n_ && x.norm() <= radius_ + tol;
  }
  Eigen::Index dim() const override { return n_; }
  double radius() const { return radius_; }

 private:
  Eigen::Index n_;
  double radius_;
};

class Box final : public ConstraintSet {
 public:
  Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw DimensionError("Box: lo/hi size mismatch");
    if (lo_.size() == 0) throw InvalidParameter("Box: dim must be positive");
    for (Eigen::Index j = 0; j < lo_.size(); ++j)
      if (lo_[j] > hi_[j]) throw InvalidParameter("Box: lo > hi");
  }
  static Box cube(Eigen::Index n, double lo, double hi) {
    return Box(Vector::Constant(n, lo), Vector::Constant(n, hi));
  }
  Vector project(const Vector& v) const override { return project_box(v, lo_, hi_); }
  Vector lmo(const Vector& c) const override {
    if (c.size() != lo_.size()) throw DimensionError("lmo: size mismatch");
    Vector y(c.size());
    // ties (c_j = 0) go to the lower corner
    for (Eigen::Index j = 0; j < c.size(); ++j) y[j] = c[j] > 0 ? lo_[j] : (c[j] < 0 ? hi_[j] : lo_[j]);
    return y;
  }
  double diameter_p(double p) const override {
    if (!(p >= 1)) throw InvalidParameter("diameter_p: p must be >= 1");
    double s = 0.0;
    for (Eigen::Index j = 0; j < lo_.size(); ++j) s += std::pow(hi_[j] - lo_[j], p);
    return std::pow(s, 1.0 / p);
  }
  bool contains(const Vector& x, double tol) const override {
    if (x.size() != lo_.size()) return false;
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (x[j] < lo_[j] - tol || x[j] > hi_[j] + tol) return false;
    return true;
  }
  Eigen::Index dim() const override { return lo_.size(); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }

 private:
  Vector lo_, hi_;
};

inline ConstraintSetPtr make_whole_space(Eigen::Index n) { return std::make_shared<WholeSpace>(n); }
inline ConstraintSetPtr make_ball(Eigen::Index n, double radius) {
  return std::make_shared<Ball>(n, radius);
}
inline ConstraintSetPtr make_box(Vector lo, Vector hi) {
  return std::make_shared<Box>(std::move(lo), std::move(hi));
}
inline ConstraintSetPtr make_cube(Eigen::Index n, double lo, double hi) {
  return std::make_shared<Box>(Box::cube(n, lo, hi));
}

}  // namespace nsopt
