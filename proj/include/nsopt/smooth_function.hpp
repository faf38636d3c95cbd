#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nsopt/block_vector.hpp"
#include "nsopt/errors.hpp"

namespace nsopt {

/// The smooth coupling f(x_1, ..., x_N) with its smoothness certificates:
/// Lipschitz constant L of the full gradient, and the Holder pair (p, rho)
/// with f(y) <= f(x) + grad(x)^T (y-x) + (rho/2) ||y-x||_p^p. For a
/// Lipschitz gradient, p = 2 and rho = L.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;

  virtual double eval(const BlockVector& x) const = 0;
  virtual Vector grad_block(int i, const BlockVector& x) const = 0;

  virtual BlockVector grad_full(const BlockVector& x) const {
    BlockVector g;
    g.blocks.reserve(static_cast<size_t>(x.num_blocks()));
    for (int i = 0; i < x.num_blocks(); ++i) g.blocks.push_back(grad_block(i, x));
    return g;
  }

  virtual double lipschitz_L() const = 0;
  virtual double holder_p() const { return 2.0; }
  virtual double holder_rho() const { return lipschitz_L(); }

  virtual int num_blocks() const = 0;
  virtual Eigen::Index block_dim(int i) const = 0;

 protected:
  void check_dims(const BlockVector& x) const {
    if (x.num_blocks() != num_blocks()) throw DimensionError("SmoothFunction: block count");
    for (int i = 0; i < num_blocks(); ++i)
      if (x.dim(i) != block_dim(i)) throw DimensionError("SmoothFunction: block dim");
  }
};

using SmoothFunctionPtr = std::shared_ptr<const SmoothFunction>;

/// f(x) = (1/2) || sum_i C_i x_i - d ||^2, with L the largest eigenvalue of
/// the stacked [C_1 ... C_N] Gram matrix.
class QuadraticCoupling final : public SmoothFunction {
 public:
  QuadraticCoupling(std::vector<Matrix> C, Vector d) : C_(std::move(C)), d_(std::move(d)) {
    if (C_.empty()) throw InvalidParameter("QuadraticCoupling: no blocks");
    Eigen::Index cols = 0;
    for (const auto& c : C_) {
      if (c.rows() != d_.size()) throw DimensionError("QuadraticCoupling: row mismatch");
      cols += c.cols();
    }
    Matrix stacked(d_.size(), cols);
    Eigen::Index off = 0;
    for (const auto& c : C_) {
      stacked.middleCols(off, c.cols()) = c;
      off += c.cols();
    }
    Eigen::JacobiSVD<Matrix> svd(stacked);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    L_ = smax * smax;
  }

  double eval(const BlockVector& x) const override { return 0.5 * residual(x).squaredNorm(); }

  Vector grad_block(int i, const BlockVector& x) const override {
    return C_[static_cast<size_t>(i)].transpose() * residual(x);
  }

  double lipschitz_L() const override { return L_; }
  int num_blocks() const override { return static_cast<int>(C_.size()); }
  Eigen::Index block_dim(int i) const override { return C_[static_cast<size_t>(i)].cols(); }

  Vector residual(const BlockVector& x) const {
    check_dims(x);
    Vector r = -d_;
    for (int i = 0; i < num_blocks(); ++i) r += C_[static_cast<size_t>(i)] * x[i];
    return r;
  }

  const Matrix& C(int i) const { return C_[static_cast<size_t>(i)]; }
  const Vector& d() const { return d_; }

 private:
  std::vector<Matrix> C_;
  Vector d_;
  double L_;
};

/// f(x) = -(1/2) ||x - c||^2, a concave single-block function (L = 1).
class ConcaveQuadratic final : public SmoothFunction {
 public:
  explicit ConcaveQuadratic(Vector c) : c_(std::move(c)) {
    if (c_.size() == 0) throw InvalidParameter("ConcaveQuadratic: empty center");
  }
  double eval(const BlockVector& x) const override {
    check_dims(x);
    return -0.5 * (x[0] - c_).squaredNorm();
  }
  Vector grad_block(int i, const BlockVector& x) const override {
    check_dims(x);
    if (i != 0) throw DimensionError("ConcaveQuadratic: single block");
    return c_ - x[0];
  }
  double lipschitz_L() const override { return 1.0; }
  int num_blocks() const override { return 1; }
  Eigen::Index block_dim(int) const override { return c_.size(); }
  const Vector& center() const { return c_; }

 private:
  Vector c_;
};

/// f(x) = c^T x, single block. Linear, so any positive rho certifies the
/// Holder bound; we report a tiny one.
class LinearSmooth final : public SmoothFunction {
 public:
  explicit LinearSmooth(Vector c) : c_(std::move(c)) {
    if (c_.size() == 0) throw InvalidParameter("LinearSmooth: empty coefficient");
  }
  double eval(const BlockVector& x) const override {
    check_dims(x);
    return c_.dot(x[0]);
  }
  Vector grad_block(int i, const BlockVector& x) const override {
    check_dims(x);
    if (i != 0) throw DimensionError("LinearSmooth: single block");
    return c_;
  }
  double lipschitz_L() const override { return 1e-12; }
  double holder_rho() const override { return 1e-12; }
  int num_blocks() const override { return 1; }
  Eigen::Index block_dim(int) const override { return c_.size(); }

 private:
  Vector c_;
};

}  // namespace nsopt
