#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nsopt/block_vector.hpp"
#include "nsopt/constraint_set.hpp"
#include "nsopt/errors.hpp"
#include "nsopt/regularizer.hpp"
#include "nsopt/smooth_function.hpp"

namespace nsopt {

enum class Setting { One, Two };

/// Proximal weight matrix H_i with its precomputed spectral data.
struct ProxTerm {
  Matrix H;                    // used when scaled_identity is false
  bool scaled_identity = true;
  double scale = 0.0;          // H = scale * I when scaled_identity
  double sigma_min = 0.0;
  double norm2 = 0.0;

  Vector apply(const Vector& v) const { return scaled_identity ? Vector(scale * v) : Vector(H * v); }
  double quad(const Vector& d) const {
    return 0.5 * (scaled_identity ? scale * d.squaredNorm() : d.dot(H * d));
  }
};

inline ProxTerm make_scaled_identity_prox(double scale) {
  if (!(scale > 0)) throw InvalidParameter("ProxTerm: scale must be positive");
  ProxTerm t;
  t.scaled_identity = true;
  t.scale = scale;
  t.sigma_min = scale;
  t.norm2 = scale;
  return t;
}

inline ProxTerm make_prox_term(const Matrix& H) {
  if (H.rows() != H.cols()) throw InvalidParameter("ProxTerm: H must be square");
  if (!H.isApprox(H.transpose(), 1e-12)) throw InvalidParameter("ProxTerm: H must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const double smin = es.eigenvalues().minCoeff();
  if (!(smin > 0)) throw InvalidParameter("ProxTerm: H must be positive definite");
  ProxTerm t;
  t.H = H;
  t.scaled_identity = false;
  t.scale = 0.0;
  t.sigma_min = smin;
  t.norm2 = es.eigenvalues().maxCoeff();
  return t;
}

struct ProblemSpec;

/// One block subproblem handed to a registered exact solver: minimize over
/// X_i the augmented Lagrangian in x_i plus (1/2)||x_i - anchor||^2_H, with
/// all other blocks frozen at x. For the unconstrained BCD form, beta = 0
/// and lambda is empty.
struct BlockSubproblem {
  const ProblemSpec& prob;
  int i;
  const BlockVector& x;
  const Vector& lambda;
  double beta;
  const ProxTerm& prox;
  const Vector& anchor;
};

/// Exact minimizer of a block subproblem, optionally carrying the
/// subgradient of r_i certified by the optimality condition at the solution.
struct BlockSolveResult {
  Vector x;
  std::optional<Vector> reg_subgrad;
};

using BlockSolver = std::function<BlockSolveResult(const BlockSubproblem&)>;

/// Problem data: smooth coupling f, per-block regularizers r_i (a
/// ZeroRegularizer stands in where a block is unregularized), constraint
/// sets X_i, optional affine coupling sum_i A_i x_i = b, setting tag, and
/// the lower bound f* used by the iteration-bound calculators.
struct ProblemSpec {
  SmoothFunctionPtr f;
  std::vector<RegularizerPtr> regs;
  std::vector<ConstraintSetPtr> sets;
  std::vector<Matrix> A;  // empty when there is no affine constraint
  Vector b;
  Setting setting = Setting::Two;
  double f_star = -1e12;
  std::vector<BlockSolver> block_solvers;  // empty, or one entry per block

  int num_blocks() const { return static_cast<int>(sets.size()); }
  Eigen::Index dim(int i) const { return sets[static_cast<size_t>(i)]->dim(); }
  bool has_affine() const { return !A.empty(); }
  Eigen::Index m() const { return b.size(); }

  void check_point(const BlockVector& x) const {
    if (x.num_blocks() != num_blocks()) throw DimensionError("point: block count mismatch");
    for (int i = 0; i < num_blocks(); ++i)
      if (x.dim(i) != dim(i)) throw DimensionError("point: block dim mismatch");
  }

  Vector affine_residual(const BlockVector& x) const {
    check_point(x);
    if (!has_affine()) throw AssumptionViolation("problem has no affine constraint");
    Vector r = -b;
    for (int i = 0; i < num_blocks(); ++i) r += A[static_cast<size_t>(i)] * x[i];
    return r;
  }

  double sum_reg_lower_bounds() const {
    double s = 0.0;
    for (const auto& r : regs) s += r->lower_bound();
    return s;
  }

  void validate() const {
    if (!f) throw InvalidParameter("problem: missing smooth function");
    const int N = num_blocks();
    if (N < 1) throw InvalidParameter("problem: need at least one block");
    if (static_cast<int>(regs.size()) != N) throw DimensionError("problem: regs count != N");
    if (f->num_blocks() != N) throw DimensionError("problem: f block count != N");
    for (int i = 0; i < N; ++i)
      if (f->block_dim(i) != dim(i)) throw DimensionError("problem: f block dim mismatch");
    if (has_affine()) {
      if (static_cast<int>(A.size()) != N) throw DimensionError("problem: affine matrix count != N");
      for (int i = 0; i < N; ++i) {
        const auto& Ai = A[static_cast<size_t>(i)];
        if (Ai.rows() != b.size()) throw DimensionError("problem: A_i row count != len(b)");
        if (Ai.cols() != dim(i)) throw DimensionError("problem: A_i column count != n_i");
      }
    }
    if (!block_solvers.empty() && static_cast<int>(block_solvers.size()) != N)
      throw DimensionError("problem: block_solvers count != N");
    if (setting == Setting::One) {
      for (int i = 0; i < N; ++i) {
        if (!sets[static_cast<size_t>(i)]->is_bounded())
          throw InvalidParameter("Setting 1 requires bounded constraint sets");
        if (!regs[static_cast<size_t>(i)]->lipschitz_const())
          throw InvalidParameter("Setting 1 requires Lipschitz regularizers");
      }
    } else {
      for (int i = 0; i < N; ++i)
        if (!sets[static_cast<size_t>(i)]->is_whole_space())
          throw InvalidParameter("Setting 2 requires unconstrained blocks");
    }
  }
};

inline double eval_objective(const ProblemSpec& p, const BlockVector& x) {
  p.check_point(x);
  double v = p.f->eval(x);
  for (int i = 0; i < p.num_blocks(); ++i) v += p.regs[static_cast<size_t>(i)]->eval(x[i]);
  if (!std::isfinite(v)) throw AssumptionViolation("objective is not finite");
  return v;
}

inline double eval_aug_lagrangian(const ProblemSpec& p, const BlockVector& x, const Vector& lambda,
                                  double beta) {
  if (!(beta > 0)) throw InvalidParameter("aug lagrangian: beta must be positive");
  if (lambda.size() != p.m()) throw DimensionError("aug lagrangian: lambda length");
  const Vector r = p.affine_residual(x);
  return eval_objective(p, x) - lambda.dot(r) + 0.5 * beta * r.squaredNorm();
}

/// Closed-form exact solver for block i when f is a QuadraticCoupling and
/// the block objective reduces to a strongly convex quadratic plus a
/// separable penalty. Handles: zero regularizer over any set with a
/// projection-free quadratic (whole space), and separable penalties when
/// the quadratic is diagonal (whole space or box).
inline BlockSolver make_quadratic_block_solver() {
  return [](const BlockSubproblem& sp) -> BlockSolveResult {
    const auto* q = dynamic_cast<const QuadraticCoupling*>(sp.prob.f.get());
    if (!q) throw UnsupportedPairing("quadratic block solver requires a QuadraticCoupling f");
    const int i = sp.i;
    const Eigen::Index n = sp.prob.dim(i);
    const auto& Ci = q->C(i);

    // residual of f with block i removed
    Vector rf = q->residual(sp.x) - Ci * sp.x[i];
    Matrix Q = Ci.transpose() * Ci;
    Vector l = -Ci.transpose() * rf;

    if (sp.beta > 0) {
      const auto& Ai = sp.prob.A[static_cast<size_t>(i)];
      Vector ra = sp.prob.affine_residual(sp.x) - Ai * sp.x[i];
      Q += sp.beta * Ai.transpose() * Ai;
      l += Ai.transpose() * sp.lambda - sp.beta * Ai.transpose() * ra;
    }
    if (sp.prox.scaled_identity) {
      Q += sp.prox.scale * Matrix::Identity(n, n);
      l += sp.prox.scale * sp.anchor;
    } else {
      Q += sp.prox.H;
      l += sp.prox.H * sp.anchor;
    }

    const auto& reg = *sp.prob.regs[static_cast<size_t>(i)];
    const auto& set = *sp.prob.sets[static_cast<size_t>(i)];

    if (reg.is_zero() && set.is_whole_space()) {
      Eigen::LDLT<Matrix> ldlt(Q);
      if (ldlt.info() != Eigen::Success)
        throw AssumptionViolation("block subproblem quadratic is not positive definite");
      BlockSolveResult res;
      res.x = ldlt.solve(l);
      res.reg_subgrad = Vector::Zero(n);
      return res;
    }

    const double offdiag = (Q - Matrix(Q.diagonal().asDiagonal())).norm();
    if (offdiag > 1e-12 * (1.0 + Q.norm()))
      throw UnsupportedPairing(
          "separable penalty with a non-diagonal block quadratic has no exact solver");
    const auto params = reg.scalar_params();
    if (!params && !reg.is_zero())
      throw UnsupportedPairing("exact block solver supports only separable scalar penalties");

    const auto* box = dynamic_cast<const Box*>(&set);
    if (!set.is_whole_space() && !box)
      throw UnsupportedPairing("exact block solver supports whole-space or box sets only");

    BlockSolveResult res;
    res.x.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = Q(j, j);
      if (!(w > 0)) throw AssumptionViolation("block subproblem quadratic is degenerate");
      const double v = l[j] / w;
      if (!params) {
        res.x[j] = box ? std::clamp(v, box->lo()[j], box->hi()[j]) : v;
      } else if (box) {
        res.x[j] = prox_scalar_penalty_box(v, w, *params, box->lo()[j], box->hi()[j]);
      } else {
        res.x[j] = prox_scalar_penalty(v, w, *params);
      }
    }
    if (set.is_whole_space()) res.reg_subgrad = l - Q * res.x;
    return res;
  };
}

}  // namespace nsopt
