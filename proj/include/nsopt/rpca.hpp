#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nsopt/problem.hpp"
#include "nsopt/rng.hpp"
#include "nsopt/tensor.hpp"

namespace nsopt {

/// min ||Z - [[A,B,C]]||^2 + alpha ||E||_1 + alpha_n ||N||_F^2
/// s.t. Z + E + N = T, with N the dense noise block.
struct RpcaParams {
  double alpha = 0.0;    // l1 weight, 2 / max(sqrt(I1), sqrt(I2), sqrt(I3))
  double alpha_n = 1.0;  // noise weight
  double beta = 4.0;     // penalty (ADMM only)
  double gamma = 0.25;   // noise-block gradient step (ADMM-g)
  double delta[5] = {2.0, 2.0, 2.0, 2.0, 2.0};  // H_i = delta_i I
  double L = 2.0;  // majorization constant of the noise block, 2 alpha_n (ADMM-m)

  static double default_alpha(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) {
    return 2.0 / std::sqrt(static_cast<double>(std::max({i1, i2, i3})));
  }
  static RpcaParams admm_g_bench(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) {
    RpcaParams p;
    p.alpha = default_alpha(i1, i2, i3);
    p.beta = 4.0;
    p.gamma = 1.0 / p.beta;
    for (double& d : p.delta) d = 0.5 * p.beta;
    return p;
  }
  static RpcaParams admm_m_bench(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) {
    RpcaParams p;
    p.alpha = default_alpha(i1, i2, i3);
    p.beta = 5.0;
    p.gamma = 0.0;
    for (double& d : p.delta) d = 0.4 * p.beta;
    p.L = 2.0 * p.alpha_n;
    return p;
  }
  static RpcaParams bcd_default(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3,
                                bool proximal) {
    RpcaParams p;
    p.alpha = default_alpha(i1, i2, i3);
    for (double& d : p.delta) d = proximal ? 1.0 : 0.0;
    return p;
  }
};

struct RpcaState {
  Matrix A, B, C;
  Tensor3 E, Z, Noise, Lambda;
  int k = 0;
  bool pinv_used = false;  // a singular factor Gram was solved by pseudo-inverse
};

inline RpcaState rpca_init(const Tensor3& T, Eigen::Index R, Rng& rng) {
  if (R < 1) throw InvalidParameter("rpca_init: R must be >= 1");
  RpcaState s;
  s.A = normal_matrix(rng, T.dim(0), R);
  s.B = normal_matrix(rng, T.dim(1), R);
  s.C = normal_matrix(rng, T.dim(2), R);
  s.Z = Tensor3(T.dim(0), T.dim(1), T.dim(2));
  s.E = Tensor3(T.dim(0), T.dim(1), T.dim(2));
  s.Noise = Tensor3(T.dim(0), T.dim(1), T.dim(2));
  s.Lambda = Tensor3(T.dim(0), T.dim(1), T.dim(2));
  return s;
}

namespace detail {

/// X = (P + (d/2) Anchor) (G + (d/2) I)^{-1}, the ridge-regularized factor
/// update. d = 0 falls back to the pseudo-inverse when G is singular.
inline Matrix factor_update(const Matrix& P, const Matrix& G, const Matrix& anchor, double d,
                            bool& pinv_used) {
  const Eigen::Index R = G.rows();
  const Matrix Gd = G + 0.5 * d * Matrix::Identity(R, R);
  const Matrix rhs = P + 0.5 * d * anchor;
  if (d > 0) {
    Eigen::LLT<Matrix> llt(Gd);
    if (llt.info() == Eigen::Success) return llt.solve(rhs.transpose()).transpose();
  }
  Eigen::LDLT<Matrix> ldlt(Gd);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.vectorD().minCoeff() > 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
    return ldlt.solve(rhs.transpose()).transpose();
  pinv_used = true;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Gd);
  return cod.solve(rhs.transpose()).transpose();
}

inline void update_factors(RpcaState& s, const RpcaParams& prm) {
  const Matrix M1 = khatri_rao(s.C, s.B);
  const Matrix G1 = (s.C.transpose() * s.C).cwiseProduct(s.B.transpose() * s.B);
  s.A = factor_update(mode_unfold(s.Z, 1) * M1, G1, s.A, prm.delta[0], s.pinv_used);

  const Matrix M2 = khatri_rao(s.C, s.A);
  const Matrix G2 = (s.C.transpose() * s.C).cwiseProduct(s.A.transpose() * s.A);
  s.B = factor_update(mode_unfold(s.Z, 2) * M2, G2, s.B, prm.delta[1], s.pinv_used);

  const Matrix M3 = khatri_rao(s.B, s.A);
  const Matrix G3 = (s.B.transpose() * s.B).cwiseProduct(s.A.transpose() * s.A);
  s.C = factor_update(mode_unfold(s.Z, 3) * M3, G3, s.C, prm.delta[2], s.pinv_used);
}

inline Vector soft_vec(const Vector& v, double tau) {
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]) - tau;
    out[j] = a > 0 ? (v[j] > 0 ? a : -a) : 0.0;
  }
  return out;
}

}  // namespace detail

inline void rpca_check(const RpcaState& s, const Tensor3& T) {
  if (!s.Z.same_dims(T) || !s.E.same_dims(T) || !s.Noise.same_dims(T) || !s.Lambda.same_dims(T))
    throw DimensionError("rpca: tensor dims mismatch");
  if (s.A.rows() != T.dim(0) || s.B.rows() != T.dim(1) || s.C.rows() != T.dim(2))
    throw DimensionError("rpca: factor dims mismatch");
  if (s.A.cols() != s.B.cols() || s.A.cols() != s.C.cols() || s.A.cols() < 1)
    throw DimensionError("rpca: factor rank mismatch");
}

/// One iteration of proximal ADMM-g on the constrained model: factor
/// updates with ridge (delta_i / 2), soft shrinkage on E, closed-form Z,
/// gradient step on the noise block, dual update.
inline RpcaState rpca_admm_g_step(const RpcaState& s, const RpcaParams& prm, const Tensor3& T) {
  rpca_check(s, T);
  if (!(prm.beta > 0) || !(prm.gamma > 0))
    throw InvalidParameter("rpca admm-g: beta and gamma must be positive");
  RpcaState n = s;
  n.k = s.k + 1;
  detail::update_factors(n, prm);

  const double b = prm.beta, d4 = prm.delta[3], d5 = prm.delta[4];
  n.E.vec() = detail::soft_vec(
      (b / (b + d4)) * (T.vec() + s.Lambda.vec() / b - s.Noise.vec() - s.Z.vec()) +
          (d4 / (b + d4)) * s.E.vec(),
      prm.alpha / (b + d4));

  const Tensor3 rec = cp_reconstruct(n.A, n.B, n.C);
  n.Z.vec() = (2.0 * rec.vec() + 2.0 * d5 * s.Z.vec() + s.Lambda.vec() -
               b * (n.E.vec() + s.Noise.vec() - T.vec())) /
              (2.0 + 2.0 * d5 + b);

  n.Noise.vec() =
      s.Noise.vec() - prm.gamma * (2.0 * prm.alpha_n * s.Noise.vec() - s.Lambda.vec() +
                                   b * (n.E.vec() + n.Z.vec() + s.Noise.vec() - T.vec()));

  n.Lambda.vec() =
      s.Lambda.vec() - b * (n.Z.vec() + n.E.vec() + n.Noise.vec() - T.vec());
  return n;
}

/// Proximal ADMM-m iteration: identical except the noise block minimizes
/// its L-majorization; with L = 2 alpha_n the (L - 2 alpha_n) term drops.
inline RpcaState rpca_admm_m_step(const RpcaState& s, const RpcaParams& prm, const Tensor3& T) {
  rpca_check(s, T);
  if (!(prm.beta > 0) || !(prm.L > 0))
    throw InvalidParameter("rpca admm-m: beta and L must be positive");
  RpcaState n = s;
  n.k = s.k + 1;
  detail::update_factors(n, prm);

  const double b = prm.beta, d4 = prm.delta[3], d5 = prm.delta[4];
  n.E.vec() = detail::soft_vec(
      (b / (b + d4)) * (T.vec() + s.Lambda.vec() / b - s.Noise.vec() - s.Z.vec()) +
          (d4 / (b + d4)) * s.E.vec(),
      prm.alpha / (b + d4));

  const Tensor3 rec = cp_reconstruct(n.A, n.B, n.C);
  n.Z.vec() = (2.0 * rec.vec() + 2.0 * d5 * s.Z.vec() + s.Lambda.vec() -
               b * (n.E.vec() + s.Noise.vec() - T.vec())) /
              (2.0 + 2.0 * d5 + b);

  n.Noise.vec() = ((prm.L - 2.0 * prm.alpha_n) * s.Noise.vec() + s.Lambda.vec() -
                   b * (n.E.vec() + n.Z.vec() - T.vec())) /
                  (prm.L + b);

  n.Lambda.vec() =
      s.Lambda.vec() - b * (n.Z.vec() + n.E.vec() + n.Noise.vec() - T.vec());
  return n;
}

/// BCD / proximal BCD iteration on the unconstrained form
/// ||Z - [[A,B,C]]||^2 + alpha ||E||_1 + alpha_n ||Z + E - T||_F^2.
/// proximal = false zeroes all ridges (classical BCD).
inline RpcaState rpca_bcd_step(const RpcaState& s, const RpcaParams& prm, const Tensor3& T,
                               bool proximal) {
  rpca_check(s, T);
  RpcaState n = s;
  n.k = s.k + 1;
  RpcaParams eff = prm;
  if (!proximal)
    for (double& d : eff.delta) d = 0.0;
  detail::update_factors(n, eff);

  const double an = prm.alpha_n, d4 = eff.delta[3], d5 = eff.delta[4];
  n.E.vec() = detail::soft_vec(
      (2.0 * an * (T.vec() - s.Z.vec()) + d4 * s.E.vec()) / (2.0 * an + d4),
      prm.alpha / (2.0 * an + d4));

  const Tensor3 rec = cp_reconstruct(n.A, n.B, n.C);
  n.Z.vec() = (2.0 * rec.vec() + 2.0 * an * (T.vec() - n.E.vec()) + d5 * s.Z.vec()) /
              (2.0 + 2.0 * an + d5);
  return n;
}

inline double rpca_objective(const RpcaState& s, const RpcaParams& prm) {
  const Tensor3 rec = cp_reconstruct(s.A, s.B, s.C);
  return (s.Z - rec).squaredNorm() + prm.alpha * s.E.vec().lpNorm<1>() +
         prm.alpha_n * s.Noise.squaredNorm();
}

inline double rpca_aug_lagrangian(const RpcaState& s, const RpcaParams& prm, const Tensor3& T) {
  const Vector res = s.Z.vec() + s.E.vec() + s.Noise.vec() - T.vec();
  return rpca_objective(s, prm) - s.Lambda.vec().dot(res) +
         0.5 * prm.beta * res.squaredNorm();
}

inline double rpca_unconstrained_objective(const RpcaState& s, const RpcaParams& prm,
                                           const Tensor3& T) {
  const Tensor3 rec = cp_reconstruct(s.A, s.B, s.C);
  return (s.Z - rec).squaredNorm() + prm.alpha * s.E.vec().lpNorm<1>() +
         prm.alpha_n * (s.Z.vec() + s.E.vec() - T.vec()).squaredNorm();
}

// ---------------------------------------------------------------------------
// instance generation and metrics

struct RpcaInstance {
  Tensor3 T, Z0, E0, B0;
  Eigen::Index cardinality = 0;
  bool cardinality_zero = false;
};

/// Z0 = sum of R_cp standard-normal rank-one terms; E0 sparse with
/// round(0.001 I1 I2 I3) distinct standard-normal entries (positions by
/// reservoir selection); B0 = 0.001 x standard-normal; T = Z0 + E0 + B0.
inline RpcaInstance generate_instance(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3,
                                      Eigen::Index r_cp, Rng& rng) {
  if (r_cp < 1) throw InvalidParameter("generate_instance: R_cp must be >= 1");
  RpcaInstance inst;
  inst.Z0 = Tensor3(i1, i2, i3);
  for (Eigen::Index r = 0; r < r_cp; ++r) {
    const Vector a = normal_vector(rng, i1);
    const Vector b = normal_vector(rng, i2);
    const Vector c = normal_vector(rng, i3);
    for (Eigen::Index k3 = 0; k3 < i3; ++k3)
      for (Eigen::Index k2 = 0; k2 < i2; ++k2)
        for (Eigen::Index k1 = 0; k1 < i1; ++k1)
          inst.Z0.at(k1, k2, k3) += a[k1] * b[k2] * c[k3];
  }

  const Eigen::Index total = i1 * i2 * i3;
  inst.cardinality = static_cast<Eigen::Index>(
      std::llround(0.001 * static_cast<double>(total)));
  inst.cardinality_zero = inst.cardinality == 0;
  inst.E0 = Tensor3(i1, i2, i3);
  if (inst.cardinality > 0) {
    std::vector<Eigen::Index> pos(static_cast<size_t>(inst.cardinality));
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      if (idx < inst.cardinality) {
        pos[static_cast<size_t>(idx)] = idx;
      } else {
        std::uniform_int_distribution<Eigen::Index> pick(0, idx);
        const Eigen::Index j = pick(rng);
        if (j < inst.cardinality) pos[static_cast<size_t>(j)] = idx;
      }
    }
    std::sort(pos.begin(), pos.end());
    for (Eigen::Index p : pos) inst.E0.vec()[p] = standard_normal(rng);
  }

  inst.B0 = Tensor3(i1, i2, i3);
  inst.B0.vec() = 0.001 * normal_vector(rng, total);
  inst.T = inst.Z0 + inst.E0 + inst.B0;
  return inst;
}

inline double relative_error(const Tensor3& z_est, const Tensor3& z0) {
  if (!z_est.same_dims(z0)) throw DimensionError("relative_error: dim mismatch");
  const double denom = z0.norm();
  if (denom == 0.0) throw InvalidParameter("relative_error: reference tensor is zero");
  return (z_est - z0).norm() / denom;
}

// ---------------------------------------------------------------------------
// full solves with theta monitoring

enum class RpcaAlgorithm { AdmmG, AdmmM, Bcd, ProxBcd };

inline double rpca_sq_dist(const RpcaState& a, const RpcaState& b, bool with_noise) {
  double s = (a.A - b.A).squaredNorm() + (a.B - b.B).squaredNorm() +
             (a.C - b.C).squaredNorm() + (a.E - b.E).squaredNorm() +
             (a.Z - b.Z).squaredNorm();
  if (with_noise) s += (a.Noise - b.Noise).squaredNorm();
  return s;
}

struct RpcaRunResult {
  RpcaState best;   // state at argmin theta_k (stopping iteration when converged)
  RpcaState final;  // last computed state
  std::vector<double> merit;  // augmented Lagrangian (ADMM) or objective (BCD) per step
  std::vector<double> theta;  // theta_k for k = 1, 2, ...
  int iters = 0;
  int k_hat = 0;
  double theta_min = std::numeric_limits<double>::infinity();
  bool converged = false;
};

inline RpcaRunResult rpca_solve(const Tensor3& T, Eigen::Index R, const RpcaParams& prm,
                                RpcaAlgorithm algo, int max_iters, double theta_tol, Rng& rng) {
  const bool admm = algo == RpcaAlgorithm::AdmmG || algo == RpcaAlgorithm::AdmmM;
  RpcaRunResult res;
  RpcaState cur = rpca_init(T, R, rng);
  RpcaState prev = cur;
  res.best = cur;
  res.final = cur;

  auto step = [&](const RpcaState& s) {
    switch (algo) {
      case RpcaAlgorithm::AdmmG:
        return rpca_admm_g_step(s, prm, T);
      case RpcaAlgorithm::AdmmM:
        return rpca_admm_m_step(s, prm, T);
      case RpcaAlgorithm::Bcd:
        return rpca_bcd_step(s, prm, T, false);
      case RpcaAlgorithm::ProxBcd:
        return rpca_bcd_step(s, prm, T, true);
    }
    throw InvalidParameter("rpca_solve: unknown algorithm");
  };

  for (int k = 0; k < max_iters; ++k) {
    RpcaState next = step(cur);
    res.merit.push_back(admm ? rpca_aug_lagrangian(next, prm, T)
                             : rpca_unconstrained_objective(next, prm, T));
    res.iters = k + 1;
    if (k >= 1) {
      const double th = rpca_sq_dist(cur, next, admm) + rpca_sq_dist(prev, cur, admm);
      res.theta.push_back(th);
      if (th < res.theta_min) {
        res.theta_min = th;
        res.k_hat = k;
        res.best = cur;
      }
      if (th <= theta_tol) {
        res.converged = true;
        res.k_hat = k;
        res.best = cur;
        res.final = next;
        return res;
      }
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  res.final = cur;
  if (!std::isfinite(res.theta_min)) res.best = cur;
  return res;
}

// ---------------------------------------------------------------------------
// the smooth coupling as a SmoothFunction over vectorized blocks
// (A, B, C, Z, E, N); E enters only the nonsmooth part so its gradient
// block is zero.

class RpcaCoupling final : public SmoothFunction {
 public:
  /// local_L is a caller-supplied curvature estimate valid on the region of
  /// interest; the multilinear term has no global Lipschitz gradient.
  RpcaCoupling(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3, Eigen::Index R,
               double alpha_n, double local_L)
      : i1_(i1), i2_(i2), i3_(i3), R_(R), alpha_n_(alpha_n), L_(local_L) {
    if (i1 <= 0 || i2 <= 0 || i3 <= 0 || R <= 0)
      throw InvalidParameter("RpcaCoupling: positive dims required");
    if (!(local_L > 0)) throw InvalidParameter("RpcaCoupling: local_L must be positive");
  }

  double eval(const BlockVector& x) const override {
    check_dims(x);
    const Matrix A = mat(x[0], i1_), B = mat(x[1], i2_), C = mat(x[2], i3_);
    const Vector rec = (A * khatri_rao(C, B).transpose()).reshaped();
    return (x[3] - rec).squaredNorm() + alpha_n_ * x[5].squaredNorm();
  }

  Vector grad_block(int i, const BlockVector& x) const override {
    check_dims(x);
    const Matrix A = mat(x[0], i1_), B = mat(x[1], i2_), C = mat(x[2], i3_);
    const Matrix Z1 = Eigen::Map<const Matrix>(x[3].data(), i1_, i2_ * i3_);
    switch (i) {
      case 0: {
        const Matrix M = khatri_rao(C, B);
        return (-2.0 * (Z1 - A * M.transpose()) * M).reshaped();
      }
      case 1: {
        const Matrix M = khatri_rao(C, A);
        const Tensor3 z = mode_fold(Z1, 1, i1_, i2_, i3_);
        return (-2.0 * (mode_unfold(z, 2) - B * M.transpose()) * M).reshaped();
      }
      case 2: {
        const Matrix M = khatri_rao(B, A);
        const Tensor3 z = mode_fold(Z1, 1, i1_, i2_, i3_);
        return (-2.0 * (mode_unfold(z, 3) - C * M.transpose()) * M).reshaped();
      }
      case 3: {
        const Vector rec = (A * khatri_rao(C, B).transpose()).reshaped();
        return 2.0 * (x[3] - rec);
      }
      case 4:
        return Vector::Zero(x[4].size());
      case 5:
        return 2.0 * alpha_n_ * x[5];
      default:
        throw DimensionError("RpcaCoupling: bad block index");
    }
  }

  double lipschitz_L() const override { return L_; }
  int num_blocks() const override { return 6; }
  Eigen::Index block_dim(int i) const override {
    switch (i) {
      case 0: return i1_ * R_;
      case 1: return i2_ * R_;
      case 2: return i3_ * R_;
      default: return i1_ * i2_ * i3_;
    }
  }

 private:
  static Matrix mat(const Vector& v, Eigen::Index rows) {
    return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
  }
  Eigen::Index i1_, i2_, i3_, R_;
  double alpha_n_;
  double L_;
};

}  // namespace nsopt
