#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "nsopt/problem.hpp"

namespace nsopt {

enum class AdmmVariant { G, M };
enum class SubproblemMode { Exact, Linearized };

struct AdmmConfig {
  double beta = 1.0;
  double gamma = 0.0;  // last-block gradient step size (variant G)
  std::vector<ProxTerm> H;  // one per block 1..N-1
  int max_iters = 2000;
  double eps_theta = 1e-6;
  SubproblemMode mode = SubproblemMode::Exact;
  double sigma_n = 0.0;  // smallest eigenvalue of A_N A_N^T (variant M); computed when <= 0
};

struct AdmmState {
  BlockVector x;
  BlockVector x_prev;
  Vector lambda;
  int k = 0;
  double psi = 0.0;
  std::vector<std::optional<Vector>> reg_subgrads;
};

inline double op_norm_sq(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

inline double sigma_min_aat(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A * A.transpose());
  return es.eigenvalues().minCoeff();
}

/// beta > max( (18 sqrt(3) + 6) L / 13, max_i 6 L^2 / sigma_min(H_i) ),
/// gamma the midpoint of the admissible open interval, which simplifies to
/// 13 beta / (6 L^2 + beta L + 13 beta^2).
inline std::pair<double, double> admm_g_params(double L, const std::vector<ProxTerm>& H,
                                               double margin = 1.01) {
  if (!(L > 0)) throw InvalidParameter("admm_g_params: L must be positive");
  if (!(margin > 1)) throw InvalidParameter("admm_g_params: margin must exceed 1");
  if (H.empty()) throw InvalidParameter("admm_g_params: need at least one proximal term");
  double lo = (18.0 * std::sqrt(3.0) + 6.0) * L / 13.0;
  for (const auto& h : H) lo = std::max(lo, 6.0 * L * L / h.sigma_min);
  const double beta = margin * lo;
  const double disc = 13.0 * beta * beta - 12.0 * beta * L - 72.0 * L * L;
  if (!(disc > 0))
    throw AssumptionViolation("admm_g_params: gamma interval is empty (beta too small)");
  const double gamma = 13.0 * beta / (6.0 * L * L + beta * L + 13.0 * beta * beta);
  return {beta, gamma};
}

/// beta > max( 18 L / sigma_N, max_i 6 L^2 / (sigma_N sigma_min(H_i)) ).
inline double admm_m_params(double L, double sigma_n, const std::vector<ProxTerm>& H,
                            double margin = 1.01) {
  if (!(L > 0)) throw InvalidParameter("admm_m_params: L must be positive");
  if (!(sigma_n > 0)) throw InvalidParameter("admm_m_params: A_N must have full row rank");
  if (!(margin > 1)) throw InvalidParameter("admm_m_params: margin must exceed 1");
  if (H.empty()) throw InvalidParameter("admm_m_params: need at least one proximal term");
  double lo = 18.0 * L / sigma_n;
  for (const auto& h : H) lo = std::max(lo, 6.0 * L * L / (sigma_n * h.sigma_min));
  return margin * lo;
}

/// Exact or linearized minimization of one block subproblem of the
/// augmented Lagrangian (beta = 0 with an empty lambda gives the plain
/// objective, used by proximal BCD).
inline BlockSolveResult minimize_block(const ProblemSpec& p, int i, const BlockVector& x,
                                       const Vector& lambda, double beta, const ProxTerm& prox,
                                       const Vector& anchor, SubproblemMode mode) {
  if (mode == SubproblemMode::Exact) {
    if (p.block_solvers.empty() || !p.block_solvers[static_cast<size_t>(i)])
      throw AssumptionViolation("exact mode: no block solver registered for this block");
    BlockSubproblem sp{p, i, x, lambda, beta, prox, anchor};
    return p.block_solvers[static_cast<size_t>(i)](sp);
  }

  // linearized step: prox on r_i against the gradient of the smooth part of
  // the augmented Lagrangian at the current point, with step weight
  // h = L + beta ||A_i||_2^2 + sigma_min(H_i) so the effective proximal
  // weight dominates H_i
  Vector g = p.f->grad_block(i, x);
  double h = p.f->lipschitz_L() + prox.sigma_min;
  if (beta > 0) {
    const auto& Ai = p.A[static_cast<size_t>(i)];
    const Vector res = p.affine_residual(x);
    g += Ai.transpose() * (beta * res - lambda);
    h += beta * op_norm_sq(Ai);
  }
  const Vector v = anchor - g / h;
  const auto& reg = *p.regs[static_cast<size_t>(i)];
  const auto& set = *p.sets[static_cast<size_t>(i)];

  BlockSolveResult out;
  if (reg.is_zero()) {
    out.x = set.project(v);
    if (set.is_whole_space()) out.reg_subgrad = Vector::Zero(v.size());
  } else if (set.is_whole_space()) {
    out.x = reg.prox(v, h);
    out.reg_subgrad = -g - h * (out.x - anchor);
  } else if (const auto* box = dynamic_cast<const Box*>(&set)) {
    const auto params = reg.scalar_params();
    if (!params)
      throw UnsupportedPairing("linearized step: box set needs a separable scalar penalty");
    out.x.resize(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j)
      out.x[j] = prox_scalar_penalty_box(v[j], h, *params, box->lo()[j], box->hi()[j]);
  } else {
    throw UnsupportedPairing("linearized step: unsupported (regularizer, set) pairing");
  }
  return out;
}

inline double potential_psi_g(const ProblemSpec& p, const BlockVector& x, const Vector& lambda,
                              const Vector& xN_prev, double beta, double gamma) {
  if (!(gamma > 0)) throw InvalidParameter("potential: gamma must be positive");
  const double L = p.f->lipschitz_L();
  const double c = beta - 1.0 / gamma;
  const Vector d = x[p.num_blocks() - 1] - xN_prev;
  return eval_aug_lagrangian(p, x, lambda, beta) + (3.0 / beta) * (c * c + L * L) * d.squaredNorm();
}

inline double potential_psi_l(const ProblemSpec& p, const BlockVector& x, const Vector& lambda,
                              const Vector& xN_prev, double beta, double sigma_n) {
  if (!(sigma_n > 0)) throw InvalidParameter("potential: sigma_n must be positive");
  const double L = p.f->lipschitz_L();
  const Vector d = x[p.num_blocks() - 1] - xN_prev;
  return eval_aug_lagrangian(p, x, lambda, beta) +
         (6.0 * L * L / (beta * sigma_n)) * d.squaredNorm();
}

/// theta_k = sum_i ( ||x_i^k - x_i^{k+1}||^2 + ||x_i^{k-1} - x_i^k||^2 )
inline double theta(const BlockVector& x_km1, const BlockVector& x_k, const BlockVector& x_kp1) {
  return squared_distance(x_k, x_kp1) + squared_distance(x_km1, x_k);
}

inline double theta(const AdmmState& cur, const AdmmState& next) {
  if (cur.k < 1) throw InvalidParameter("theta: two prior iterates required");
  return theta(cur.x_prev, cur.x, next.x);
}

namespace detail {

inline void check_admm_common(const ProblemSpec& p, const AdmmConfig& cfg) {
  if (!p.has_affine()) throw AssumptionViolation("admm requires an affine constraint");
  if (p.num_blocks() < 2) throw InvalidParameter("admm: need at least two blocks");
  if (!(cfg.beta > 0)) throw InvalidParameter("admm: beta must be positive");
  if (static_cast<int>(cfg.H.size()) != p.num_blocks() - 1)
    throw InvalidParameter("admm: need one proximal term per block except the last");
  if (!p.regs.back()->is_zero())
    throw AssumptionViolation("admm: the last block must be unregularized");
}

inline AdmmState admm_step1(const ProblemSpec& p, const AdmmState& s, const AdmmConfig& cfg) {
  AdmmState next;
  next.x = s.x;
  next.x_prev = s.x;
  next.lambda = s.lambda;
  next.k = s.k + 1;
  next.reg_subgrads.assign(static_cast<size_t>(p.num_blocks()), std::nullopt);
  for (int i = 0; i + 1 < p.num_blocks(); ++i) {
    auto r = minimize_block(p, i, next.x, s.lambda, cfg.beta, cfg.H[static_cast<size_t>(i)],
                            s.x[i], cfg.mode);
    next.x[i] = std::move(r.x);
    next.reg_subgrads[static_cast<size_t>(i)] = std::move(r.reg_subgrad);
  }
  return next;
}

}  // namespace detail

/// One iteration of proximal gradient-based ADMM (requires A_N = I):
/// proximal block minimizations, a gradient step on the last block, then
/// the dual update.
inline AdmmState admm_g_step(const ProblemSpec& p, const AdmmState& s, const AdmmConfig& cfg) {
  detail::check_admm_common(p, cfg);
  if (!(cfg.gamma > 0)) throw InvalidParameter("admm-g: gamma must be positive");
  const int N = p.num_blocks();
  const auto& An = p.A[static_cast<size_t>(N - 1)];
  if (An.rows() != An.cols() || !An.isIdentity(1e-12))
    throw AssumptionViolation("admm-g requires A_N = I");

  AdmmState next = detail::admm_step1(p, s, cfg);

  // gradient step on x_N at (x_1^{k+1}, ..., x_{N-1}^{k+1}, x_N^k)
  const Vector res = p.affine_residual(next.x);
  const Vector gN = p.f->grad_block(N - 1, next.x) - s.lambda + cfg.beta * res;
  next.x[N - 1] = s.x[N - 1] - cfg.gamma * gN;
  next.reg_subgrads[static_cast<size_t>(N - 1)] = Vector::Zero(next.x[N - 1].size());

  next.lambda = s.lambda - cfg.beta * p.affine_residual(next.x);
  next.psi = potential_psi_g(p, next.x, next.lambda, s.x[N - 1], cfg.beta, cfg.gamma);
  return next;
}

/// One iteration of proximal majorized ADMM (A_N full row rank): the last
/// block minimizes the L-majorization, solved through the normal equations
/// (L I + beta A_N^T A_N) x_N = rhs.
inline AdmmState admm_m_step(const ProblemSpec& p, const AdmmState& s, const AdmmConfig& cfg) {
  detail::check_admm_common(p, cfg);
  const int N = p.num_blocks();
  const auto& An = p.A[static_cast<size_t>(N - 1)];
  const double L = p.f->lipschitz_L();

  AdmmState next = detail::admm_step1(p, s, cfg);

  // sum_{i<N} A_i x_i^{k+1} - b (x_N in next.x is still x_N^k here)
  const Vector res_wo_n = p.affine_residual(next.x) - An * s.x[N - 1];
  const Vector gN = p.f->grad_block(N - 1, next.x);
  const Matrix M =
      L * Matrix::Identity(An.cols(), An.cols()) + cfg.beta * An.transpose() * An;
  const Vector rhs = L * s.x[N - 1] - gN + An.transpose() * s.lambda -
                     cfg.beta * An.transpose() * res_wo_n;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success)
    throw AssumptionViolation("admm-m: last-block system is not positive definite");
  next.x[N - 1] = llt.solve(rhs);
  next.reg_subgrads[static_cast<size_t>(N - 1)] = Vector::Zero(next.x[N - 1].size());

  next.lambda = s.lambda - cfg.beta * p.affine_residual(next.x);
  const double sn = cfg.sigma_n > 0 ? cfg.sigma_n : sigma_min_aat(An);
  next.psi = potential_psi_l(p, next.x, next.lambda, s.x[N - 1], cfg.beta, sn);
  return next;
}

struct AdmmTrace {
  std::vector<double> psi;         // Psi after each step
  std::vector<double> theta;       // theta_k for k = 1, 2, ...
  std::vector<double> primal_res;  // ||sum A_i x_i - b|| after each step
};

struct AdmmResult {
  AdmmState best;   // iterate at k_hat = argmin theta_k, with its multiplier
  AdmmState final;  // last computed iterate
  AdmmTrace trace;
  int iters = 0;
  int k_hat = 0;
  double theta_min = std::numeric_limits<double>::infinity();
  bool converged = false;  // stopped on theta <= eps_theta
};

using AdmmObserver = std::function<void(const AdmmState&)>;

inline AdmmResult admm_solve(const ProblemSpec& p, const BlockVector& x0, const Vector& lambda0,
                             const AdmmConfig& cfg, AdmmVariant variant,
                             const AdmmObserver& observer = {}) {
  p.validate();
  p.check_point(x0);
  if (lambda0.size() != p.m()) throw DimensionError("admm_solve: lambda0 length");
  for (int i = 0; i < p.num_blocks(); ++i)
    if (!p.sets[static_cast<size_t>(i)]->contains(x0[i], 1e-8))
      throw AssumptionViolation("admm_solve: infeasible start");

  AdmmConfig c = cfg;
  if (variant == AdmmVariant::M && c.sigma_n <= 0) c.sigma_n = sigma_min_aat(p.A.back());

  AdmmResult res;
  AdmmState prev, cur;
  cur.x = x0;
  cur.x_prev = x0;
  cur.lambda = lambda0;
  res.best = cur;
  res.final = cur;
  if (cfg.max_iters == 0) return res;

  for (int k = 0; k < c.max_iters; ++k) {
    AdmmState next =
        variant == AdmmVariant::G ? admm_g_step(p, cur, c) : admm_m_step(p, cur, c);
    if (observer) observer(next);
    res.trace.psi.push_back(next.psi);
    res.trace.primal_res.push_back(p.affine_residual(next.x).norm());
    res.iters = k + 1;
    if (k >= 1) {
      const double th = theta(prev.x, cur.x, next.x);
      res.trace.theta.push_back(th);
      if (th < res.theta_min) {
        res.theta_min = th;
        res.k_hat = k;
        res.best = cur;
      }
      if (th <= c.eps_theta) {
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
  if (!std::isfinite(res.theta_min)) res.best = cur;  // single step, no theta yet
  return res;
}

// ---------------------------------------------------------------------------
// complexity constants and iteration bounds

struct ComplexityConstants {
  double kappa1 = 0, kappa2 = 0, kappa3 = 0, kappa4 = 0;
  double kappa5 = 0, kappa6 = 0;
  double tau = 0;
};

inline double min_sigma_min(const std::vector<ProxTerm>& H) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& h : H) v = std::min(v, h.sigma_min);
  return v;
}

inline double max_norm2(const std::vector<ProxTerm>& H) {
  double v = 0.0;
  for (const auto& h : H) v = std::max(v, h.norm2);
  return v;
}

inline ComplexityConstants admm_g_constants(double L, double beta, double gamma,
                                            const std::vector<ProxTerm>& H,
                                            double max_a_norm_sq, int N,
                                            double max_diam_sq = 0.0) {
  if (!(L > 0) || !(beta > 0) || !(gamma > 0))
    throw InvalidParameter("admm_g_constants: positive L, beta, gamma required");
  ComplexityConstants c;
  const double d = beta - 1.0 / gamma;
  c.kappa1 = 3.0 * (d * d + L * L) / (beta * beta);
  c.kappa2 = (std::abs(d) + L) * (std::abs(d) + L);
  c.kappa3 = max_diam_sq;
  const double k4b = L + beta * std::sqrt(static_cast<double>(N)) * max_a_norm_sq + max_norm2(H);
  c.kappa4 = k4b * k4b;
  double tau = -((L + beta) / 2.0 - 1.0 / gamma + (6.0 / beta) * d * d + 3.0 * L * L / beta);
  for (const auto& h : H) tau = std::min(tau, h.sigma_min / 2.0 - 3.0 * L * L / beta);
  c.tau = tau;
  return c;
}

inline ComplexityConstants admm_m_constants(double L, double beta, double sigma_n,
                                            const std::vector<ProxTerm>& H,
                                            double max_a_norm_sq, int N,
                                            double max_diam_sq = 0.0) {
  if (!(L > 0) || !(beta > 0) || !(sigma_n > 0))
    throw InvalidParameter("admm_m_constants: positive L, beta, sigma_n required");
  ComplexityConstants c;
  c.kappa1 = 6.0 * L * L / (beta * beta * sigma_n);
  c.kappa2 = 4.0 * L * L;
  c.kappa3 = max_diam_sq;
  const double k4b = L + beta * std::sqrt(static_cast<double>(N)) * max_a_norm_sq + max_norm2(H);
  c.kappa4 = k4b * k4b;
  double tau = L / 2.0 - 9.0 * L * L / (beta * sigma_n);
  for (const auto& h : H) tau = std::min(tau, h.sigma_min / 2.0 - 3.0 * L * L / (beta * sigma_n));
  c.tau = tau;
  return c;
}

inline ComplexityConstants bcd_constants(double L, const std::vector<ProxTerm>& H,
                                         double max_diam_sq, double tau) {
  if (!(L > 0)) throw InvalidParameter("bcd_constants: L must be positive");
  ComplexityConstants c;
  const double k5b = L + max_norm2(H);
  c.kappa5 = k5b * k5b;
  c.kappa6 = max_diam_sq;
  c.tau = tau;
  return c;
}

inline std::int64_t admm_iteration_bound(const ComplexityConstants& c, double psi1, double lower,
                                         double eps, Setting setting) {
  if (!(c.tau > 0)) throw InvalidParameter("iteration bound: tau <= 0 (beta below theoretical bound)");
  if (!(eps > 0)) throw InvalidParameter("iteration bound: eps must be positive");
  if (psi1 < lower) throw InvalidParameter("iteration bound: Psi_1 below its lower bound");
  const double top =
      std::max({c.kappa1, c.kappa2, setting == Setting::One ? c.kappa4 * c.kappa3 : c.kappa4});
  return static_cast<std::int64_t>(std::ceil(2.0 * top * (psi1 - lower) / (c.tau * eps * eps)));
}

inline std::int64_t bcd_iteration_bound(const ComplexityConstants& c, double psi1, double lower,
                                        double eps, Setting setting) {
  if (!(c.tau > 0)) throw InvalidParameter("iteration bound: tau <= 0 (beta below theoretical bound)");
  if (!(eps > 0)) throw InvalidParameter("iteration bound: eps must be positive");
  if (psi1 < lower) throw InvalidParameter("iteration bound: Psi_1 below its lower bound");
  const double top = setting == Setting::One ? c.kappa5 * c.kappa6 : c.kappa5;
  return static_cast<std::int64_t>(std::ceil(top * (psi1 - lower) / (c.tau * eps * eps)));
}

// ---------------------------------------------------------------------------
// proximal BCD

struct BcdResult {
  BlockVector x;
  std::vector<double> objective;  // F after each cycle
  std::vector<double> move_sq;    // sum_i ||x_i^k - x_i^{k+1}||^2 per cycle
  std::vector<std::optional<Vector>> reg_subgrads;
  int iters = 0;
  bool converged = false;
};

/// Algorithm: cyclic exact block minimization of F(x) + (1/2)||x_i -
/// x_i^k||^2_{H_i}, for problems with no affine coupling.
inline BcdResult proximal_bcd_solve(const ProblemSpec& p, const BlockVector& x0,
                                    const std::vector<ProxTerm>& H, int max_iters, double eps,
                                    SubproblemMode mode = SubproblemMode::Exact) {
  p.validate();
  p.check_point(x0);
  if (p.has_affine()) throw AssumptionViolation("proximal BCD expects no affine constraint");
  if (static_cast<int>(H.size()) != p.num_blocks())
    throw InvalidParameter("proximal BCD: one proximal term per block required");
  if (!(eps >= 0)) throw InvalidParameter("proximal BCD: eps must be nonnegative");

  BcdResult res;
  res.x = x0;
  res.reg_subgrads.assign(static_cast<size_t>(p.num_blocks()), std::nullopt);
  const Vector empty_lambda;

  for (int k = 0; k < max_iters; ++k) {
    BlockVector prev = res.x;
    for (int i = 0; i < p.num_blocks(); ++i) {
      auto r = minimize_block(p, i, res.x, empty_lambda, 0.0, H[static_cast<size_t>(i)], prev[i],
                              mode);
      res.x[i] = std::move(r.x);
      res.reg_subgrads[static_cast<size_t>(i)] = std::move(r.reg_subgrad);
    }
    res.iters = k + 1;
    res.objective.push_back(eval_objective(p, res.x));
    const double mv = squared_distance(prev, res.x);
    res.move_sq.push_back(mv);
    if (mv <= eps) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// reformulations

/// Smooth function on N + 1 blocks: the base function on the first N plus
/// (mu/2)||y||^2 on the appended block (mu = 0 gives a dummy block).
class ExtendedSmooth final : public SmoothFunction {
 public:
  ExtendedSmooth(SmoothFunctionPtr base, Eigen::Index extra_dim, double mu)
      : base_(std::move(base)), extra_dim_(extra_dim), mu_(mu) {
    if (!base_) throw InvalidParameter("ExtendedSmooth: missing base function");
    if (extra_dim_ <= 0) throw InvalidParameter("ExtendedSmooth: extra block must be nonempty");
    if (mu_ < 0) throw InvalidParameter("ExtendedSmooth: mu must be nonnegative");
  }

  double eval(const BlockVector& x) const override {
    check_dims(x);
    return base_->eval(head(x)) + 0.5 * mu_ * x[base_->num_blocks()].squaredNorm();
  }
  Vector grad_block(int i, const BlockVector& x) const override {
    check_dims(x);
    if (i == base_->num_blocks()) return mu_ * x[i];
    return base_->grad_block(i, head(x));
  }
  double lipschitz_L() const override { return std::max(base_->lipschitz_L(), mu_); }
  int num_blocks() const override { return base_->num_blocks() + 1; }
  Eigen::Index block_dim(int i) const override {
    return i == base_->num_blocks() ? extra_dim_ : base_->block_dim(i);
  }
  const SmoothFunctionPtr& base() const { return base_; }

 private:
  BlockVector head(const BlockVector& x) const {
    BlockVector h;
    h.blocks.assign(x.blocks.begin(), x.blocks.end() - 1);
    return h;
  }
  SmoothFunctionPtr base_;
  Eigen::Index extra_dim_;
  double mu_;
};

/// The dummy-block reformulation turning an unconstrained block problem
/// into the constrained form: A_i = 0 for the original blocks, a new last
/// block with A = I and the constraint x_{N+1} = b_dummy. Proximal ADMM-g
/// applied to this problem reduces to proximal BCD on the original.
inline ProblemSpec make_bcd_reformulation(const ProblemSpec& p, const Vector& b_dummy) {
  if (p.has_affine()) throw InvalidParameter("bcd reformulation expects no affine constraint");
  const Eigen::Index m = b_dummy.size();
  if (m <= 0) throw InvalidParameter("bcd reformulation: empty dummy block");
  const int N = p.num_blocks();

  ProblemSpec q;
  q.f = std::make_shared<ExtendedSmooth>(p.f, m, 0.0);
  q.regs = p.regs;
  q.regs.push_back(make_zero_reg());
  q.sets = p.sets;
  q.sets.push_back(make_whole_space(m));
  q.setting = p.setting;
  q.f_star = p.f_star;
  for (int i = 0; i < N; ++i) q.A.push_back(Matrix::Zero(m, p.dim(i)));
  q.A.push_back(Matrix::Identity(m, m));
  q.b = b_dummy;

  if (!p.block_solvers.empty()) {
    auto orig = std::make_shared<ProblemSpec>(p);
    for (int i = 0; i < N; ++i) {
      BlockSolver inner = p.block_solvers[static_cast<size_t>(i)];
      if (!inner) {
        q.block_solvers.push_back({});
        continue;
      }
      q.block_solvers.push_back([orig, inner, i, N](const BlockSubproblem& sp) {
        // A_i = 0, so the dual and penalty terms are constant in this block
        BlockVector head;
        head.blocks.assign(sp.x.blocks.begin(), sp.x.blocks.begin() + N);
        const Vector no_lambda;
        BlockSubproblem inner_sp{*orig, i, head, no_lambda, 0.0, sp.prox, sp.anchor};
        return inner(inner_sp);
      });
    }
    q.block_solvers.push_back({});
  }
  return q;
}

enum class PenaltySchedule { Standard, Fallback };

struct PenaltyResult {
  AdmmResult inner;        // run on the augmented problem (blocks x_1..x_N, y)
  double mu = 0;
  double beta = 0;
  std::int64_t k_theoretical = 0;
  double aug_residual = 0;   // ||sum A_i x_i + y - b|| at the certified point
  double orig_residual = 0;  // ||sum A_i x_i - b|| at the certified point
  BlockVector x;             // certified original blocks
  Vector y;
  Vector lambda;
};

/// The slack reformulation for a general last block: minimize
/// f + sum r_i + (mu/2)||y||^2 subject to sum A_i x_i + y = b, solved by
/// proximal ADMM-m with y last. mu = 1/eps and beta = 3/eps on the
/// Standard schedule; 1/eps^2, 3/eps^2 with the 1/eps^6 iteration cap on
/// Fallback. The dual invariant mu y^k = lambda^k is asserted each
/// iteration. The uniform subdifferential limit condition this analysis
/// additionally assumes is not machine-checkable and remains a caller
/// obligation.
inline PenaltyResult penalty_solve(const ProblemSpec& p, const BlockVector& x0,
                                   const std::vector<ProxTerm>& H, double eps,
                                   PenaltySchedule schedule, int max_iters = 2000,
                                   double eps_theta = 1e-6,
                                   SubproblemMode mode = SubproblemMode::Exact) {
  p.validate();
  p.check_point(x0);
  if (!p.has_affine()) throw AssumptionViolation("penalty_solve requires an affine constraint");
  if (static_cast<int>(H.size()) != p.num_blocks())
    throw InvalidParameter("penalty_solve: one proximal term per original block required");

  const double L = p.f->lipschitz_L();
  const double tau_bar = 0.5 * min_sigma_min(H);
  const double cap = std::min(1.0 / L, 1.0 / (6.0 * tau_bar));
  if (!(eps > 0) || !(eps < cap))
    throw InvalidParameter("penalty_solve: eps must lie in (0, min(1/L, 1/(6 tau_bar)))");
  if (p.affine_residual(x0).norm() > 1e-8)
    throw AssumptionViolation("penalty_solve: start must satisfy the affine constraint");

  PenaltyResult out;
  if (schedule == PenaltySchedule::Standard) {
    out.mu = 1.0 / eps;
    out.beta = 3.0 / eps;
    out.k_theoretical = static_cast<std::int64_t>(std::ceil(1.0 / std::pow(eps, 4)));
  } else {
    out.mu = 1.0 / (eps * eps);
    out.beta = 3.0 / (eps * eps);
    out.k_theoretical = static_cast<std::int64_t>(std::ceil(1.0 / std::pow(eps, 6)));
  }

  const Eigen::Index m = p.m();
  ProblemSpec q;
  q.f = std::make_shared<ExtendedSmooth>(p.f, m, out.mu);
  q.regs = p.regs;
  q.regs.push_back(make_zero_reg());
  q.sets = p.sets;
  q.sets.push_back(make_whole_space(m));
  q.setting = p.setting;
  q.f_star = p.f_star;
  q.A = p.A;
  q.A.push_back(Matrix::Identity(m, m));
  q.b = p.b;
  if (!p.block_solvers.empty()) {
    auto orig = std::make_shared<ProblemSpec>(p);
    for (int i = 0; i < p.num_blocks(); ++i) {
      BlockSolver inner = p.block_solvers[static_cast<size_t>(i)];
      if (!inner) {
        q.block_solvers.push_back({});
        continue;
      }
      const int N = p.num_blocks();
      q.block_solvers.push_back([orig, inner, i, N](const BlockSubproblem& sp) {
        // fold the fixed slack into the right-hand side: the augmented
        // residual equals the original residual with b shifted by -y
        auto shifted = std::make_shared<ProblemSpec>(*orig);
        shifted->b = orig->b - sp.x[N];
        BlockVector head;
        head.blocks.assign(sp.x.blocks.begin(), sp.x.blocks.begin() + N);
        BlockSubproblem inner_sp{*shifted, i, head, sp.lambda, sp.beta, sp.prox, sp.anchor};
        return inner(inner_sp);
      });
    }
    q.block_solvers.push_back({});
  }

  AdmmConfig cfg;
  cfg.beta = out.beta;
  cfg.H = H;
  cfg.max_iters = max_iters;
  cfg.eps_theta = eps_theta;
  cfg.mode = mode;
  cfg.sigma_n = 1.0;

  BlockVector z0 = x0;
  z0.blocks.push_back(Vector::Zero(m));
  const Vector lambda0 = Vector::Zero(m);

  const double mu = out.mu;
  const int N = p.num_blocks();
  AdmmObserver check = [mu, N](const AdmmState& s) {
    if (s.k >= 1 && (mu * s.x[N] - s.lambda).norm() > 1e-9 * (1.0 + s.lambda.norm()))
      throw AssumptionViolation("penalty_solve: dual-slack invariant mu y = lambda violated");
  };

  out.inner = admm_solve(q, z0, lambda0, cfg, AdmmVariant::M, check);

  out.x.blocks.assign(out.inner.best.x.blocks.begin(), out.inner.best.x.blocks.begin() + N);
  out.y = out.inner.best.x[N];
  out.lambda = out.inner.best.lambda;
  out.aug_residual = q.affine_residual(out.inner.best.x).norm();
  out.orig_residual = p.affine_residual(out.x).norm();
  return out;
}

}  // namespace nsopt
