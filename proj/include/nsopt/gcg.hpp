#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nsopt/problem.hpp"

namespace nsopt {

struct GcgConfig {
  int max_iters = 1000;
  double eps = 1e-6;
  bool concave_mode = false;  // forces step size 1
};

struct GcgRecord {
  double phi;
  double delta_ell;
  double alpha;
  double d_norm;
};

struct GcgTrace {
  std::vector<GcgRecord> records;
  int best_index = 0;  // index of the minimal delta_ell record
};

struct GcgResult {
  Vector x;          // final iterate
  Vector best_x;     // iterate at the minimal delta_ell
  GcgTrace trace;
  bool converged = false;
  int iters = 0;  // completed update steps
};

namespace detail {
inline void require_single_block(const ProblemSpec& p) {
  if (p.num_blocks() != 1) throw InvalidParameter("gcg: single-block problems only");
  if (p.has_affine()) throw InvalidParameter("gcg: affine constraints not supported");
}
}  // namespace detail

/// argmin_{y in S} grad_f(x)^T y + r(y). Exact solutions are available when
/// r is zero (the set's linear minimization oracle) and when r is an l1
/// penalty over a box (coordinatewise enumeration).
inline Vector linearized_subproblem(const ProblemSpec& p, const Vector& x) {
  detail::require_single_block(p);
  const auto& set = *p.sets[0];
  const auto& reg = *p.regs[0];
  if (!set.contains(x, 1e-8)) throw AssumptionViolation("linearized subproblem: x is infeasible");

  BlockVector bx;
  bx.blocks.push_back(x);
  const Vector g = p.f->grad_block(0, bx);

  if (reg.is_zero()) return set.lmo(g);

  const auto params = reg.scalar_params();
  const auto* box = dynamic_cast<const Box*>(&set);
  if (params && params->variant == Penalty::L1 && box) {
    const double a = params->alpha;
    Vector y(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      // minimize g_j t + a|t| over [lo, hi]; piecewise linear, so the
      // minimum is at an endpoint or at 0
      double best_t = 0.0, best_v = std::numeric_limits<double>::infinity();
      const double cands[3] = {0.0, box->lo()[j], box->hi()[j]};
      for (double t : cands) {
        const double tc = std::clamp(t, box->lo()[j], box->hi()[j]);
        const double v = g[j] * tc + a * std::abs(tc);
        if (v < best_v || (v == best_v && std::abs(tc) < std::abs(best_t))) {
          best_v = v;
          best_t = tc;
        }
      }
      y[j] = best_t;
    }
    return y;
  }
  throw UnsupportedPairing("linearized subproblem: unsupported (regularizer, set) pairing; "
                           "supported: zero regularizer with any oracle set, l1 over a box");
}

/// Exact minimizer over [0,1] of
///   h(a) = a*g_dot_d + a^p (rho/2) d_norm_p + (1-a) r_x + a r_y,
/// where d_norm_p carries ||d||_p^p. Convex in a for p > 1; closed form at
/// p = 2, derivative bisection otherwise.
inline double line_search(double g_dot_d, double d_norm_p, double r_x, double r_y, double p,
                          double rho) {
  if (!(p > 1)) throw InvalidParameter("line_search: p must be > 1");
  if (!(rho > 0)) throw InvalidParameter("line_search: rho must be positive");
  if (d_norm_p < 0) throw InvalidParameter("line_search: d_norm_p must be nonnegative");

  const double c1 = g_dot_d + r_y - r_x;
  if (c1 >= 0) return 0.0;
  const double curv = 0.5 * rho * p * d_norm_p;  // h'(a) = c1 + curv * a^{p-1}
  if (curv <= 0 || c1 + curv <= 0) return 1.0;
  if (p == 2.0) return std::clamp(-c1 / (rho * d_norm_p), 0.0, 1.0);

  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (c1 + curv * std::pow(mid, p - 1.0) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Algorithm: repeat y = argmin l(y;x), stop when the linearization
/// improvement l(x;x) - l(y;x) drops to eps, else move by the exact line
/// search (or full step in concave mode).
inline GcgResult gcg_solve(const ProblemSpec& p, const Vector& x0, const GcgConfig& cfg) {
  detail::require_single_block(p);
  p.validate();
  if (!(cfg.eps > 0)) throw InvalidParameter("gcg: eps must be positive");
  if (cfg.max_iters < 1) throw InvalidParameter("gcg: max_iters must be positive");
  if (!p.regs[0]->is_convex())
    throw AssumptionViolation("gcg requires a convex regularizer");
  if (!p.sets[0]->contains(x0, 1e-8)) throw AssumptionViolation("gcg: infeasible start");

  const double hp = p.f->holder_p();
  const double hrho = p.f->holder_rho();

  GcgResult res;
  res.x = x0;
  double best_dl = std::numeric_limits<double>::infinity();

  for (int k = 0; k < cfg.max_iters; ++k) {
    BlockVector bx;
    bx.blocks.push_back(res.x);
    const Vector g = p.f->grad_block(0, bx);
    const Vector y = linearized_subproblem(p, res.x);
    const Vector d = y - res.x;
    const double r_x = p.regs[0]->eval(res.x);
    const double r_y = p.regs[0]->eval(y);
    const double dl = -g.dot(d) + r_x - r_y;  // l(x;x) - l(y;x)

    double alpha = 0.0;
    const bool stop = dl <= cfg.eps;
    if (!stop) {
      double dnp = 0.0;
      for (Eigen::Index j = 0; j < d.size(); ++j) dnp += std::pow(std::abs(d[j]), hp);
      alpha = cfg.concave_mode ? 1.0 : line_search(g.dot(d), dnp, r_x, r_y, hp, hrho);
    }

    res.trace.records.push_back({eval_objective(p, bx), dl, alpha, d.norm()});
    if (dl < best_dl) {
      best_dl = dl;
      res.trace.best_index = k;
      res.best_x = res.x;
    }
    if (stop) {
      res.converged = true;
      return res;
    }
    res.x += alpha * d;
    res.iters = k + 1;
  }
  return res;
}

/// ceil( 2 (phi0 - phistar) (D^p rho)^{q-1} / eps^q ), q = p/(p-1).
inline std::int64_t gcg_iteration_bound(double phi0, double phistar, double D, double rho,
                                        double p, double eps) {
  if (!(p > 1)) throw InvalidParameter("gcg bound: p must be > 1");
  if (!(rho > 0) || !(D > 0)) throw InvalidParameter("gcg bound: D and rho must be positive");
  const double cap = std::pow(D, p) * rho;
  if (!(eps > 0) || !(eps < cap))
    throw InvalidParameter("gcg bound: eps must lie in (0, D^p rho)");
  const double q = p / (p - 1.0);
  const double val = 2.0 * (phi0 - phistar) * std::pow(cap, q - 1.0) / std::pow(eps, q);
  return static_cast<std::int64_t>(std::ceil(val));
}

/// Concave case: ceil( (phi0 - phistar) / eps ).
inline std::int64_t gcg_concave_bound(double phi0, double phistar, double eps) {
  if (!(eps > 0)) throw InvalidParameter("gcg bound: eps must be positive");
  return static_cast<std::int64_t>(std::ceil((phi0 - phistar) / eps));
}

}  // namespace nsopt
