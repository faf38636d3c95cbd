#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsopt/gcg.hpp"
#include "nsopt/problem.hpp"

namespace nsopt {

/// psi_S(x) = inf_{y in S} grad_f(x)^T (y - x) + r(y) - r(x).
/// x is eps-stationary iff psi_S(x) >= -eps.
inline double psi_s(const ProblemSpec& p, const Vector& x) {
  detail::require_single_block(p);
  const Vector y = linearized_subproblem(p, x);
  BlockVector bx;
  bx.blocks.push_back(x);
  const Vector g = p.f->grad_block(0, bx);
  return g.dot(y - x) + p.regs[0]->eval(y) - p.regs[0]->eval(x);
}

/// P_S(x, gamma) = (x - x+)/gamma with
/// x+ = argmin_{y in S} grad_f(x)^T y + (1/(2 gamma)) ||y - x||^2 + r(y).
inline Vector proj_grad_residual(const ProblemSpec& p, const Vector& x, double gamma) {
  detail::require_single_block(p);
  if (!(gamma > 0)) throw InvalidParameter("proj_grad_residual: gamma must be positive");
  const auto& set = *p.sets[0];
  const auto& reg = *p.regs[0];
  BlockVector bx;
  bx.blocks.push_back(x);
  const Vector g = p.f->grad_block(0, bx);
  const Vector v = x - gamma * g;

  Vector xp;
  if (reg.is_zero()) {
    xp = set.project(v);
  } else if (set.is_whole_space()) {
    xp = reg.prox(v, 1.0 / gamma);
  } else if (const auto* box = dynamic_cast<const Box*>(&set)) {
    const auto params = reg.scalar_params();
    if (!params)
      throw UnsupportedPairing("proj_grad_residual: box set needs a separable scalar penalty");
    xp.resize(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j)
      xp[j] = prox_scalar_penalty_box(v[j], 1.0 / gamma, *params, box->lo()[j], box->hi()[j]);
  } else {
    throw UnsupportedPairing("proj_grad_residual: unsupported (regularizer, set) pairing");
  }
  return (x - xp) / gamma;
}

/// Setting-1 residuals: for each block, min_{y in X_i} (y - x_i)^T v_i with
/// v_i = g_i + grad_i f(x) - A_i^T lambda, computed exactly through the
/// set's linear minimization oracle. Nonnegative (in fact zero) at exact
/// stationary points; a point is eps-stationary when all residuals >= -eps.
inline std::vector<double> vi_residuals_setting1(const ProblemSpec& p, const BlockVector& x,
                                                 const Vector& lambda,
                                                 const std::vector<Vector>& g) {
  p.check_point(x);
  if (static_cast<int>(g.size()) != p.num_blocks())
    throw DimensionError("vi_residuals: one subgradient per block required");
  std::vector<double> out;
  for (int i = 0; i < p.num_blocks(); ++i) {
    Vector v = g[static_cast<size_t>(i)] + p.f->grad_block(i, x);
    if (p.has_affine()) v -= p.A[static_cast<size_t>(i)].transpose() * lambda;
    const Vector y = p.sets[static_cast<size_t>(i)]->lmo(v);
    out.push_back(v.dot(y - x[i]));
  }
  return out;
}

/// Setting-2 residuals: dist(-grad_i f(x) + A_i^T lambda, subdiff r_i(x_i)).
inline std::vector<double> subdiff_residuals_setting2(const ProblemSpec& p, const BlockVector& x,
                                                      const Vector& lambda) {
  p.check_point(x);
  std::vector<double> out;
  for (int i = 0; i < p.num_blocks(); ++i) {
    Vector t = -p.f->grad_block(i, x);
    if (p.has_affine()) t += p.A[static_cast<size_t>(i)].transpose() * lambda;
    out.push_back(p.regs[static_cast<size_t>(i)]->dist_to_subdiff(x[i], t));
  }
  return out;
}

/// Q(x, lambda) = ||grad_x L_beta(x, lambda)||^2 + ||Ax - b||^2 for smooth
/// problems (every r_i zero).
inline double hong_q(const ProblemSpec& p, const BlockVector& x, const Vector& lambda,
                     double beta) {
  p.check_point(x);
  if (!(beta > 0)) throw InvalidParameter("hong_q: beta must be positive");
  for (const auto& r : p.regs)
    if (!r->is_zero()) throw InvalidParameter("hong_q is defined for smooth problems (r = 0)");
  const Vector res = p.affine_residual(x);
  double q = res.squaredNorm();
  for (int i = 0; i < p.num_blocks(); ++i) {
    const Vector gi = p.f->grad_block(i, x) -
                      p.A[static_cast<size_t>(i)].transpose() * (lambda - beta * res);
    q += gi.squaredNorm();
  }
  return q;
}

struct StationarityReport {
  Setting setting = Setting::Two;
  std::vector<double> block_residuals;  // blocks 1..N-1 (all blocks if no affine part)
  double dual_residual = 0.0;           // ||grad_N f - A_N^T lambda||
  double primal_residual = 0.0;         // ||sum A_i x_i - b||
  double overall_eps = 0.0;
  std::string subgrad_source;  // "certificate", "subgrad_select", or "" (Setting 2)

  std::string to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "setting=" << (setting == Setting::One ? 1 : 2) << "\n";
    for (size_t i = 0; i < block_residuals.size(); ++i)
      os << "block_residual_" << i << "=" << block_residuals[i] << "\n";
    os << "dual_residual=" << dual_residual << "\n";
    os << "primal_residual=" << primal_residual << "\n";
    if (!subgrad_source.empty()) os << "subgrad_source=" << subgrad_source << "\n";
    os << "overall_eps=" << overall_eps << "\n";
    return os.str();
  }
};

/// Assemble the full report at (x, lambda). Setting-1 residuals use the
/// per-block subgradient certificates when provided (one optional per
/// block), otherwise each regularizer's subgrad_select.
inline StationarityReport build_stationarity_report(
    const ProblemSpec& p, const BlockVector& x, const Vector& lambda,
    const std::vector<std::optional<Vector>>& certificates = {}) {
  p.check_point(x);
  const int N = p.num_blocks();
  StationarityReport rep;
  rep.setting = p.setting;

  const bool affine = p.has_affine();
  const int last = affine ? N - 1 : N;  // blocks reported via block residuals

  std::vector<double> all;
  if (p.setting == Setting::One) {
    std::vector<Vector> g;
    bool all_cert = !certificates.empty();
    for (int i = 0; i < N; ++i) {
      const bool have =
          i < static_cast<int>(certificates.size()) && certificates[static_cast<size_t>(i)];
      if (have) {
        g.push_back(*certificates[static_cast<size_t>(i)]);
      } else {
        g.push_back(p.regs[static_cast<size_t>(i)]->subgrad_select(x[i]));
        all_cert = false;
      }
    }
    rep.subgrad_source = all_cert ? "certificate" : "subgrad_select";
    all = vi_residuals_setting1(p, x, lambda, g);
  } else {
    all = subdiff_residuals_setting2(p, x, lambda);
  }
  rep.block_residuals.assign(all.begin(), all.begin() + last);

  double worst = 0.0;
  for (double r : rep.block_residuals)
    worst = std::max(worst, p.setting == Setting::One ? std::max(-r, 0.0) : r);

  if (affine) {
    Vector gN = p.f->grad_block(N - 1, x) - p.A[static_cast<size_t>(N - 1)].transpose() * lambda;
    if (!p.regs[static_cast<size_t>(N - 1)]->is_zero()) {
      // a regularized last block contributes through its own residual instead
      rep.block_residuals.push_back(all[static_cast<size_t>(N - 1)]);
      worst = std::max(worst, p.setting == Setting::One
                                  ? std::max(-all[static_cast<size_t>(N - 1)], 0.0)
                                  : all[static_cast<size_t>(N - 1)]);
      rep.dual_residual = 0.0;
    } else {
      rep.dual_residual = gN.norm();
    }
    rep.primal_residual = p.affine_residual(x).norm();
  }
  rep.overall_eps = std::max({worst, rep.dual_residual, rep.primal_residual});
  return rep;
}

}  // namespace nsopt
