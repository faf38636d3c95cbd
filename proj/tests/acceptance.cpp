// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any fail.
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "nsopt/admm.hpp"
#include "nsopt/bench.hpp"
#include "nsopt/gcg.hpp"
#include "nsopt/stationarity.hpp"
#include "oracles.hpp"

using namespace nsopt;

namespace {

int g_failures = 0;

void report(int n, const std::string& desc, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", n, desc.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

int hw_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

ExperimentConfig bench_config(const std::string& algo, Eigen::Index r_cp, RInitRule rule,
                              std::uint64_t seed) {
  ExperimentConfig c;
  c.algorithm = algo;
  c.dims = {10, 20, 30};
  c.R_cp = r_cp;
  c.R_init_rule = rule;
  c.num_instances = 20;
  c.max_iters = 2000;
  c.theta_tol = 1e-6;
  c.base_seed = seed;
  c.params = algo.rfind("admm", 0) == 0 ? "bench" : "default";
  return c;
}

// criteria 1, 2 and 10 share one benchmark sweep
void criteria_1_2_10() {
  const std::vector<std::string> good = {"admm-g", "admm-m", "prox-bcd"};
  std::vector<ExperimentConfig> cfgs;
  std::uint64_t seed = 1000;
  for (const Eigen::Index r_cp : {3, 10}) {
    for (const auto& a : good) cfgs.push_back(bench_config(a, r_cp, RInitRule::Plus1, seed += 100));
    cfgs.push_back(bench_config("bcd", r_cp, RInitRule::Plus1, seed += 100));
  }
  const size_t n_c1 = cfgs.size();
  for (const auto& a : good) cfgs.push_back(bench_config(a, 3, RInitRule::Exact, seed += 100));

  const auto rows = run_bench_rpca(cfgs, hw_jobs());

  bool ok1 = true;
  int converged = 0, total = 0;
  for (size_t i = 0; i < n_c1; ++i) {
    const auto& r = rows[i];
    const bool plain = r.config.algorithm == "bcd";
    if (r.num_failed > 0) ok1 = false;
    if (plain) {
      ok1 = ok1 && r.num_success <= 3 && r.err_mean >= 0.5;
    } else {
      ok1 = ok1 && r.num_success >= 17 && r.err_mean <= 0.02;
    }
    for (const auto& o : r.instances) {
      ++total;
      if (!o.failed && o.converged) ++converged;
    }
    std::printf("  %-8s R_cp=%-2d R=%-2d success=%2d/20 err_mean=%s\n",
                r.config.algorithm.c_str(), static_cast<int>(r.config.R_cp),
                static_cast<int>(r.config.r_init()), r.num_success,
                format_sig6(r.err_mean).c_str());
  }
  report(1, "overfitted-rank recovery at dims (10,20,30)", ok1);

  bool ok2 = true;
  for (size_t i = n_c1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ok2 = ok2 && r.num_failed == 0 && r.num_success >= 15;
    std::printf("  %-8s R_cp=%-2d R=%-2d success=%2d/20 err_mean=%s\n",
                r.config.algorithm.c_str(), static_cast<int>(r.config.R_cp),
                static_cast<int>(r.config.r_init()), r.num_success,
                format_sig6(r.err_mean).c_str());
  }
  report(2, "exact-rank recovery keeps at least 15/20 successes", ok2);

  std::printf("  theta-converged %d/%d instances\n", converged, total);
  report(10, "at least 90% of the rank-overfitted runs stop on theta within 2000 iterations",
         10 * converged >= 9 * total);
}

void criterion_3() {
  Vector c(2);
  c << 2.0, 0.0;
  ProblemSpec p;
  p.f = std::make_shared<ConcaveQuadratic>(c);
  p.regs = {make_zero_reg()};
  p.sets = {make_ball(2, 1.0)};
  p.setting = Setting::One;
  const double phistar = -0.5 * (c.norm() + 1.0) * (c.norm() + 1.0);

  bool ok = true;
  for (const double eps : {1e-1, 1e-2, 1e-3}) {
    GcgConfig cfg;
    cfg.concave_mode = true;
    cfg.eps = eps;
    cfg.max_iters = 200000;
    const GcgResult res = gcg_solve(p, Vector::Zero(2), cfg);
    const double phi0 = res.trace.records.front().phi;
    const auto bound = gcg_concave_bound(phi0, phistar, eps);
    const auto used = static_cast<std::int64_t>(res.trace.records.size()) - 1;
    ok = ok && res.converged && used <= bound + 1;
  }
  report(3, "concave-mode iteration count stays within its bound", ok);
}

// criteria 4 and 5 share 50 random instances, each run with both variants
void criteria_4_5() {
  Rng rng(4242);
  bool ok_psi = true, ok_ident = true;
  for (int inst = 0; inst < 50; ++inst) {
    const int N = 2 + (inst % 2);
    ProblemSpec p;
    std::vector<Matrix> C;
    for (int i = 0; i < N; ++i) C.push_back(0.5 * normal_matrix(rng, 4, 2));
    p.f = std::make_shared<QuadraticCoupling>(C, normal_vector(rng, 4));
    for (int i = 0; i < N; ++i) {
      p.regs.push_back(i + 1 < N ? make_l1_reg(0.5) : make_zero_reg());
      p.sets.push_back(make_whole_space(2));
      p.A.push_back(normal_matrix(rng, 2, 2));
    }
    p.b = normal_vector(rng, 2);
    p.setting = Setting::Two;
    p.f_star = 0.0;  // f and the l1 terms are nonnegative

    const double L = p.f->lipschitz_L();
    const std::vector<ProxTerm> H(static_cast<size_t>(N - 1),
                                  make_scaled_identity_prox(3.0 * L));
    const BlockVector x0 = oracle::random_block_vector(rng, std::vector<Eigen::Index>(
                                                                static_cast<size_t>(N), 2));
    const Vector lambda0 = Vector::Zero(2);
    const double lower = p.f_star + p.sum_reg_lower_bounds();

    for (const bool majorized : {false, true}) {
      auto q = p;
      q.A[static_cast<size_t>(N - 1)] =
          majorized ? Matrix(0.5 * normal_matrix(rng, 2, 2) + 2.0 * Matrix::Identity(2, 2))
                    : Matrix(Matrix::Identity(2, 2));
      AdmmConfig cfg;
      cfg.H = H;
      cfg.mode = SubproblemMode::Linearized;
      double sn = 0.0;
      if (majorized) {
        sn = sigma_min_aat(q.A[static_cast<size_t>(N - 1)]);
        cfg.beta = admm_m_params(L, sn, H);
        cfg.sigma_n = sn;
      } else {
        std::tie(cfg.beta, cfg.gamma) = admm_g_params(L, H);
      }
      const double cshift = cfg.beta - (majorized ? 0.0 : 1.0 / cfg.gamma);

      AdmmState cur;
      cur.x = x0;
      cur.x_prev = x0;
      cur.lambda = lambda0;
      double prev_psi = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 120; ++k) {
        const AdmmState next =
            majorized ? admm_m_step(q, cur, cfg) : admm_g_step(q, cur, cfg);

        if (next.psi > prev_psi + 1e-9 * (1.0 + std::abs(prev_psi))) ok_psi = false;
        if (next.psi < lower - 1e-9) ok_psi = false;
        prev_psi = next.psi;

        BlockVector mixed = next.x;
        mixed[N - 1] = cur.x[N - 1];
        if (majorized) {
          const Vector lhs = q.A[static_cast<size_t>(N - 1)].transpose() * next.lambda;
          const Vector rhs = q.f->grad_block(N - 1, mixed) -
                             L * (cur.x[N - 1] - next.x[N - 1]);
          if ((lhs - rhs).norm() > 1e-10) ok_ident = false;
        } else {
          const Vector rhs = q.f->grad_block(N - 1, mixed) +
                             cshift * (cur.x[N - 1] - next.x[N - 1]);
          if ((next.lambda - rhs).norm() > 1e-10) ok_ident = false;
        }
        cur = next;
      }
    }
  }
  report(4, "potentials are nonincreasing and bounded below over 50 random instances", ok_psi);
  report(5, "dual-update identities hold to 1e-10 at every iteration of those runs", ok_ident);
}

void criterion_6() {
  Rng rng(6161);
  bool ok = true;
  int checked = 0;
  for (int t = 0; t < 10000 && ok; ++t) {
    ScalarPenaltyParams prm;
    const double a = oracle::uniform(rng, 0.2, 2.0);
    switch (t % 5) {
      case 0: prm = ScalarPenaltyParams::l1(a); break;
      case 1: prm = ScalarPenaltyParams::scad(a, oracle::uniform(rng, 2.2, 5.0)); break;
      case 2: prm = ScalarPenaltyParams::mcp(a, oracle::uniform(rng, 0.4, 4.0)); break;
      case 3: prm = ScalarPenaltyParams::capped_l1(a, oracle::uniform(rng, 0.3, 3.0)); break;
      default: prm = ScalarPenaltyParams::lsp(a, oracle::uniform(rng, 0.2, 3.0)); break;
    }
    const double v = oracle::uniform(rng, -4.0, 4.0);
    const double w = oracle::uniform(rng, 0.3, 3.0);
    const double x = prox_scalar_penalty(v, w, prm);
    const auto gm = oracle::grid_prox_min(v, w, prm);
    const double fx = penalty_value(prm, x) + 0.5 * w * (x - v) * (x - v);
    if (std::abs(x - gm.x) > 1e-5 || fx > gm.val + 1e-9) ok = false;
    ++checked;
  }
  report(6, "scalar prox maps match the grid oracle on " + std::to_string(checked) + " tuples",
         ok);
}

void criterion_7() {
  Rng rng(7777);
  bool ok = true;
  for (int inst = 0; inst < 20 && ok; ++inst) {
    ProblemSpec p;
    p.f = std::make_shared<QuadraticCoupling>(
        std::vector<Matrix>{0.5 * normal_matrix(rng, 4, 2), 0.5 * normal_matrix(rng, 4, 2)},
        normal_vector(rng, 4));
    p.regs = {make_l1_reg(0.6),
              inst % 2 == 0 ? make_l1_reg(0.4)
                            : make_penalty_reg(ScalarPenaltyParams::scad(0.5, 3.7))};
    p.sets = {make_whole_space(2), make_whole_space(2)};
    p.setting = Setting::Two;

    const Vector b_dummy = normal_vector(rng, 1);
    const ProblemSpec q = make_bcd_reformulation(p, b_dummy);
    const std::vector<ProxTerm> H = {make_scaled_identity_prox(2.0),
                                     make_scaled_identity_prox(2.0)};
    AdmmConfig cfg;
    cfg.beta = 2.0;
    cfg.gamma = 0.3;
    cfg.H = H;
    cfg.mode = SubproblemMode::Linearized;

    BlockVector xb = oracle::random_block_vector(rng, {2, 2});
    AdmmState cur;
    cur.x = xb;
    cur.x.blocks.push_back(b_dummy);
    cur.x_prev = cur.x;
    cur.lambda = Vector::Zero(1);

    const Vector empty_lambda;
    for (int k = 0; k < 50; ++k) {
      cur = admm_g_step(q, cur, cfg);
      BlockVector prev = xb;
      for (int i = 0; i < 2; ++i)
        xb[i] = minimize_block(p, i, xb, empty_lambda, 0.0, H[static_cast<size_t>(i)],
                               prev[i], SubproblemMode::Linearized)
                    .x;
      if ((cur.x[0] - xb[0]).norm() > 1e-12 || (cur.x[1] - xb[1]).norm() > 1e-12) ok = false;
    }
  }
  report(7, "proximal bcd coincides with admm-g on the dummy-block reformulation", ok);
}

void criterion_8() {
  Rng rng(8888);
  bool ok = true;

  const auto check = [&](const SmoothFunction& f, const std::vector<Eigen::Index>& dims,
                         double scale) {
    for (int t = 0; t < 100; ++t) {
      const BlockVector x = oracle::random_block_vector(rng, dims, scale);
      if (oracle::grad_check_error(f, x) > 1e-5) ok = false;
    }
  };

  check(QuadraticCoupling({normal_matrix(rng, 3, 2), normal_matrix(rng, 3, 2)},
                          normal_vector(rng, 3)),
        {2, 2}, 1.0);
  check(ConcaveQuadratic(normal_vector(rng, 3)), {3}, 1.0);
  check(LinearSmooth(normal_vector(rng, 4)), {4}, 1.0);
  check(ExtendedSmooth(std::make_shared<QuadraticCoupling>(
                           std::vector<Matrix>{normal_matrix(rng, 3, 2)},
                           normal_vector(rng, 3)),
                       2, 1.5),
        {2, 2}, 1.0);
  check(RpcaCoupling(3, 4, 5, 2, 1.0, 50.0), {6, 8, 10, 60, 60, 60}, 0.5);

  report(8, "central-difference gradient checks pass for every smooth function", ok);
}

void criterion_9() {
  Rng rng(9999);
  bool ok = true;
  for (int t = 0; t < 100; ++t) {
    const Matrix A1 = normal_matrix(rng, 3, 2), A2 = normal_matrix(rng, 3, 2);
    Matrix A(3, 4);
    A << A1, A2;
    const double anorm = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
    const double beta = oracle::uniform(rng, 0.5, 4.0);
    const double g1 = 1.0 / std::sqrt(2.0 * beta * beta * anorm * anorm + 3.0);
    const double g2 = std::sqrt(2.0 * (1.0 + beta * beta * anorm * anorm));

    BlockVector x = oracle::random_block_vector(rng, {2, 2});
    const Vector lambda = normal_vector(rng, 3);

    const auto make_problem = [&](const Vector& t1, const Vector& t2, const Vector& b) {
      Matrix C1 = Matrix::Zero(4, 2), C2 = Matrix::Zero(4, 2);
      C1.topRows(2) = Matrix::Identity(2, 2);
      C2.bottomRows(2) = Matrix::Identity(2, 2);
      Vector d(4);
      d << t1, t2;
      ProblemSpec p;
      p.f = std::make_shared<QuadraticCoupling>(std::vector<Matrix>{C1, C2}, d);
      p.regs = {make_zero_reg(), make_zero_reg()};
      p.sets = {make_whole_space(2), make_whole_space(2)};
      p.A = {A1, A2};
      p.b = b;
      p.setting = Setting::Two;
      return p;
    };

    // direction 1: gamma1 sqrt(eps)-stationarity forces Q <= eps
    {
      const double eps = oracle::uniform(rng, 0.1, 2.0);
      Vector d = normal_vector(rng, 4);
      d *= 0.9 * g1 * std::sqrt(eps) / d.norm();
      Vector res = normal_vector(rng, 3);
      res *= 0.9 * g1 * std::sqrt(eps) / res.norm();
      const auto p = make_problem(x[0] - d.head(2) - A1.transpose() * lambda,
                                  x[1] - d.tail(2) - A2.transpose() * lambda,
                                  A1 * x[0] + A2 * x[1] - res);
      if (hong_q(p, x, lambda, beta) > eps + 1e-12) ok = false;
    }
    // direction 2: Q <= eps certifies gamma2 sqrt(eps)-stationarity at the
    // shifted multiplier
    {
      const auto p =
          make_problem(normal_vector(rng, 2), normal_vector(rng, 2), normal_vector(rng, 3));
      const double eps = hong_q(p, x, lambda, beta);
      const Vector res = p.affine_residual(x);
      const Vector lt = lambda - beta * res;
      double stat = 0.0;
      for (int i = 0; i < 2; ++i)
        stat += (p.f->grad_block(i, x) - p.A[static_cast<size_t>(i)].transpose() * lt)
                    .squaredNorm();
      if (std::sqrt(stat) > g2 * std::sqrt(eps) + 1e-9) ok = false;
      if (res.norm() > g2 * std::sqrt(eps) + 1e-9) ok = false;
    }
  }
  report(9, "kkt-residual implications hold in both directions on 100 tuples", ok);
}

}  // namespace

int main() {
  try {
    criteria_1_2_10();
    criterion_3();
    criteria_4_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
  } catch (const std::exception& e) {
    std::printf("[FAIL] unexpected exception: %s\n", e.what());
    return 1;
  }
  return g_failures == 0 ? 0 : 1;
}
