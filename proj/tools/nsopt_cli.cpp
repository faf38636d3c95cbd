// Command-line driver: seeded RPCA benchmark runs, parameter calculators,
// stationarity checks, and a generic single-problem solver.
//
// Exit codes: 0 success, 2 input error (unreadable/malformed files,
// dimension mismatches), 3 parameter or assumption violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsopt/admm.hpp"
#include "nsopt/bench.hpp"
#include "nsopt/gcg.hpp"
#include "nsopt/stationarity.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitViolation = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw nsopt::InvalidParameter("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw nsopt::InvalidParameter("cannot open file: " + path);
  std::vector<double> out;
  double v;
  while (f >> v) out.push_back(v);
  if (!f.eof()) throw nsopt::InvalidParameter("non-numeric content in " + path);
  return out;
}

nsopt::Matrix parse_matrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw nsopt::InvalidParameter("matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  nsopt::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw nsopt::InvalidParameter("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<size_t>(k)].get<double>();
  }
  return m;
}

nsopt::Vector parse_vector(const nlohmann::json& j) {
  if (!j.is_array()) throw nsopt::InvalidParameter("vector must be a JSON array");
  nsopt::Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

nsopt::RegularizerPtr parse_reg(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return nsopt::make_zero_reg();
  const double alpha = j.at("alpha").get<double>();
  const double theta = j.value("theta", 0.0);
  using P = nsopt::ScalarPenaltyParams;
  if (type == "l1") return nsopt::make_penalty_reg(P::l1(alpha));
  if (type == "scad") return nsopt::make_penalty_reg(P::scad(alpha, theta));
  if (type == "mcp") return nsopt::make_penalty_reg(P::mcp(alpha, theta));
  if (type == "capped-l1") return nsopt::make_penalty_reg(P::capped_l1(alpha, theta));
  if (type == "lsp") return nsopt::make_penalty_reg(P::lsp(alpha, theta));
  throw nsopt::InvalidParameter("unknown regularizer type: " + type);
}

nsopt::ConstraintSetPtr parse_set(const nlohmann::json& j, Eigen::Index n) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "whole") return nsopt::make_whole_space(n);
  if (type == "ball") return nsopt::make_ball(n, j.at("radius").get<double>());
  if (type == "box") {
    nsopt::Vector lo = parse_vector(j.at("lo"));
    nsopt::Vector hi = parse_vector(j.at("hi"));
    if (lo.size() != n || hi.size() != n)
      throw nsopt::DimensionError("box bounds do not match block dim");
    return nsopt::make_box(std::move(lo), std::move(hi));
  }
  throw nsopt::InvalidParameter("unknown set type: " + type);
}

/// Problem JSON: {"f": {"type": "quadratic"|"concave"|"linear", ...},
/// "regs": [...], "sets": [...], "A": [...matrices], "b": [...],
/// "setting": 1|2, "f_star": number}. Quadratic f carries "C" (one matrix
/// per block) and "d"; concave/linear carry "c".
nsopt::ProblemSpec parse_problem(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw nsopt::InvalidParameter(std::string("problem JSON parse error: ") + e.what());
  }
  nsopt::ProblemSpec p;

  const auto& fj = j.at("f");
  const std::string ftype = fj.at("type").get<std::string>();
  if (ftype == "quadratic") {
    std::vector<nsopt::Matrix> C;
    for (const auto& cj : fj.at("C")) C.push_back(parse_matrix(cj));
    p.f = std::make_shared<nsopt::QuadraticCoupling>(std::move(C), parse_vector(fj.at("d")));
  } else if (ftype == "concave") {
    p.f = std::make_shared<nsopt::ConcaveQuadratic>(parse_vector(fj.at("c")));
  } else if (ftype == "linear") {
    p.f = std::make_shared<nsopt::LinearSmooth>(parse_vector(fj.at("c")));
  } else {
    throw nsopt::InvalidParameter("unknown f type: " + ftype);
  }

  const auto& sets = j.at("sets");
  const auto& regs = j.at("regs");
  if (sets.size() != regs.size())
    throw nsopt::DimensionError("regs and sets must have the same length");
  for (size_t i = 0; i < sets.size(); ++i) {
    const Eigen::Index n = p.f->block_dim(static_cast<int>(i));
    p.sets.push_back(parse_set(sets[i], n));
    p.regs.push_back(parse_reg(regs[i]));
  }
  if (j.contains("A")) {
    for (const auto& aj : j.at("A")) p.A.push_back(parse_matrix(aj));
    p.b = parse_vector(j.at("b"));
  }
  const int setting = j.value("setting", 2);
  if (setting != 1 && setting != 2) throw nsopt::InvalidParameter("setting must be 1 or 2");
  p.setting = setting == 1 ? nsopt::Setting::One : nsopt::Setting::Two;
  p.f_star = j.value("f_star", -1e12);
  for (size_t i = 0; i < sets.size(); ++i)
    p.block_solvers.push_back(nsopt::make_quadratic_block_solver());
  return p;
}

nsopt::BlockVector read_point(const std::string& path, const nsopt::ProblemSpec& p) {
  const std::vector<double> nums = read_numbers(path);
  nsopt::Vector flat(static_cast<Eigen::Index>(nums.size()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = nums[static_cast<size_t>(i)];
  std::vector<Eigen::Index> dims;
  for (int i = 0; i < p.num_blocks(); ++i) dims.push_back(p.dim(i));
  return nsopt::BlockVector::from_flat(flat, dims);
}

int cmd_bench_rpca(const std::string& config_path, int jobs, const std::string& out_path,
                   std::int64_t seed_override) {
  std::vector<nsopt::ExperimentConfig> configs;
  try {
    configs = nsopt::parse_experiment_configs(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (seed_override >= 0)
    for (auto& c : configs) c.base_seed = static_cast<std::uint64_t>(seed_override);

  try {
    const auto rows = nsopt::run_bench_rpca(configs, jobs);
    std::ostringstream csv;
    nsopt::write_bench_csv(rows, csv);
    std::cout << csv.str();
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInput;
      }
      f << csv.str();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_params(const std::string& algo, double L, double sigma_n, double hdiag, int nblocks,
               double margin, double anorm_sq, double diam, double eps, double psi1,
               double lower, double beta_override) {
  using namespace nsopt;
  try {
    std::vector<ProxTerm> H(static_cast<size_t>(nblocks > 1 ? nblocks - 1 : 1),
                            make_scaled_identity_prox(hdiag));
    std::cout.precision(10);
    const Setting setting = diam > 0 ? Setting::One : Setting::Two;
    const double diam_sq = diam * diam;

    ComplexityConstants c;
    double beta = 0, gamma = 0;
    if (algo == "admm-g") {
      std::tie(beta, gamma) = admm_g_params(L, H, margin);
      if (beta_override > 0) {
        beta = beta_override;
        gamma = 13.0 * beta / (6.0 * L * L + beta * L + 13.0 * beta * beta);
      }
      c = admm_g_constants(L, beta, gamma, H, anorm_sq, nblocks, diam_sq);
      std::cout << "beta=" << beta << "\ngamma=" << gamma << "\n";
      std::cout << "kappa1=" << c.kappa1 << "\nkappa2=" << c.kappa2 << "\nkappa3=" << c.kappa3
                << "\nkappa4=" << c.kappa4 << "\ntau=" << c.tau << "\n";
    } else if (algo == "admm-m") {
      if (!(sigma_n > 0)) {
        std::cerr << "error: admm-m requires --sigma-n > 0\n";
        return kExitInput;
      }
      beta = beta_override > 0 ? beta_override : admm_m_params(L, sigma_n, H, margin);
      c = admm_m_constants(L, beta, sigma_n, H, anorm_sq, nblocks, diam_sq);
      std::cout << "beta=" << beta << "\n";
      std::cout << "kappa1=" << c.kappa1 << "\nkappa2=" << c.kappa2 << "\nkappa3=" << c.kappa3
                << "\nkappa4=" << c.kappa4 << "\ntau=" << c.tau << "\n";
    } else if (algo == "bcd") {
      // tau through the dummy-block reformulation (A_i = 0, A_{N+1} = I)
      std::vector<ProxTerm> Hall(static_cast<size_t>(nblocks), make_scaled_identity_prox(hdiag));
      std::tie(beta, gamma) = admm_g_params(L, Hall, margin);
      if (beta_override > 0) {
        beta = beta_override;
        gamma = 13.0 * beta / (6.0 * L * L + beta * L + 13.0 * beta * beta);
      }
      const auto cg = admm_g_constants(L, beta, gamma, Hall, 0.0, nblocks + 1, diam_sq);
      c = bcd_constants(L, Hall, diam_sq, cg.tau);
      std::cout << "beta=" << beta << "\ngamma=" << gamma << "\n";
      std::cout << "kappa5=" << c.kappa5 << "\nkappa6=" << c.kappa6 << "\ntau=" << c.tau << "\n";
    } else {
      std::cerr << "error: --algo must be admm-g, admm-m or bcd\n";
      return kExitInput;
    }
    if (!(c.tau > 0)) {
      std::cerr << "error: beta below theoretical bound (tau <= 0)\n";
      return kExitViolation;
    }
    if (eps > 0 && psi1 > lower) {
      const std::int64_t K = algo == "bcd"
                                 ? bcd_iteration_bound(c, psi1, lower, eps, setting)
                                 : admm_iteration_bound(c, psi1, lower, eps, setting);
      std::cout << "K=" << K << "\n";
    }
  } catch (const nsopt::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_check(const std::string& problem_path, const std::string& point_path,
              const std::string& lambda_path, int setting_flag) {
  nsopt::ProblemSpec p;
  nsopt::BlockVector x;
  nsopt::Vector lambda;
  try {
    p = parse_problem(read_file(problem_path));
    x = read_point(point_path, p);
    if (p.has_affine()) {
      if (lambda_path.empty())
        throw nsopt::InvalidParameter("--lambda is required for constrained problems");
      const auto nums = read_numbers(lambda_path);
      lambda.resize(static_cast<Eigen::Index>(nums.size()));
      for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = nums[static_cast<size_t>(i)];
      if (lambda.size() != p.m()) throw nsopt::DimensionError("lambda length mismatch");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    if (setting_flag == 1) p.setting = nsopt::Setting::One;
    if (setting_flag == 2) p.setting = nsopt::Setting::Two;
    p.validate();
    const auto rep = nsopt::build_stationarity_report(p, x, lambda);
    std::cout << rep.to_text();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_solve(const std::string& problem_path, const std::string& algo,
              const std::string& x0_path, int max_iters, double eps, double margin,
              const std::string& mode_str, const std::string& schedule_str) {
  using namespace nsopt;
  ProblemSpec p;
  BlockVector x0;
  try {
    p = parse_problem(read_file(problem_path));
    p.validate();
    if (!x0_path.empty()) {
      x0 = read_point(x0_path, p);
    } else {
      for (int i = 0; i < p.num_blocks(); ++i)
        x0.blocks.push_back(p.sets[static_cast<size_t>(i)]->project(Vector::Zero(p.dim(i))));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const double L = p.f->lipschitz_L();
    const SubproblemMode mode =
        mode_str == "linearized" ? SubproblemMode::Linearized : SubproblemMode::Exact;
    std::cout.precision(10);

    if (algo == "gcg") {
      GcgConfig cfg;
      cfg.max_iters = max_iters;
      cfg.eps = eps;
      const auto res = gcg_solve(p, x0[0], cfg);
      std::cout << "converged=" << (res.converged ? 1 : 0) << "\niters=" << res.iters << "\n";
      BlockVector bx;
      bx.blocks.push_back(res.x);
      std::cout << "objective=" << eval_objective(p, bx) << "\npsi_s=" << psi_s(p, res.x) << "\n";
      return kExitOk;
    }

    if (algo == "bcd") {
      std::vector<ProxTerm> H(static_cast<size_t>(p.num_blocks()),
                              make_scaled_identity_prox(3.0 * L));
      const auto res = proximal_bcd_solve(p, x0, H, max_iters, eps, mode);
      std::cout << "converged=" << (res.converged ? 1 : 0) << "\niters=" << res.iters
                << "\nobjective=" << eval_objective(p, res.x) << "\n";
      const auto rep = build_stationarity_report(p, res.x, Vector(), res.reg_subgrads);
      std::cout << rep.to_text();
      return kExitOk;
    }

    std::vector<ProxTerm> H(static_cast<size_t>(p.num_blocks() - 1),
                            make_scaled_identity_prox(3.0 * L));
    if (algo == "penalty") {
      std::vector<ProxTerm> Hall(static_cast<size_t>(p.num_blocks()),
                                 make_scaled_identity_prox(3.0 * L));
      const auto schedule =
          schedule_str == "fallback" ? PenaltySchedule::Fallback : PenaltySchedule::Standard;
      const auto res = penalty_solve(p, x0, Hall, eps, schedule, max_iters, 1e-6, mode);
      std::cout << "mu=" << res.mu << "\nbeta=" << res.beta
                << "\naug_residual=" << res.aug_residual
                << "\norig_residual=" << res.orig_residual
                << "\niters=" << res.inner.iters << "\nk_hat=" << res.inner.k_hat << "\n";
      return kExitOk;
    }

    AdmmConfig cfg;
    cfg.H = H;
    cfg.max_iters = max_iters;
    cfg.mode = mode;
    AdmmVariant variant;
    if (algo == "admm-g") {
      variant = AdmmVariant::G;
      std::tie(cfg.beta, cfg.gamma) = admm_g_params(L, H, margin);
    } else if (algo == "admm-m") {
      variant = AdmmVariant::M;
      cfg.sigma_n = sigma_min_aat(p.A.back());
      cfg.beta = admm_m_params(L, cfg.sigma_n, H, margin);
    } else {
      std::cerr << "error: unknown algorithm '" << algo << "'\n";
      return kExitInput;
    }
    BlockVector x = x0;
    const auto res = admm_solve(p, x, Vector::Zero(p.m()), cfg, variant);
    std::cout << "converged=" << (res.converged ? 1 : 0) << "\niters=" << res.iters
              << "\nk_hat=" << res.k_hat << "\ntheta_min=" << res.theta_min
              << "\nobjective=" << eval_objective(p, res.best.x) << "\n";
    const auto rep =
        build_stationarity_report(p, res.best.x, res.best.lambda, res.best.reg_subgrads);
    std::cout << rep.to_text();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-structured nonconvex nonsmooth optimization toolkit"};
  app.require_subcommand(1);

  // bench-rpca
  std::string config_path, out_path;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  std::int64_t seed_override = -1;
  auto* bench = app.add_subcommand("bench-rpca", "Seeded RPCA benchmark from a JSON config");
  bench->add_option("config", config_path, "experiment config JSON")->required();
  bench->add_option("--jobs", jobs, "instance-level parallelism");
  bench->add_option("--out", out_path, "also write the CSV to this file");
  bench->add_option("--seed", seed_override, "override base_seed for every row");

  // params
  std::string algo;
  double L = 0, sigma_n = 0, hdiag = 0, margin = 1.01, anorm_sq = 1.0, diam = 0.0;
  double eps = 0, psi1 = 0, lower = 0, beta_override = 0;
  int nblocks = 2;
  auto* params = app.add_subcommand("params", "Parameter and complexity calculators");
  params->add_option("--algo", algo, "admm-g | admm-m | bcd")->required();
  params->add_option("--L", L, "Lipschitz constant of grad f")->required();
  params->add_option("--hdiag", hdiag, "proximal terms H_i = hdiag * I")->required();
  params->add_option("--sigma-n", sigma_n, "smallest eigenvalue of A_N A_N^T (admm-m)");
  params->add_option("--nblocks", nblocks, "number of blocks N");
  params->add_option("--margin", margin, "multiplicative margin above the beta bound");
  params->add_option("--anorm-sq", anorm_sq, "max_i ||A_i||_2^2");
  params->add_option("--diam", diam, "max block diameter (> 0 selects the compact setting)");
  params->add_option("--eps", eps, "target tolerance for the iteration bound");
  params->add_option("--psi1", psi1, "potential value after the first iteration");
  params->add_option("--lower", lower, "sum of lower bounds of the objective terms");
  params->add_option("--beta", beta_override, "use this beta instead of the calculator's");

  // check
  std::string problem_path, point_path, lambda_path;
  int setting_flag = 0;
  auto* check = app.add_subcommand("check", "Stationarity report for a point");
  check->add_option("--problem", problem_path, "problem JSON")->required();
  check->add_option("--point", point_path, "whitespace-separated point file")->required();
  check->add_option("--lambda", lambda_path, "whitespace-separated multiplier file");
  check->add_option("--setting", setting_flag, "force setting 1 or 2");

  // solve
  std::string s_problem, s_algo, s_x0, s_mode = "exact", s_schedule = "standard";
  int s_max_iters = 2000;
  double s_eps = 1e-6, s_margin = 1.01;
  auto* solve = app.add_subcommand("solve", "Run one solver on one problem");
  solve->add_option("--problem", s_problem, "problem JSON")->required();
  solve->add_option("--algo", s_algo, "admm-g | admm-m | bcd | gcg | penalty")->required();
  solve->add_option("--x0", s_x0, "start point file (default: projected zero)");
  solve->add_option("--max-iters", s_max_iters, "iteration cap");
  solve->add_option("--eps", s_eps, "tolerance (gcg/penalty) or BCD move threshold");
  solve->add_option("--margin", s_margin, "beta margin for the parameter calculators");
  solve->add_option("--mode", s_mode, "exact | linearized block subproblems");
  solve->add_option("--schedule", s_schedule, "standard | fallback (penalty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  if (bench->parsed()) return cmd_bench_rpca(config_path, jobs, out_path, seed_override);
  if (params->parsed())
    return cmd_params(algo, L, sigma_n, hdiag, nblocks, margin, anorm_sq, diam, eps, psi1,
                      lower, beta_override);
  if (check->parsed()) return cmd_check(problem_path, point_path, lambda_path, setting_flag);
  if (solve->parsed())
    return cmd_solve(s_problem, s_algo, s_x0, s_max_iters, s_eps, s_margin, s_mode, s_schedule);
  return kExitInput;
}
