#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nsopt/rpca.hpp"

namespace nsopt {

enum class RInitRule { Exact, Plus1, Plus20Pct };

struct ExperimentConfig {
  std::string algorithm;  // admm-g | admm-m | bcd | prox-bcd | gcg | penalty
  std::array<Eigen::Index, 3> dims{};
  Eigen::Index R_cp = 1;
  RInitRule R_init_rule = RInitRule::Exact;
  int num_instances = 20;
  int max_iters = 2000;
  double theta_tol = 1e-6;
  std::uint64_t base_seed = 0;
  std::string params;  // preset name: "bench" (ADMM) or "default" (BCD)

  Eigen::Index r_init() const {
    switch (R_init_rule) {
      case RInitRule::Exact:
        return R_cp;
      case RInitRule::Plus1:
        return R_cp + 1;
      case RInitRule::Plus20Pct:
        return R_cp + static_cast<Eigen::Index>(std::ceil(0.2 * static_cast<double>(R_cp)));
    }
    return R_cp;
  }
};

inline RInitRule parse_r_init_rule(const std::string& s) {
  if (s == "exact") return RInitRule::Exact;
  if (s == "plus1") return RInitRule::Plus1;
  if (s == "plus20pct") return RInitRule::Plus20Pct;
  throw InvalidParameter("config: R_init_rule must be exact, plus1 or plus20pct");
}

namespace detail {

inline ExperimentConfig parse_one_config(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidParameter("config: expected a JSON object");
  static const char* known[] = {"algorithm",     "dims",      "R_cp",      "R_init_rule",
                                "num_instances", "max_iters", "theta_tol", "base_seed",
                                "params"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw InvalidParameter("config: unknown key '" + it.key() + "'");
  }
  ExperimentConfig c;
  if (!j.contains("algorithm") || !j["algorithm"].is_string())
    throw InvalidParameter("config: missing string field 'algorithm'");
  c.algorithm = j["algorithm"].get<std::string>();
  const bool rpca_algo = c.algorithm == "admm-g" || c.algorithm == "admm-m" ||
                         c.algorithm == "bcd" || c.algorithm == "prox-bcd";
  if (!rpca_algo && c.algorithm != "gcg" && c.algorithm != "penalty")
    throw InvalidParameter("config: unknown algorithm '" + c.algorithm + "'");

  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3)
    throw InvalidParameter("config: 'dims' must be an array of three integers");
  for (int k = 0; k < 3; ++k) {
    const auto& d = j["dims"][static_cast<size_t>(k)];
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1)
      throw InvalidParameter("config: dims entries must be positive integers");
    c.dims[static_cast<size_t>(k)] = d.get<Eigen::Index>();
  }
  if (!j.contains("R_cp") || !j["R_cp"].is_number_integer() || j["R_cp"].get<std::int64_t>() < 1)
    throw InvalidParameter("config: 'R_cp' must be a positive integer");
  c.R_cp = j["R_cp"].get<Eigen::Index>();

  if (j.contains("R_init_rule")) c.R_init_rule = parse_r_init_rule(j["R_init_rule"]);
  if (j.contains("num_instances")) {
    if (!j["num_instances"].is_number_integer() || j["num_instances"].get<std::int64_t>() < 0)
      throw InvalidParameter("config: 'num_instances' must be a nonnegative integer");
    c.num_instances = j["num_instances"].get<int>();
  }
  if (j.contains("max_iters")) {
    if (!j["max_iters"].is_number_integer() || j["max_iters"].get<std::int64_t>() < 1)
      throw InvalidParameter("config: 'max_iters' must be a positive integer");
    c.max_iters = j["max_iters"].get<int>();
  }
  if (j.contains("theta_tol")) {
    if (!j["theta_tol"].is_number() || !(j["theta_tol"].get<double>() > 0))
      throw InvalidParameter("config: 'theta_tol' must be a positive number");
    c.theta_tol = j["theta_tol"].get<double>();
  }
  if (j.contains("base_seed")) {
    if (!j["base_seed"].is_number_unsigned() && !j["base_seed"].is_number_integer())
      throw InvalidParameter("config: 'base_seed' must be an integer");
    c.base_seed = j["base_seed"].get<std::uint64_t>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_string()) throw InvalidParameter("config: 'params' must be a string");
    c.params = j["params"].get<std::string>();
  }
  if (c.params.empty()) c.params = rpca_algo && c.algorithm.rfind("admm", 0) == 0 ? "bench" : "default";
  if (rpca_algo) {
    const bool admm = c.algorithm.rfind("admm", 0) == 0;
    if (admm && c.params != "bench")
      throw InvalidParameter("config: unknown params preset '" + c.params + "' for " + c.algorithm);
    if (!admm && c.params != "default")
      throw InvalidParameter("config: unknown params preset '" + c.params + "' for " + c.algorithm);
  }
  return c;
}

}  // namespace detail

/// Parse a flat JSON config: one object or an array of objects with exactly
/// the ExperimentConfig field names; unknown keys are rejected.
inline std::vector<ExperimentConfig> parse_experiment_configs(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("config: JSON parse error: ") + e.what());
  }
  std::vector<ExperimentConfig> out;
  if (j.is_array()) {
    for (const auto& row : j) out.push_back(detail::parse_one_config(row));
  } else {
    out.push_back(detail::parse_one_config(j));
  }
  return out;
}

struct InstanceOutcome {
  bool failed = false;
  std::string error;
  int iters = 0;
  double rel_err = 0.0;
  bool success = false;
  bool converged = false;  // stopped on theta <= theta_tol
};

struct ResultRow {
  ExperimentConfig config;
  std::vector<InstanceOutcome> instances;
  double iter_mean = 0.0;
  double err_mean = 0.0;
  int num_success = 0;
  int num_failed = 0;
};

inline RpcaAlgorithm bench_algorithm(const std::string& name) {
  if (name == "admm-g") return RpcaAlgorithm::AdmmG;
  if (name == "admm-m") return RpcaAlgorithm::AdmmM;
  if (name == "bcd") return RpcaAlgorithm::Bcd;
  if (name == "prox-bcd") return RpcaAlgorithm::ProxBcd;
  throw AssumptionViolation("bench-rpca supports admm-g, admm-m, bcd and prox-bcd only");
}

inline RpcaParams bench_params(const ExperimentConfig& c) {
  const auto d = c.dims;
  if (c.algorithm == "admm-g") return RpcaParams::admm_g_bench(d[0], d[1], d[2]);
  if (c.algorithm == "admm-m") return RpcaParams::admm_m_bench(d[0], d[1], d[2]);
  return RpcaParams::bcd_default(d[0], d[1], d[2], c.algorithm == "prox-bcd");
}

/// Run one config row: num_instances independent seeded instances, each on
/// its own seed base_seed + index, optionally across jobs threads.
inline ResultRow run_bench_row(const ExperimentConfig& c, int jobs) {
  const RpcaAlgorithm algo = bench_algorithm(c.algorithm);
  const RpcaParams prm = bench_params(c);

  ResultRow row;
  row.config = c;
  row.instances.assign(static_cast<size_t>(c.num_instances), {});

  auto run_one = [&](int idx) {
    InstanceOutcome& out = row.instances[static_cast<size_t>(idx)];
    try {
      Rng rng(c.base_seed + static_cast<std::uint64_t>(idx));
      const RpcaInstance inst =
          generate_instance(c.dims[0], c.dims[1], c.dims[2], c.R_cp, rng);
      const RpcaRunResult res =
          rpca_solve(inst.T, c.r_init(), prm, algo, c.max_iters, c.theta_tol, rng);
      out.iters = res.iters;
      out.rel_err = relative_error(res.best.Z, inst.Z0);
      out.success = out.rel_err < 0.01;
      out.converged = res.converged;
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
  };

  if (jobs <= 1 || c.num_instances <= 1) {
    for (int i = 0; i < c.num_instances; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next.fetch_add(1); i < c.num_instances; i = next.fetch_add(1)) run_one(i);
    };
    std::vector<std::thread> pool;
    const int n = std::min(jobs, c.num_instances);
    pool.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double iter_sum = 0.0, err_sum = 0.0;
  int ok = 0;
  for (const auto& o : row.instances) {
    if (o.failed) {
      ++row.num_failed;
      continue;
    }
    iter_sum += o.iters;
    err_sum += o.rel_err;
    ++ok;
    if (o.success) ++row.num_success;
  }
  row.iter_mean = ok ? iter_sum / ok : 0.0;
  row.err_mean = ok ? err_sum / ok : 0.0;
  return row;
}

inline std::vector<ResultRow> run_bench_rpca(const std::vector<ExperimentConfig>& configs,
                                             int jobs) {
  std::vector<ResultRow> rows;
  rows.reserve(configs.size());
  for (const auto& c : configs) rows.push_back(run_bench_row(c, jobs));
  return rows;
}

inline std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// CSV with the fixed header; seed provenance recorded in '#' comment lines.
inline void write_bench_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "algorithm,I1,I2,I3,Rcp,Rinit,iter_mean,err_mean,num_success\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    if (c.num_instances == 0) continue;
    os << "# seeds: " << c.base_seed << ".." << c.base_seed + static_cast<std::uint64_t>(
        c.num_instances - 1) << " (base_seed + instance index)\n";
    if (r.num_failed > 0) os << "# failed instances: " << r.num_failed << "\n";
    os << c.algorithm << ',' << c.dims[0] << ',' << c.dims[1] << ',' << c.dims[2] << ','
       << c.R_cp << ',' << c.r_init() << ',' << format_sig6(r.iter_mean) << ','
       << format_sig6(r.err_mean) << ',' << r.num_success << '\n';
  }
}

}  // namespace nsopt
