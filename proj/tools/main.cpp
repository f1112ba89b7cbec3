// Command-line front end: config parsing, subcommand dispatch, CSV output
// and a JSON run manifest for reproducibility.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vldp/asymptotics.hpp"
#include "vldp/montecarlo.hpp"
#include "vldp/rate_solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

unsigned thread_request(unsigned cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("VLDP_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;  // auto
}

struct Manifest {
  std::string subcommand;
  std::string config_path;
  vldp::ModelSpec spec;
  std::optional<vldp::Grid> grid;
  json args = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const fs::path& dir) const {
    json j;
    j["tool"] = "vldp";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["config_path"] = config_path;
    j["config"] = vldp::serialize_config(spec);
    if (grid) j["grid"] = {{"n", grid->n_steps}, {"T", grid->horizon}};
    j["args"] = args;
    j["outputs"] = outputs;
    j["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream out(dir / (subcommand + "_manifest.json"));
    out << j.dump(2) << "\n";
  }
};

void dump_weights_csv(const vldp::KernelWeights& w, const fs::path& file) {
  std::ofstream out(file);
  out << "i,j,weight\n";
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto row = w.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      out << i << "," << j << "," << fmt(row[j]) << "\n";
  }
}

void write_minimizer_csv(const vldp::ControlPath& ctrl, const fs::path& file) {
  std::ofstream out(file);
  out << "t,fdot\n";
  for (std::size_t i = 0; i < ctrl.grid.n_steps; ++i)
    out << fmt(ctrl.grid.t(i)) << "," << fmt(ctrl.fdot[i]) << "\n";
}

int run_rate(const vldp::ModelSpec& spec, const vldp::Grid& grid, Manifest& man,
             const fs::path& outdir, double x, const vldp::SolverOptions& sopts) {
  const auto res = vldp::minimize_scalar_rate(spec, grid, x, sopts);
  const fs::path csv = outdir / "rate_minimizer.csv";
  write_minimizer_csv(res.minimizer, csv);
  man.outputs.push_back(csv.string());
  std::cout << "rate x=" << fmt(x) << " value=" << fmt(res.value)
            << " converged=" << (res.converged ? 1 : 0)
            << " grad_norm=" << fmt(res.gradient_norm) << " starts=" << res.n_starts
            << (res.driver_touched_zero ? " driver_touched_zero=1" : "") << "\n";
  man.args["value"] = res.value;
  return res.converged ? 0 : 3;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  if (out.empty()) throw vldp::config_error("expected a comma-separated list of numbers");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-noise rate functions and tail asymptotics for Volterra-type "
               "stochastic volatility models"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  std::string config_path, out_dir = ".";
  unsigned n = 400, threads = 0, starts = 8;
  std::uint64_t seed = 1;
  bool dump_weights = false;

  auto add_common = [&](CLI::App* cmd, bool needs_grid = true) {
    cmd->add_option("--config", config_path, "model config file")->required();
    cmd->add_option("--out", out_dir, "output directory (default .)");
    if (needs_grid) cmd->add_option("--n", n, "grid steps (default 400)");
    cmd->add_option("--seed", seed, "random seed (default 1)");
    cmd->add_option("--threads", threads, "worker threads (default: VLDP_THREADS or all)");
    cmd->add_flag("--dump-weights", dump_weights, "also dump the kernel weight matrix");
  };

  double x = 0.0, c_level = 1.0, eps_single = 0.1;
  std::string eps_list = "0.4,0.2,0.1,0.05", cs_list = "0.5,1,2", xs_list;
  std::string g_file;
  std::size_t paths = 100000;
  bool full_paths = false;

  auto* cmd_rate = app.add_subcommand(
      "rate", "minimize the scalar rate function at x; writes rate_minimizer.csv (t,fdot)");
  add_common(cmd_rate);
  cmd_rate->add_option("--x", x, "log-price target")->required();
  cmd_rate->add_option("--starts", starts, "extra random optimizer starts (default 8)");

  auto* cmd_path = app.add_subcommand(
      "path-rate",
      "minimize the sample-path rate at a target path; writes path_rate_minimizer.csv (t,fdot)");
  add_common(cmd_path);
  cmd_path->add_option("--g", g_file, "CSV path target with header t,g")->required();
  cmd_path->add_option("--starts", starts, "extra random optimizer starts");

  auto* cmd_sim = app.add_subcommand(
      "simulate", "simulate terminal log-prices; writes simulate.csv (path_id,x_T[,x_0..x_n])");
  add_common(cmd_sim);
  cmd_sim->add_option("--eps", eps_single, "noise level")->required();
  cmd_sim->add_option("--paths", paths, "number of paths")->required();
  cmd_sim->add_flag("--full-paths", full_paths, "also write per-step columns");

  auto* cmd_ldp = app.add_subcommand(
      "ldp-check",
      "tail estimates down an epsilon ladder; writes ldp_table.csv (epsilon,hits,p_hat,ci_lo,"
      "ci_hi,eps_log_p,eps_log_lo,eps_log_hi,no_hits)");
  add_common(cmd_ldp);
  cmd_ldp->add_option("--c", c_level, "tail threshold")->required();
  cmd_ldp->add_option("--eps", eps_list, "decreasing epsilon ladder (default 0.4,0.2,0.1,0.05)");
  cmd_ldp->add_option("--paths", paths, "paths per rung")->required();
  cmd_ldp->add_option("--starts", starts, "extra optimizer starts for the reference rate");

  auto* cmd_strike = app.add_subcommand(
      "strike",
      "rate-function scaling across tail levels; writes strike_scaling.csv "
      "(c,rate,predicted,rel_deviation,converged)");
  add_common(cmd_strike);
  cmd_strike->add_option("--cs", cs_list, "tail levels (default 0.5,1,2)");
  cmd_strike->add_option("--starts", starts, "extra random optimizer starts");

  auto* cmd_taylor = app.add_subcommand(
      "taylor",
      "small-x expansion of the rate function; writes taylor_fit.csv (x,rate,converged)");
  add_common(cmd_taylor);
  cmd_taylor->add_option("--xs", xs_list, "targets for the fit, e.g. -0.1,-0.05,0.05,0.1")->required();
  cmd_taylor->add_option("--starts", starts, "extra random optimizer starts");

  auto* cmd_validate = app.add_subcommand("validate", "report model assumptions");
  add_common(cmd_validate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const vldp::ModelSpec spec = vldp::parse_config_file(config_path);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    Manifest man;
    man.subcommand = name;
    man.config_path = config_path;
    man.spec = spec;
    man.args["seed"] = seed;

    const fs::path outdir(out_dir);
    fs::create_directories(outdir);

    if (name == "validate") {
      const auto rep = vldp::validate_spec(spec);
      std::cout << rep.to_string();
      std::cout << (rep.ok() ? "ok" : "invalid") << "\n";
      man.write(outdir);
      return 0;
    }

    const auto rep = vldp::validate_spec(spec);
    if (!rep.ok()) {
      std::cerr << "config fails validation:\n" << rep.to_string();
      return 2;
    }

    const vldp::Grid grid(n, spec.horizon);
    man.grid = grid;
    man.args["n"] = n;

    vldp::SolverOptions sopts;
    sopts.seed = seed;
    sopts.extra_starts = starts;
    sopts.n_threads = thread_request(threads);

    if (dump_weights) {
      const auto w = vldp::build_weights(spec.kernel, grid);
      const fs::path file = outdir / (name + "_weights.csv");
      dump_weights_csv(w, file);
      man.outputs.push_back(file.string());
    }

    int rc = 0;
    if (name == "rate") {
      man.args["x"] = x;
      rc = run_rate(spec, grid, man, outdir, x, sopts);
    } else if (name == "path-rate") {
      std::ifstream gin(g_file);
      if (!gin) throw vldp::config_error("cannot open path target '" + g_file + "'");
      std::string line;
      std::vector<std::pair<double, double>> pts;
      std::getline(gin, line);  // header
      while (std::getline(gin, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
          throw vldp::config_error("path target: expected 't,g' rows");
        pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
      }
      if (pts.size() < 2) throw vldp::config_error("path target needs at least two rows");
      std::vector<double> g(grid.n_steps + 1, 0.0);
      for (std::size_t i = 0; i <= grid.n_steps; ++i) {
        const double t = grid.t(i);
        auto hi = std::lower_bound(pts.begin(), pts.end(), t,
                                   [](const auto& p, double v) { return p.first < v; });
        if (hi == pts.begin()) {
          g[i] = pts.front().second;
        } else if (hi == pts.end()) {
          g[i] = pts.back().second;
        } else {
          const auto lo = hi - 1;
          const double w = (t - lo->first) / (hi->first - lo->first);
          g[i] = lo->second * (1.0 - w) + hi->second * w;
        }
      }
      g[0] = 0.0;
      man.args["g_file"] = g_file;
      const auto res = vldp::minimize_path_rate(spec, grid, g, sopts);
      const fs::path csv = outdir / "path_rate_minimizer.csv";
      write_minimizer_csv(res.minimizer, csv);
      man.outputs.push_back(csv.string());
      std::cout << "path-rate value=" << fmt(res.value)
                << " converged=" << (res.converged ? 1 : 0) << "\n";
      rc = res.converged ? 0 : 3;
    } else if (name == "simulate") {
      man.args["eps"] = eps_single;
      man.args["paths"] = paths;
      const auto w = vldp::build_weights(spec.kernel, grid);
      vldp::SimulateOptions simopts;
      simopts.keep_full_paths = full_paths;
      simopts.n_threads = thread_request(threads);
      const auto batch = vldp::simulate_batch(spec, w, eps_single, paths, seed, simopts);
      const fs::path csv = outdir / "simulate.csv";
      std::ofstream out(csv);
      out << "path_id,x_T";
      if (full_paths)
        for (std::size_t i = 0; i <= grid.n_steps; ++i) out << ",x_" << i;
      out << "\n";
      for (std::size_t p = 0; p < batch.n_paths; ++p) {
        out << p << "," << fmt(batch.terminal_logprice[p]);
        if (full_paths)
          for (double v : batch.full_paths[p]) out << "," << fmt(v);
        out << "\n";
      }
      man.outputs.push_back(csv.string());
      std::cout << "simulate paths=" << paths << " eps=" << fmt(eps_single) << "\n";
    } else if (name == "ldp-check") {
      const auto ladder = parse_list(eps_list);
      man.args["c"] = c_level;
      man.args["eps"] = ladder;
      man.args["paths"] = paths;
      vldp::MonteCarloOptions mopts;
      mopts.n_threads = thread_request(threads);
      const auto study = vldp::ldp_convergence_study(spec, grid, c_level, ladder, paths, seed, mopts);
      const fs::path csv = outdir / "ldp_table.csv";
      std::ofstream out(csv);
      out << "epsilon,hits,p_hat,ci_lo,ci_hi,eps_log_p,eps_log_lo,eps_log_hi,no_hits\n";
      for (const auto& row : study.rows) {
        out << fmt(row.epsilon) << "," << row.hits << "," << fmt(row.p_hat) << ","
            << fmt(row.wilson_ci.first) << "," << fmt(row.wilson_ci.second) << ","
            << fmt(row.eps_log_p) << "," << fmt(row.eps_log_ci.first) << ","
            << fmt(row.eps_log_ci.second) << "," << (row.no_hits ? 1 : 0) << "\n";
      }
      man.outputs.push_back(csv.string());
      if (study.summary_valid) {
        const auto rate = vldp::minimize_scalar_rate(spec, grid, c_level, sopts);
        const double rel =
            std::abs(study.intercept + rate.value) / std::max(rate.value, 1e-300);
        std::cout << "ldp-check intercept=" << fmt(study.intercept)
                  << " slope=" << fmt(study.slope)
                  << " raw_intercept=" << fmt(study.raw_intercept)
                  << " target=" << fmt(-rate.value) << " rel_err=" << fmt(rel)
                  << " healthy=" << (study.healthy ? 1 : 0) << "\n";
        man.args["intercept"] = study.intercept;
        man.args["target"] = -rate.value;
      } else {
        std::cout << "ldp-check summary withheld (too few usable rungs)\n";
      }
    } else if (name == "strike") {
      const auto cs = parse_list(cs_list);
      man.args["cs"] = cs;
      const auto report = vldp::scaling_check(spec, grid, cs, sopts);
      const fs::path csv = outdir / "strike_scaling.csv";
      std::ofstream out(csv);
      out << "c,rate,predicted,rel_deviation,converged\n";
      for (const auto& row : report.rows)
        out << fmt(row.c) << "," << fmt(row.rate) << "," << fmt(row.predicted) << ","
            << fmt(row.rel_deviation) << "," << (row.converged ? 1 : 0) << "\n";
      man.outputs.push_back(csv.string());
      std::cout << "strike gamma=" << fmt(report.gamma)
                << " I1=" << fmt(report.rate_at_one) << "\n";
      bool all_ok = true;
      for (const auto& row : report.rows) all_ok = all_ok && row.converged;
      rc = all_ok ? 0 : 3;
    } else if (name == "taylor") {
      const auto xs = parse_list(xs_list);
      man.args["xs"] = xs;
      const auto report = vldp::taylor_check(spec, grid, xs, sopts);
      const fs::path csv = outdir / "taylor_fit.csv";
      std::ofstream out(csv);
      out << "x,rate,converged\n";
      for (const auto& row : report.rows)
        out << fmt(row.x) << "," << fmt(row.rate) << "," << (row.converged ? 1 : 0) << "\n";
      man.outputs.push_back(csv.string());
      std::cout << "taylor q=" << fmt(report.q) << " q_target=" << fmt(report.q_target)
                << " q_rel_err=" << fmt(report.q_rel_err) << " slope=" << fmt(report.slope)
                << " slope_target=" << fmt(report.slope_target)
                << " max_abs_dev=" << fmt(report.max_abs_dev) << "\n";
      bool all_ok = true;
      for (const auto& row : report.rows) all_ok = all_ok && row.converged;
      rc = all_ok ? 0 : 3;
    }

    man.write(outdir);
    return rc;
  } catch (const vldp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vldp::divergence_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const vldp::singular_control_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
