// Copyright 2026 The composite-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// composite_forge: construct, verify, oracle, stats and simulate.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "composite_forge/composite_forge.hpp"

namespace cf = composite_forge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitUsage = 64;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw cf::UsageError("cannot open " + path + " for writing");
  os << text;
}

// Accepts "300", "1e4", "2.5e3" when the value is an integer.
std::uint64_t parse_count(const std::string& s) {
  double v = 0;
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw cf::UsageError("not a number: " + s);
  }
  if (!(v >= 1) || v > 1e15 || std::floor(v) != v) throw cf::UsageError("not a positive integer: " + s);
  return static_cast<std::uint64_t>(v);
}

std::vector<std::uint64_t> parse_grid(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_count(item));
  }
  if (out.empty()) throw cf::UsageError("empty x grid");
  return out;
}

struct ConstructArgs {
  cf::ConstructConfig cfg;
  std::string x = "";
  std::string n_mode = "auto";
  std::string n_value;
  std::optional<double> z;
  std::string out;
  std::string stats;
};

int run_construct(ConstructArgs& a) {
  a.cfg.x = parse_count(a.x);
  a.cfg.z = a.z;
  if (a.n_mode == "explicit") {
    if (a.n_value.empty()) throw cf::UsageError("--n-mode explicit needs --N");
    a.cfg.N = cf::parse_decimal(a.n_value);
  } else if (a.n_mode != "auto") {
    throw cf::UsageError("--n-mode must be auto or explicit");
  } else if (!a.n_value.empty()) {
    throw cf::UsageError("--N requires --n-mode explicit");
  }
  const cf::ConstructResult res = cf::construct(a.cfg);
  const nlohmann::json cert = cf::to_json(res.cert);
  const cf::VerifyReport check = cf::verify_certificate(cert, true);
  if (!check.valid) {
    std::cerr << "internal: constructed certificate failed verification\n" << check.to_json().dump(2) << "\n";
    return kExitVerify;
  }
  write_text(a.out, cert.dump(2) + "\n");
  if (!a.stats.empty()) {
    std::ostringstream os;
    cf::write_stats_csv(os, res.stats);
    write_text(a.stats, os.str());
  }
  const auto& p = *res.cert.placement;
  std::cerr << "y = " << res.cert.params.y << " (target " << res.cert.y_target << "), m = " << p.m
            << ", theorem m = " << res.m_theorem << " ("
            << (res.m_theorem > static_cast<double>(p.m) ? "theorem larger" : "achieved larger") << ")"
            << ", N = 10^" << cf::to_decimal(p.N).size() - 1 << ", residual fwd " << res.residual.residual_fwd
            << "/" << res.residual.capacity_fwd << ", bwd " << res.residual.residual_bwd << "/"
            << res.residual.capacity_bwd << ", mode " << (res.dense ? "dense" : "ladder")
            << ", attempts " << res.attempts << "\n";
  return kExitOk;
}

int run_verify(const std::string& path, bool deep) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw cf::UsageError("cannot read certificate " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    cf::VerifyReport rep;
    rep.mode = deep ? "deep" : "fast";
    rep.problems.push_back(std::string("malformed JSON: ") + e.what());
    std::cout << rep.to_json().dump(2) << "\n";
    return kExitVerify;
  }
  const cf::VerifyReport rep = cf::verify_certificate(j, deep);
  std::cout << rep.to_json().dump(2) << "\n";
  return rep.valid ? kExitOk : kExitVerify;
}

int run_stats(const std::string& poly, const std::string& grid, const std::string& out) {
  const cf::IntPolynomial f = cf::IntPolynomial::parse(poly);
  std::ostringstream os;
  os << "x,prime_count,usable_count,mertens_sum,mertens_minus_lnlnx,sigma_x,sigma_x_log_x,rho_hat,"
        "rho_hat_normalized\n";
  os.precision(10);
  for (std::uint64_t x : parse_grid(grid)) {
    if (x < 3) throw cf::UsageError("x must be >= 3");
    const cf::RootTable table = cf::build_root_table_cached(f, x);
    const cf::DensityStats& s = table.stats();
    const double lx = std::log(static_cast<double>(x));
    os << x << ',' << s.prime_count << ',' << s.usable_count << ',' << s.mertens_sum << ','
       << s.mertens_sum - std::log(lx) << ',' << s.sigma_x << ',' << s.sigma_x * lx << ',' << s.rho_hat << ','
       << s.rho_hat_normalized << '\n';
  }
  write_text(out, os.str());
  return kExitOk;
}

int run_simulate(const cf::CoveringConfig& cfg, const std::string& out) {
  const cf::CoveringSummary sum = cf::covering_lemma_sim(cfg);
  std::ostringstream os;
  os << "trial,residual,fraction,ratio\n";
  os.precision(10);
  for (const auto& t : sum.trials) os << t.trial << ',' << t.residual << ',' << t.fraction << ',' << t.ratio << '\n';
  write_text(out, os.str());
  std::cerr << "c_hat = " << sum.c_hat << ", within 10 eta #V: " << sum.within_bound << "/" << cfg.trials << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residue certificates for long runs of composite polynomial values"};
  app.require_subcommand(1);

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "build a residue certificate");
  construct->add_option("--poly", ca.cfg.poly, "binom:[a0,...] or poly:[c0,...]")->required();
  construct->add_option("--x", ca.x, "sieving bound x")->required();
  construct->add_option("--delta", ca.cfg.delta)->capture_default_str();
  construct->add_option("--xi", ca.cfg.xi)->capture_default_str();
  construct->add_option("--M", ca.cfg.M)->capture_default_str();
  construct->add_option("--K", ca.cfg.K)->capture_default_str();
  construct->add_option("--eps", ca.cfg.eps)->capture_default_str();
  construct->add_option("--z", ca.z, "small-prime bound override");
  construct->add_option("--seed", ca.cfg.seed)->capture_default_str();
  construct->add_option("--mode", ca.cfg.mode, "greedy | random")->capture_default_str();
  construct->add_flag("--two-sided", ca.cfg.two_sided, "sieve both [1,y] and [-y,-1]");
  construct->add_option("--n-mode", ca.n_mode, "auto | explicit")->capture_default_str();
  construct->add_option("--N", ca.n_value, "target N (decimal)");
  construct->add_option("--retry-budget", ca.cfg.retry_budget)->capture_default_str();
  construct->add_flag("--assert-irreducible", ca.cfg.assert_irreducible);
  construct->add_flag("--no-shrink", [&](std::int64_t) { ca.cfg.shrink_y = false; }, "fail instead of shrinking y");
  construct->add_option("--out", ca.out, "certificate path (default stdout)");
  construct->add_option("--stats", ca.stats, "per-stage CSV path");

  std::string cert_path;
  bool deep = false;
  auto* verify = app.add_subcommand("verify", "check a certificate");
  verify->add_option("cert", cert_path, "certificate JSON")->required();
  verify->add_flag("--deep", deep, "check every n instead of a sample");

  std::string poly;
  std::string n_max = "100";
  auto* oracle = app.add_subcommand("oracle", "longest run of non-prime values by brute force");
  oracle->add_option("--poly", poly)->required();
  oracle->add_option("--n", n_max, "scan n in [1, N_max]")->capture_default_str();

  std::string grid;
  std::string out;
  auto* stats = app.add_subcommand("stats", "root-density statistics");
  stats->add_option("--poly", poly)->required();
  stats->add_option("--x", grid, "comma-separated x values")->required();
  stats->add_option("--out", out);

  cf::CoveringConfig sim;
  auto* simulate = app.add_subcommand("simulate", "covering-lemma harness");
  simulate->add_option("--trials", sim.trials)->capture_default_str();
  simulate->add_option("--y", sim.y)->capture_default_str();
  simulate->add_option("--v-size", sim.v_size)->capture_default_str();
  simulate->add_option("--k", sim.k)->capture_default_str();
  simulate->add_option("--C1", sim.C1)->capture_default_str();
  simulate->add_option("--eta", sim.eta)->capture_default_str();
  simulate->add_option("--K0", sim.K0)->capture_default_str();
  simulate->add_option("--delta", sim.delta)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*construct) return run_construct(ca);
    if (*verify) return run_verify(cert_path, deep);
    if (*oracle) {
      const auto rec = cf::oracle_longest_run(cf::IntPolynomial::parse(poly), parse_count(n_max));
      std::cout << cf::to_json(rec).dump() << "\n";
      return kExitOk;
    }
    if (*stats) return run_stats(poly, grid, out);
    if (*simulate) return run_simulate(sim, out);
  } catch (const cf::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  }
  return kExitUsage;
}
