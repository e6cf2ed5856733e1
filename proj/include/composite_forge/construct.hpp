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


#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "composite_forge/assemble.hpp"
#include "composite_forge/bigint.hpp"
#include "composite_forge/cover.hpp"
#include "composite_forge/modroots.hpp"
#include "composite_forge/poly.hpp"
#include "composite_forge/rng.hpp"
#include "composite_forge/sieve.hpp"

namespace composite_forge {

struct ConstructConfig {
  std::string poly;
  std::uint64_t x = 0;
  double delta = 0.5;
  double xi = 2.0;
  double M = 6.5;
  double K = 8.0;
  double eps = 0.05;
  std::optional<double> z;
  std::uint64_t seed = 0;
  std::string mode = "greedy";  // greedy | random
  bool two_sided = false;
  std::optional<BigInt> N;  // explicit N; auto when empty
  unsigned retry_budget = 64;
  bool assert_irreducible = false;
  bool shrink_y = true;
};

struct StageStats {
  std::string stage;
  std::string side;
  std::size_t primes_used = 0;
  std::size_t survivors_before = 0;
  std::size_t survivors_after = 0;
  std::size_t capacity = 0;
  std::uint64_t seed = 0;
};

inline void write_stats_csv(std::ostream& os, const std::vector<StageStats>& rows) {
  os << "stage,side,primes_used,survivors_before,survivors_after,capacity,seed\n";
  for (const auto& r : rows) {
    os << r.stage << ',' << r.side << ',' << r.primes_used << ',' << r.survivors_before << ','
       << r.survivors_after << ',' << r.capacity << ',' << r.seed << '\n';
  }
}

struct ConstructResult {
  explicit ConstructResult(IntPolynomial f) : cert(std::move(f)) {}

  ResidueCertificate cert;
  std::vector<StageStats> stats;
  ResidualReport residual;
  bool dense = true;
  unsigned attempts = 0;
  double m_theorem = 0;  // [log N (log log N)^delta]
};

namespace detail {

// One pipeline pass at a fixed y. Throws InfeasibleError on failure.
inline ConstructResult construct_at(const ConstructConfig& cfg, const IntPolynomial& f,
                                    const RootTable& table, const BigInt& N, Irreducibility verdict,
                                    std::uint64_t y_target, std::uint64_t y) {
  const std::uint64_t x = cfg.x;
  SieveParams params =
      SieveParams::make(x, cfg.delta, cfg.xi, cfg.M, cfg.K, cfg.eps, cfg.z).with_y(y);
  params.n_target = N;
  const bool two = cfg.two_sided;
  const auto yy = static_cast<std::int64_t>(y);
  const Interval fwd_iv{1, yy}, bwd_iv{-yy, -1};

  ConstructResult res(f);
  const HScaleLadder ladder = build_ladder(params, table);
  res.dense = ladder.dense();
  const std::uint64_t bound =
      std::min<std::uint64_t>(res.dense ? floor_u64(std::log(static_cast<double>(x))) : floor_u64(params.z), x);

  // Small primes.
  Rng small_rng = Rng::stream(cfg.seed, "small");
  const SmallSample small = sample_small_residue(params, table, small_rng, two,
                                                 SmallOptions{bound, 2.0, cfg.retry_budget});
  const std::size_t n_small = small.assignment.size();
  res.stats.push_back({"small", "fwd", n_small, y, small.survivors_fwd, 0, cfg.seed});
  if (two) res.stats.push_back({"small", "bwd", n_small, y, small.survivors_bwd, 0, cfg.seed});

  SurvivorSet sf = side_survivors(table, small.assignment, bound, y, Side::forward, N);
  SurvivorSet sb = two ? side_survivors(table, small.assignment, bound, y, Side::backward, N) : SurvivorSet{};

  // Medium primes: ladder scales when available, then a full-class greedy
  // over every remaining usable prime up to x/2.
  std::vector<StageRecord> stages;
  stages.push_back({Stage::small, Side::both, small.assignment});
  ResidueAssignment taken = small.assignment;
  auto absorb = [&](const CoverPlan& plan, Side side) {
    ResidueAssignment a = plan.assignment(Stage::medium);
    for (const auto& e : plan.entries) {
      for (std::int64_t n : e.covered_fwd) sf.erase(n);
      if (two) {
        for (std::int64_t n : e.covered_bwd) sb.erase(n);
      }
    }
    res.stats.push_back({"medium", std::string(to_string(side)), a.size(),
                         plan.survivors_before_fwd + plan.survivors_before_bwd, 0, 0, cfg.seed});
    taken.merge(a);
    stages.push_back({Stage::medium, side, std::move(a)});
  };
  if (!res.dense) {
    if (cfg.mode == "random") {
      Rng rf = Rng::stream(cfg.seed, "medium-fwd");
      absorb(select_shifts_random(params, ladder, table, small.assignment, Side::forward, rf), Side::forward);
      if (two) {
        Rng rb = Rng::stream(cfg.seed, "medium-bwd");
        absorb(select_shifts_random(params, ladder, table, small.assignment, Side::backward, rb),
               Side::backward);
      }
    } else {
      const GreedyReach reach{&ladder, params.K, y};
      const auto even = ladder.primes(true);
      const auto odd = ladder.primes(false);
      if (two) {
        absorb(select_shifts_greedy(even, sf, table, Side::forward, N, reach), Side::forward);
        // backward survivors are sieved by -N - b
        absorb(select_shifts_greedy(odd, sb, table, Side::backward, N, reach), Side::backward);
      } else {
        std::vector<std::uint64_t> all(ladder.primes(true));
        all.insert(all.end(), odd.begin(), odd.end());
        absorb(select_shifts_greedy(all, sf, table, Side::forward, N, reach), Side::forward);
      }
    }
  }
  std::vector<std::uint64_t> rest;
  for (std::uint64_t q : table.usable_primes(bound, x / 2)) {
    if (!taken.contains(q)) rest.push_back(q);
  }
  if (!rest.empty()) {
    if (two) {
      absorb(select_shifts_greedy_joint(rest, sf, sb, table, N), Side::both);
    } else {
      absorb(select_shifts_greedy(rest, sf, table, Side::forward, N), Side::forward);
    }
  }

  // True residual after small + medium, by re-sieving every assigned class.
  const std::uint64_t mid = std::max<std::uint64_t>(x / 2, bound);
  const SurvivorSet post_f = sieve_survivors(table, taken, PrimeRange{0, mid}, fwd_iv);
  const SurvivorSet post_b =
      two ? sieve_survivors(table, taken.mirrored(N), PrimeRange{0, mid}, bwd_iv) : SurvivorSet{};
  CoverPlan summary;
  summary.residual_fwd = post_f.to_vector();
  summary.residual_bwd = two ? post_b.to_vector() : std::vector<std::int64_t>{};
  res.residual = covering_residual_check(summary, params, table, two);
  for (auto& s : res.stats) {
    if (s.stage != "medium") continue;
    const bool f = s.side != "bwd", b = s.side != "fwd";
    s.survivors_after = (f ? res.residual.residual_fwd : 0) + (b ? res.residual.residual_bwd : 0);
    s.capacity = (f ? res.residual.capacity_fwd : 0) + (b ? res.residual.capacity_bwd : 0);
  }
  if (!res.residual.pass) {
    throw InfeasibleError("residual exceeds pairing capacity at y = " + std::to_string(y) + ": fwd " +
                          std::to_string(res.residual.residual_fwd) + "/" +
                          std::to_string(res.residual.capacity_fwd) + ", bwd " +
                          std::to_string(res.residual.residual_bwd) + "/" +
                          std::to_string(res.residual.capacity_bwd));
  }

  // Clean-up pairing.
  const PairingResult pairing =
      pairing_stage(summary.residual_fwd, summary.residual_bwd, table, x, N, two, taken);
  res.stats.push_back({"cleanup", "fwd", pairing.fwd.size(), res.residual.residual_fwd, 0,
                       res.residual.capacity_fwd, cfg.seed});
  taken.merge(pairing.fwd);
  stages.push_back({Stage::cleanup, Side::forward, pairing.fwd});
  if (two) {
    res.stats.push_back({"cleanup", "bwd", pairing.bwd.size(), res.residual.residual_bwd, 0,
                         res.residual.capacity_bwd, cfg.seed});
    taken.merge(pairing.bwd);
    stages.push_back({Stage::cleanup, Side::backward, pairing.bwd});
  }

  // Every other usable prime gets r = 0.
  ResidueAssignment rest_zero(Stage::cleanup);
  for (std::uint64_t q : table.usable_primes(0, x)) {
    if (!taken.contains(q)) rest_zero.set(q, 0);
  }
  taken.merge(rest_zero);
  if (!rest_zero.empty()) {
    res.stats.push_back({"cleanup", "both", rest_zero.size(), 0, 0, 0, cfg.seed});
    stages.push_back({Stage::cleanup, Side::both, rest_zero});
  }

  if (!sieve_survivors(table, taken, PrimeRange{0, x}, fwd_iv).empty() ||
      (two && !sieve_survivors(table, taken.mirrored(N), PrimeRange{0, x}, bwd_iv).empty())) {
    throw Error("internal: survivors remain after clean-up");
  }

  ResidueCertificate& cert = res.cert;
  cert.params = params;
  cert.params.n_target.reset();
  cert.y_target = y_target;
  cert.seed = cfg.seed;
  cert.mode = cfg.mode;
  cert.two_sided = two;
  cert.stages = std::move(stages);
  cert.irreducibility = verdict;
  const CrtResult crt = crt_combine(cert.stages);
  cert.placement = place(crt.b, crt.modulus, N, y);

  const double logN = static_cast<double>(mpz_sizeinbase(N.get_mpz_t(), 10) - 1) * std::log(10.0);
  res.m_theorem = std::floor(logN * std::pow(std::log(logN), cfg.delta));
  return res;
}

}  // namespace detail

/// Builds a certificate for the largest feasible y <= [x (log x)^delta]:
/// the target first, then a binary search over [4, target).
inline ConstructResult construct(const ConstructConfig& cfg) {
  const IntPolynomial f = IntPolynomial::parse(cfg.poly);
  const Irreducibility verdict = irreducibility_check(f, cfg.assert_irreducible);
  if (verdict == Irreducibility::fail) {
    throw UsageError("polynomial is not known to be irreducible (use --assert-irreducible to override)");
  }
  if (cfg.mode != "greedy" && cfg.mode != "random") throw UsageError("mode must be greedy or random");
  const SieveParams base = SieveParams::make(cfg.x, cfg.delta, cfg.xi, cfg.M, cfg.K, cfg.eps, cfg.z);
  const RootTable table = build_root_table_cached(f, cfg.x);
  const BigInt P = table.modulus(0, cfg.x);
  BigInt N;
  if (cfg.N) {
    N = *cfg.N;
    if (P * P * P > N) throw UsageError("N too small: need P(x)^3 <= N (try --n-mode auto)");
  } else {
    N = auto_N(P);
  }
  const std::uint64_t target = base.y;
  unsigned attempts = 0;
  auto attempt = [&](std::uint64_t y) -> std::optional<ConstructResult> {
    ++attempts;
    try {
      return detail::construct_at(cfg, f, table, N, verdict, target, y);
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  };
  constexpr std::uint64_t kMinY = 4;
  if (target < kMinY) throw InfeasibleError("target y = " + std::to_string(target) + " is below 4");
  std::optional<ConstructResult> best;
  if (!cfg.shrink_y) {
    ++attempts;
    best = detail::construct_at(cfg, f, table, N, verdict, target, target);
  } else if (!(best = attempt(target))) {
    try {
      ++attempts;
      best = detail::construct_at(cfg, f, table, N, verdict, target, kMinY);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(std::string("no feasible y in [4, ") + std::to_string(target) + "]: " + e.what());
    }
    std::uint64_t good = kMinY, bad = target;
    while (bad - good > 1) {
      const std::uint64_t mid = good + (bad - good) / 2;
      if (auto r = attempt(mid)) {
        best = std::move(r);
        good = mid;
      } else {
        bad = mid;
      }
    }
  }
  best->attempts = attempts;
  return std::move(*best);
}

}  // namespace composite_forge
