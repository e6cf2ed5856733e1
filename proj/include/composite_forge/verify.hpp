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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "composite_forge/assemble.hpp"
#include "composite_forge/bigint.hpp"
#include "composite_forge/modroots.hpp"
#include "composite_forge/poly.hpp"
#include "composite_forge/primes.hpp"
#include "composite_forge/rng.hpp"

namespace composite_forge {

struct Witness {
  BigInt n;
  std::uint64_t q = 0;
  std::uint64_t alpha = 0;
};

/// Independent check: n = alpha (mod q), f~(alpha) = 0 (mod q), q > B,
/// q does not divide a_B, q | f(n) and |f(n)| > q.
inline bool witness_sound(const IntPolynomial& f, const Witness& w) {
  if (w.q <= static_cast<std::uint64_t>(f.degree()) || !is_prime_u64(w.q)) return false;
  if (mod_u64(f.leading(), w.q) == 0) return false;
  if (mod_u64(w.n, w.q) != w.alpha) return false;
  if (f.companion_mod(w.alpha, w.q) != 0) return false;
  const BigInt v = f(w.n);
  if (mod_u64(v, w.q) != 0) return false;
  return abs(v) > from_u64(w.q);
}

/// First prime in `primes` (ascending) giving a sound witness for n.
inline std::optional<Witness> find_witness(const IntPolynomial& f, const BigInt& n,
                                           std::span<const std::uint64_t> primes) {
  std::optional<BigInt> value;
  for (std::uint64_t q : primes) {
    if (q <= static_cast<std::uint64_t>(f.degree()) || mod_u64(f.leading(), q) == 0) continue;
    const std::uint64_t a = mod_u64(n, q);
    if (f.companion_mod(a, q) != 0) continue;
    if (!value) value = f(n);
    if (mod_u64(*value, q) == 0 && abs(*value) > from_u64(q)) return Witness{n, q, a};
  }
  return std::nullopt;
}

struct VerifyReport {
  bool valid = false;
  std::size_t checked = 0;
  std::vector<BigInt> failures;
  std::string mode = "deep";
  std::vector<std::string> problems;

  nlohmann::json to_json() const {
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& n : failures) fails.push_back(to_decimal(n));
    return {{"valid", valid}, {"checked", checked}, {"failures", fails}, {"mode", mode}, {"problems", problems}};
  }
};

namespace detail {

// Offsets into an interval of length len checked by the verifier.
inline std::vector<std::uint64_t> sample_offsets(std::uint64_t len, bool deep) {
  std::vector<std::uint64_t> out;
  if (len == 0) return out;
  if (deep) {
    out.resize(len);
    for (std::uint64_t i = 0; i < len; ++i) out[i] = i;
    return out;
  }
  for (std::uint64_t i = 0; i < len; i += 100) out.push_back(i);
  out.push_back(len - 1);
  out.push_back(len / 2);
  if (len / 2 > 0) out.push_back(len / 2 - 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void structural_checks(const ResidueCertificate& c, const RootTable& table, const CrtResult& crt,
                              std::vector<std::string>& problems) {
  const std::uint64_t x = c.params.x;
  const ResidueAssignment all = c.merged();
  for (const auto& [q, r] : all.residues()) {
    if (q > x || !is_prime_u64(q)) problems.push_back("assigned modulus " + std::to_string(q) + " is not a prime <= x");
  }
  for (std::uint64_t q : table.usable_primes(0, x)) {
    if (!all.contains(q)) problems.push_back("sieving prime " + std::to_string(q) + " has no residue");
  }
  for (const auto& [q, r] : all.residues()) {
    if (mod_u64(crt.b, q) != r) problems.push_back("CRT mismatch at q = " + std::to_string(q));
  }
  if (!c.placement) {
    problems.push_back("certificate has no placement");
    return;
  }
  const Placement& p = *c.placement;
  const BigInt& N = p.N;
  const BigInt y = from_u64(c.params.y);
  const BigInt& P = crt.modulus;
  if (c.params.y < 2) problems.push_back("y must be >= 2");
  if (P * P * P > N) problems.push_back("P(x)^3 > N");
  const BigInt lo = ceil_div(-3 * N, BigInt(10));
  const BigInt hi = floor_div(-N, BigInt(5));
  if (floor_mod(p.b1 - crt.b, P) != 0) problems.push_back("b1 is not congruent to b mod P(x)");
  if (p.b1 < lo || p.b1 > hi) problems.push_back("b1 outside [-3N/10, -N/5]");
  if (p.b1 + P <= hi) problems.push_back("b1 is not the representative of least absolute value");
  if (p.b2 != -p.b1) problems.push_back("b2 != -b1");
  if (p.I1_lo != p.b2 + 1 || p.I1_hi != p.b2 + y) problems.push_back("I1 != [b2+1, b2+y]");
  if (p.I2_lo != N - p.b2 - y || p.I2_hi != N - p.b2 - 1) problems.push_back("I2 != [N-b2-y, N-b2-1]");
  const BigInt half = from_u64(c.params.y / 2);
  if (p.n1 != p.b2 + half || p.n2 != N - p.b2 - half) problems.push_back("centers inconsistent with b2");
  if (p.n1 + p.n2 != N) problems.push_back("n1 + n2 != N");
  if (p.m + 1 != c.params.y / 2) problems.push_back("m != floor(y/2) - 1");
}

}  // namespace detail

/// Stateless check of a certificate: structure, CRT, placement, and a
/// divisor witness for every n in I1 (and I2 when two-sided), or for a 1%
/// stride sample plus endpoints and centers in fast mode.
inline VerifyReport verify_certificate(const nlohmann::json& json, bool deep) {
  VerifyReport rep;
  rep.mode = deep ? "deep" : "fast";
  std::optional<ResidueCertificate> cert;
  try {
    cert = certificate_from_json(json);
  } catch (const Error& e) {
    rep.problems.push_back(e.what());
    return rep;
  }
  const ResidueCertificate& c = *cert;
  const RootTable table = build_root_table(c.poly, c.params.x);
  CrtResult crt;
  try {
    crt = crt_combine(c.stages);
  } catch (const Error& e) {
    rep.problems.push_back(e.what());
    return rep;
  }
  detail::structural_checks(c, table, crt, rep.problems);
  if (!c.placement) return rep;

  std::vector<std::uint64_t> primes;
  const ResidueAssignment all = c.merged();
  for (const auto& [q, r] : all.residues()) {
    if (q <= c.params.x) primes.push_back(q);
  }
  std::vector<BigInt> points;
  auto add_interval = [&](const BigInt& lo, const BigInt& hi) {
    if (hi < lo) return;
    const BigInt len = hi - lo + 1;
    if (!len.fits_ulong_p()) throw Error("interval too long to verify");
    for (std::uint64_t off : detail::sample_offsets(len.get_ui(), deep)) points.push_back(lo + from_u64(off));
  };
  // Witnesses are sought on the intervals the residues imply.
  Placement pl = *c.placement;
  try {
    const Placement derived = place(crt.b, crt.modulus, pl.N, c.params.y);
    if (!(derived == pl)) rep.problems.push_back("placement differs from the one implied by the residues");
    pl = derived;
  } catch (const Error& e) {
    rep.problems.push_back(e.what());
  }
  add_interval(pl.I1_lo, pl.I1_hi);
  if (c.two_sided) add_interval(pl.I2_lo, pl.I2_hi);
  if (!deep) {
    points.push_back(pl.n1);
    if (c.two_sided) points.push_back(pl.n2);
  }

  const unsigned workers =
      points.size() < 4096 ? 1u : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<std::vector<BigInt>> fails(workers);
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < points.size(); i += workers) {
      const auto wit = find_witness(c.poly, points[i], primes);
      if (!wit || !witness_sound(c.poly, *wit)) fails[w].push_back(points[i]);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& f : fails) rep.failures.insert(rep.failures.end(), f.begin(), f.end());
  std::sort(rep.failures.begin(), rep.failures.end());
  rep.failures.erase(std::unique(rep.failures.begin(), rep.failures.end()), rep.failures.end());
  rep.checked = points.size();
  rep.valid = rep.failures.empty() && rep.problems.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Longest-run oracle

struct RunRecord {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  std::uint64_t n_scanned = 0;
};

/// Longest run of consecutive n in [1, N_max] with f(n) not prime
/// (|f(n)| <= 1 counts as not prime); the earliest such run on ties.
inline RunRecord oracle_longest_run(const IntPolynomial& f, std::uint64_t n_max) {
  if (n_max > 100'000'000) throw UsageError("N_max must be <= 10^8");
  RunRecord best{0, 0, n_max};
  std::uint64_t cur_start = 0, cur_len = 0;
  BigInt v;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    v = abs(f(from_u64(n)));
    const bool prime = v > 1 && is_probable_prime(v);
    if (prime) {
      cur_len = 0;
      continue;
    }
    if (cur_len == 0) cur_start = n;
    ++cur_len;
    if (cur_len > best.length) {
      best.start = cur_start;
      best.length = cur_len;
    }
  }
  return best;
}

inline nlohmann::json to_json(const RunRecord& r) {
  return {{"start", r.start}, {"length", r.length}, {"N_scanned", r.n_scanned}};
}

// ---------------------------------------------------------------------------
// Covering-lemma harness

/// e = {t + d mod n : d in offsets} with t uniform over `shifts`
/// (all of Z_n when `shifts` is empty).
struct ShiftFamily {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint64_t> shifts;
};

struct CoveringInstance {
  std::uint64_t n = 0;  // V = Z_n
  std::vector<ShiftFamily> families;
};

struct CoveringConfig {
  std::uint64_t y = 10000;
  std::uint64_t v_size = 4000;
  std::size_t k = 4;  // #e_i
  double C1 = 10;
  double eta = 0.02;
  double K0 = 3;
  double delta = 0.5;
  unsigned trials = 100;
  std::uint64_t seed = 0;
};

struct HypothesisReport {
  double max_size = 0, size_bound = 0;  // (I)
  double max_p = 0, p_bound = 0;        // (II)
  double max_pair = 0, pair_bound = 0;  // (III)
  double max_dev = 0, eta = 0;          // (IV)
  bool ok = false;
  std::string reason;
};

/// Exact check of the four hypotheses for an instance, treating `y` as
/// the lemma's scale parameter.
inline HypothesisReport check_hypotheses(const CoveringInstance& inst, std::uint64_t y, double C1,
                                         double eta, double K0) {
  HypothesisReport h;
  const double ly = std::log(static_cast<double>(y));
  const double n = static_cast<double>(inst.n);
  h.size_bound = K0 * std::sqrt(ly) / std::log(ly);
  h.p_bound = std::pow(static_cast<double>(y), -0.51);
  h.pair_bound = 1.0 / std::sqrt(static_cast<double>(y));
  h.eta = eta;
  std::vector<double> mass(inst.n, 0.0);
  std::vector<double> pair(inst.n, 0.0);  // indexed by difference for full-shift families
  bool restricted = false;
  for (const auto& fam : inst.families) {
    h.max_size = std::max(h.max_size, static_cast<double>(fam.offsets.size()));
    if (fam.shifts.empty()) {
      std::vector<std::uint64_t> e;
      for (std::uint64_t d : fam.offsets) e.push_back(d % inst.n);
      std::sort(e.begin(), e.end());
      e.erase(std::unique(e.begin(), e.end()), e.end());
      const double p = static_cast<double>(e.size()) / n;
      h.max_p = std::max(h.max_p, p);
      for (double& m : mass) m += p;
      for (std::uint64_t a : e) {
        for (std::uint64_t b : e) {
          if (a != b) pair[(b + inst.n - a) % inst.n] += 1.0 / n;
        }
      }
    } else {
      restricted = true;
    }
  }
  if (restricted) {
    // Pair masses for arbitrary supports, by enumeration.
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> pm;
    for (const auto& fam : inst.families) {
      if (fam.shifts.empty()) continue;
      const double p = 1.0 / static_cast<double>(fam.shifts.size());
      std::vector<double> local(inst.n, 0.0);
      for (std::uint64_t t : fam.shifts) {
        std::vector<std::uint64_t> e;
        for (std::uint64_t d : fam.offsets) e.push_back((t + d) % inst.n);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        for (std::uint64_t v : e) local[v] += p;
        for (std::uint64_t a : e) {
          for (std::uint64_t b : e) {
            if (a != b) pm[{a, b}] += p;
          }
        }
      }
      for (std::uint64_t v = 0; v < inst.n; ++v) {
        mass[v] += local[v];
        h.max_p = std::max(h.max_p, local[v]);
      }
    }
    // Full-shift families contribute by difference only.
    for (auto& [key, val] : pm) val += pair[(key.second + inst.n - key.first) % inst.n];
    for (const auto& [key, val] : pm) h.max_pair = std::max(h.max_pair, val);
  }
  for (double v : pair) h.max_pair = std::max(h.max_pair, v);
  for (double v : mass) h.max_dev = std::max(h.max_dev, std::abs(v - C1));

  if (inst.n > y || inst.families.size() > y || inst.families.empty()) {
    h.reason = "need #V <= y and 1 <= s <= y";
  } else if (h.max_size > h.size_bound) {
    h.reason = "family size exceeds K0 (log y)^(1/2) / log log y";
  } else if (h.max_p > h.p_bound) {
    h.reason = "P(v in e_i) exceeds y^(-1/2 - 1/100)";
  } else if (h.max_pair > h.pair_bound * (1 + 1e-12)) {
    h.reason = "pair mass exceeds y^(-1/2)";
  } else if (h.max_dev > eta * (1 + 1e-12)) {
    h.reason = "coverage mass deviates from C1 by more than eta";
  }
  h.ok = h.reason.empty();
  return h;
}

/// Random full-shift instance on Z_{#V}: s = C1 #V / k families of k
/// distinct offsets, redrawn while any difference would push the pair
/// mass above y^(-1/2). Throws UsageError when the hypotheses fail.
inline CoveringInstance generate_instance(const CoveringConfig& cfg, Rng& rng) {
  if (cfg.k < 1 || cfg.v_size < cfg.k || cfg.v_size > cfg.y) throw UsageError("covering config: need k <= #V <= y");
  if (!(cfg.C1 >= std::pow(10.0, 2 * cfg.delta) && cfg.C1 <= 100)) {
    throw UsageError("covering config: C1 must lie in [10^(2 delta), 100]");
  }
  CoveringInstance inst;
  inst.n = cfg.v_size;
  const auto s = static_cast<std::size_t>(std::llround(cfg.C1 * static_cast<double>(cfg.v_size) /
                                                        static_cast<double>(cfg.k)));
  const auto cap = static_cast<std::uint64_t>(
      std::floor(static_cast<double>(cfg.v_size) / std::sqrt(static_cast<double>(cfg.y)) + 1e-9));
  std::vector<std::uint64_t> diff(inst.n, 0);
  std::vector<std::uint64_t> d;
  for (std::size_t i = 0; i < s; ++i) {
    for (unsigned tries = 0;; ++tries) {
      if (tries > 10000) throw UsageError("covering config: cannot meet the pair-mass bound");
      d.assign(1, 0);
      while (d.size() < cfg.k) {
        const std::uint64_t v = 1 + rng.below(inst.n - 1);
        if (std::find(d.begin(), d.end(), v) == d.end()) d.push_back(v);
      }
      // a family may repeat a difference, so count before checking
      std::vector<std::uint64_t> touched;
      for (std::uint64_t a : d) {
        for (std::uint64_t b : d) {
          if (a == b) continue;
          const std::uint64_t k = (b + inst.n - a) % inst.n;
          ++diff[k];
          touched.push_back(k);
        }
      }
      const bool fits = std::all_of(touched.begin(), touched.end(), [&](std::uint64_t k) { return diff[k] <= cap; });
      if (fits) break;
      for (std::uint64_t k : touched) --diff[k];
    }
    std::sort(d.begin(), d.end());
    inst.families.push_back({d, {}});
  }
  const HypothesisReport h = check_hypotheses(inst, cfg.y, cfg.C1, cfg.eta, cfg.K0);
  if (!h.ok) throw UsageError("covering generator violates a hypothesis: " + h.reason);
  return inst;
}

/// Greedy realization: each family in turn takes the shift covering the
/// most uncovered points (smallest shift on ties). Returns #(V \ union e_i).
inline std::size_t greedy_cover_residual(const CoveringInstance& inst) {
  const std::uint64_t n = inst.n;
  std::vector<char> covered(n, 0);
  std::vector<std::uint64_t> uncovered(n);
  for (std::uint64_t v = 0; v < n; ++v) uncovered[v] = v;
  std::vector<std::uint32_t> score;
  for (const auto& fam : inst.families) {
    if (uncovered.empty()) break;
    std::uint64_t best = 0;
    if (fam.shifts.empty()) {
      score.assign(n, 0);
      for (std::uint64_t u : uncovered) {
        for (std::uint64_t d : fam.offsets) ++score[(u + n - d % n) % n];
      }
      best = static_cast<std::uint64_t>(std::max_element(score.begin(), score.end()) - score.begin());
    } else {
      std::uint32_t best_score = 0;
      bool have = false;
      for (std::uint64_t t : fam.shifts) {
        std::uint32_t sc = 0;
        for (std::uint64_t d : fam.offsets) sc += covered[(t + d) % n] ? 0 : 1;
        if (!have || sc > best_score || (sc == best_score && t < best)) {
          best = t;
          best_score = sc;
          have = true;
        }
      }
    }
    for (std::uint64_t d : fam.offsets) covered[(best + d) % n] = 1;
    std::erase_if(uncovered, [&](std::uint64_t v) { return covered[v] != 0; });
  }
  return uncovered.size();
}

struct CoveringTrial {
  unsigned trial = 0;
  std::size_t residual = 0;
  double fraction = 0;
  double ratio = 0;  // residual / (eta #V)
};

struct CoveringSummary {
  std::vector<CoveringTrial> trials;
  double c_hat = 0;
  unsigned within_bound = 0;  // trials with residual <= 10 eta #V
};

inline CoveringSummary covering_lemma_sim(const CoveringConfig& cfg) {
  CoveringSummary out;
  for (unsigned t = 0; t < cfg.trials; ++t) {
    Rng rng = Rng::stream(cfg.seed, "covering-" + std::to_string(t));
    const CoveringInstance inst = generate_instance(cfg, rng);
    CoveringTrial row;
    row.trial = t;
    row.residual = greedy_cover_residual(inst);
    row.fraction = static_cast<double>(row.residual) / static_cast<double>(inst.n);
    row.ratio = row.fraction / cfg.eta;
    out.c_hat = std::max(out.c_hat, row.ratio);
    if (static_cast<double>(row.residual) <= 10 * cfg.eta * static_cast<double>(inst.n)) ++out.within_bound;
    out.trials.push_back(row);
  }
  return out;
}

}  // namespace composite_forge
