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
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "composite_forge/bigint.hpp"
#include "composite_forge/modroots.hpp"
#include "composite_forge/rng.hpp"
#include "composite_forge/sieve.hpp"

namespace composite_forge {

/// 6 * 10^(2 delta) / log(1 / (2 delta)); infinite at delta >= 1/2.
inline double delta_constraint_lhs(double delta) {
  const double denom = std::log(1.0 / (2.0 * delta));
  if (!(denom > 0)) return std::numeric_limits<double>::infinity();
  return 6.0 * std::pow(10.0, 2.0 * delta) / denom;
}

/// C(rho) = sup{delta in (0, 1/2) : delta_constraint_lhs(delta) < rho}.
/// The left side is increasing in delta, so this is its root.
inline double c_rho(double rho) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (delta_constraint_lhs(mid) < rho ? lo : hi) = mid;
  }
  return lo;
}

inline std::uint64_t floor_u64(double v) {
  return v <= 0 ? 0 : static_cast<std::uint64_t>(std::floor(v));
}

// x, delta, xi, M, K, eps and the derived y = [x (log x)^delta] and
// z = y log log x / (log x)^(1/2). `z` may be pinned explicitly.
struct SieveParams {
  std::uint64_t x = 0;
  double delta = 0.5;
  double xi = 2.0;
  double M = 6.5;
  double K = 8.0;
  double eps = 0.05;
  std::uint64_t y = 0;
  double z = 0;
  bool z_pinned = false;
  std::optional<BigInt> n_target;

  static std::uint64_t target_y(std::uint64_t x, double delta) {
    const double lx = std::log(static_cast<double>(x));
    return floor_u64(static_cast<double>(x) * std::pow(lx, delta));
  }

  static double derived_z(std::uint64_t x, std::uint64_t y) {
    const double lx = std::log(static_cast<double>(x));
    return static_cast<double>(y) * std::log(lx) / std::sqrt(lx);
  }

  static SieveParams make(std::uint64_t x, double delta = 0.5, double xi = 2.0, double M = 6.5,
                          double K = 8.0, double eps = 0.05,
                          std::optional<double> z_pin = std::nullopt) {
    SieveParams p;
    p.x = x;
    p.delta = delta;
    p.xi = xi;
    p.M = M;
    p.K = K;
    p.eps = eps;
    p.validate();
    p.y = target_y(x, delta);
    p.z_pinned = z_pin.has_value();
    p.z = z_pin ? *z_pin : derived_z(x, p.y);
    return p;
  }

  /// Same parameters on a shorter interval; z follows y unless pinned.
  SieveParams with_y(std::uint64_t new_y) const {
    SieveParams p = *this;
    p.y = new_y;
    if (!z_pinned) p.z = derived_z(x, new_y);
    return p;
  }

  void validate() const {
    if (x < 3) throw UsageError("x must be >= 3");
    if (!(delta > 1e-6 && delta <= 0.5)) throw UsageError("delta must lie in (1e-6, 1/2]");
    if (!(xi > 1)) throw UsageError("xi must be > 1");
    if (!(M > 6 && M < 7)) throw UsageError("M must lie in (6, 7)");
    if (!(K > 0)) throw UsageError("K must be > 0");
    if (!(eps > 0 && eps < (M - 6) / 7)) throw UsageError("eps must lie in (0, (M-6)/7)");
  }

  /// Whether 6 * 10^(2 delta) / log(1/(2 delta)) < rho. Reported only.
  bool delta_constraint_holds(double rho) const { return delta_constraint_lhs(delta) < rho; }
};

// ---------------------------------------------------------------------------
// H-scale ladder

struct Scale {
  int j = 0;
  double H = 1;
  std::uint64_t lo = 0;  // primes lo < q <= hi, i.e. (y/(xi H), y/H]
  std::uint64_t hi = 0;
  std::map<int, std::vector<std::uint64_t>> buckets;  // nu -> Q_{H,nu}

  bool even() const { return j % 2 == 0; }
};

struct HScaleLadder {
  std::vector<Scale> scales;
  std::map<std::uint64_t, std::size_t> scale_of;  // q -> index of H_q

  bool empty() const { return scales.empty(); }
  std::size_t prime_count() const { return scale_of.size(); }

  /// Dense-mode trigger: no scales or fewer than 10 bucketed primes.
  bool dense() const { return prime_count() < 10; }

  const Scale& scale_for(std::uint64_t q) const { return scales.at(scale_of.at(q)); }

  /// Q' (even j) or Q'' (odd j), ascending.
  std::vector<std::uint64_t> primes(bool even) const {
    std::vector<std::uint64_t> out;
    for (const auto& [q, idx] : scale_of) {
      if (scales[idx].even() == even) out.push_back(q);
    }
    return out;
  }
};

/// Scales H = xi^j with 2y/x <= H <= y/(xi z) and their buckets
/// Q_{H,nu} = {q in (y/(xi H), y/H] : #I_q = nu}, clipped to (z, x/2].
inline HScaleLadder build_ladder(const SieveParams& params, const RootTable& table) {
  HScaleLadder ladder;
  const double y = static_cast<double>(params.y);
  const double x = static_cast<double>(params.x);
  const double h_min = 2.0 * y / x;
  const double h_max = y / (params.xi * params.z);
  const std::uint64_t clip_lo = floor_u64(params.z);
  const std::uint64_t clip_hi = std::min<std::uint64_t>(params.x / 2, table.limit());
  for (int j = 0;; ++j) {
    const double H = std::pow(params.xi, j);
    if (H > h_max * (1 + 1e-12)) break;
    if (H < h_min * (1 - 1e-12)) continue;
    Scale s;
    s.j = j;
    s.H = H;
    s.lo = std::max(floor_u64(y / (params.xi * H)), clip_lo);
    s.hi = std::min(floor_u64(y / H), clip_hi);
    const auto [b, e] = table.index_range(s.lo, s.hi);
    for (std::size_t i = b; i < e; ++i) {
      const auto nu = table.roots(i).size();
      if (nu == 0) continue;
      s.buckets[static_cast<int>(nu)].push_back(table.prime(i));
      ladder.scale_of[table.prime(i)] = ladder.scales.size();
    }
    ladder.scales.push_back(std::move(s));
  }
  return ladder;
}

// ---------------------------------------------------------------------------
// Small-prime residues

struct SmallOptions {
  std::uint64_t bound = 0;  // primes q <= bound are sampled
  double threshold_factor = 2.0;
  unsigned retry_budget = 64;
};

struct SmallSample {
  ResidueAssignment assignment{Stage::small};
  unsigned rejections = 0;
  std::size_t survivors_fwd = 0;
  std::size_t survivors_bwd = 0;
  double sigma = 1;
  double threshold = 0;
};

/// Uniform r_q for every usable q <= bound, resampled until
/// #(S' on [1,y]) <= factor * sigma * y (and, two-sided, the same for
/// S'' = S(-N-b) on [-y,-1]). Throws InfeasibleError when the retry budget
/// runs out.
inline SmallSample sample_small_residue(const SieveParams& params, const RootTable& table, Rng& rng,
                                        bool two_sided, const SmallOptions& opt) {
  if (opt.bound > table.limit()) throw Error("root table does not reach the small-prime bound");
  if (two_sided && !params.n_target) throw UsageError("two-sided sampling needs N");
  const std::vector<std::uint64_t> primes = table.usable_primes(0, opt.bound);
  const auto y = static_cast<std::int64_t>(params.y);
  SmallSample out;
  out.sigma = table.sigma(0, opt.bound);
  out.threshold = opt.threshold_factor * out.sigma * static_cast<double>(params.y);
  const PrimeRange range{0, opt.bound};
  for (unsigned attempt = 0;; ++attempt) {
    ResidueAssignment a(Stage::small);
    for (std::uint64_t q : primes) a.set(q, rng.below(q));
    out.survivors_fwd = sieve_survivors(table, a, range, Interval{1, y}).count();
    out.survivors_bwd =
        two_sided ? sieve_survivors(table, a.mirrored(*params.n_target), range, Interval{-y, -1}).count()
                  : 0;
    const bool ok = static_cast<double>(out.survivors_fwd) <= out.threshold &&
                    static_cast<double>(out.survivors_bwd) <= out.threshold;
    if (ok) {
      out.assignment = std::move(a);
      out.rejections = attempt;
      return out;
    }
    if (attempt >= opt.retry_budget) {
      throw InfeasibleError("small-prime sampling exhausted its retry budget (" +
                            std::to_string(opt.retry_budget) + ") with " +
                            std::to_string(out.survivors_fwd) + " survivors vs threshold " +
                            std::to_string(out.threshold));
    }
  }
}

// ---------------------------------------------------------------------------
// Cover plans

enum class Side { forward, backward, both };

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::forward: return "fwd";
    case Side::backward: return "bwd";
    case Side::both: return "both";
  }
  return "both";
}

inline Side side_from_string(std::string_view s) {
  if (s == "fwd") return Side::forward;
  if (s == "bwd") return Side::backward;
  if (s == "both") return Side::both;
  throw UsageError("unknown side: " + std::string(s));
}

/// Residues are represented in [1, q] inside progressions.
inline std::int64_t alpha_rep(std::uint64_t alpha, std::uint64_t q) {
  return static_cast<std::int64_t>(alpha == 0 ? q : alpha);
}

/// Certificate residue induced by a shift: n mod q forward,
/// (-N - n) mod q backward.
inline std::uint64_t residue_for_shift(std::int64_t shift, std::uint64_t q, Side side,
                                       const std::optional<BigInt>& n_target) {
  const std::uint64_t s = mod_i64(shift, q);
  if (side != Side::backward) return s;
  if (!n_target) throw UsageError("backward residues need N");
  return (2 * q - mod_u64(*n_target, q) - s) % q;
}

struct PlanEntry {
  std::uint64_t q = 0;
  std::int64_t shift = 0;
  std::uint64_t residue = 0;
  std::vector<std::int64_t> covered_fwd;
  std::vector<std::int64_t> covered_bwd;
};

struct CoverPlan {
  Side side = Side::forward;
  std::vector<PlanEntry> entries;
  std::size_t survivors_before_fwd = 0;
  std::size_t survivors_before_bwd = 0;
  std::vector<std::int64_t> residual_fwd;
  std::vector<std::int64_t> residual_bwd;
  std::vector<std::uint64_t> dropped;  // primes rejected by the weight-sum check

  ResidueAssignment assignment(Stage stage = Stage::medium) const {
    ResidueAssignment a(stage);
    for (const auto& e : entries) a.set(e.q, e.residue);
    return a;
  }
};

// ---------------------------------------------------------------------------
// lambda weights

/// log lambda(H; q, n), or nullopt when the progression filtered by S1 is
/// not contained in S2 (weight zero). The progression is
/// {n + alpha + s q h : 1 <= h <= K H}, s = +1 forward and -1 backward;
/// #AP counts its elements in S1 and lambda = sigma2^(-#AP).
inline std::optional<double> lambda_log_weight(double H, std::uint64_t q, std::int64_t n,
                                               std::span<const std::uint64_t> roots, Side side,
                                               const SurvivorSet& s1, const SurvivorSet& s2,
                                               double sigma2, double K) {
  const auto reach = static_cast<std::int64_t>(std::floor(K * H));
  const std::int64_t step = (side == Side::backward ? -1 : 1) * static_cast<std::int64_t>(q);
  std::int64_t ap = 0;
  for (std::uint64_t a : roots) {
    for (std::int64_t h = 1; h <= reach; ++h) {
      const std::int64_t m = n + alpha_rep(a, q) + step * h;
      if (!s1.in_range(m) || !s2.in_range(m)) throw Error("lambda: progression leaves sieve range");
      if (!s1.contains(m)) continue;
      if (!s2.contains(m)) return std::nullopt;
      ++ap;
    }
  }
  return -static_cast<double>(ap) * std::log(sigma2);
}

inline double lambda_weight(double H, std::uint64_t q, std::int64_t n,
                            std::span<const std::uint64_t> roots, Side side, const SurvivorSet& s1,
                            const SurvivorSet& s2, double sigma2, double K) {
  const auto lw = lambda_log_weight(H, q, n, roots, side, s1, s2, sigma2, K);
  return lw ? std::exp(*lw) : 0.0;
}

/// Shift ranges: (-(K+1)y, y] forward, [-y, (K+1)y) backward.
inline Interval shift_range(Side side, std::uint64_t y, double K) {
  const double span = (K + 1) * static_cast<double>(y);
  const auto yy = static_cast<std::int64_t>(y);
  if (side == Side::backward) {
    return {-yy, static_cast<std::int64_t>(std::ceil(span)) - 1};
  }
  return {static_cast<std::int64_t>(std::floor(-span)) + 1, yy};
}

/// log lambda for every shift in `shifts` (-inf for weight zero), using
/// sliding windows along each residue class mod q.
inline std::vector<double> shift_log_weights(double H, std::uint64_t q,
                                             std::span<const std::uint64_t> roots, Side side,
                                             const SurvivorSet& s1, const SurvivorSet& s2,
                                             double sigma2, double K, Interval shifts) {
  const auto reach = static_cast<std::int64_t>(std::floor(K * H));
  const auto qq = static_cast<std::int64_t>(q);
  const std::int64_t sgn = side == Side::backward ? -1 : 1;
  const auto len = static_cast<std::size_t>(shifts.length());
  auto in1 = [&](std::int64_t m) -> std::int64_t {
    if (!s1.in_range(m) || !s2.in_range(m)) throw Error("lambda: progression leaves sieve range");
    return s1.contains(m) ? 1 : 0;
  };
  auto bad1 = [&](std::int64_t m) -> std::int64_t {
    return s1.contains(m) && !s2.contains(m) ? 1 : 0;
  };
  std::vector<std::int64_t> count(len, 0), bad(len, 0);
  std::vector<std::int64_t> wc(len), wb(len);  // per-alpha windows
  for (std::uint64_t a : roots) {
    const std::int64_t ar = alpha_rep(a, q);
    for (std::size_t i = 0; i < len; ++i) {
      const std::int64_t n = shifts.lo + static_cast<std::int64_t>(i);
      if (static_cast<std::int64_t>(i) < qq) {
        wc[i] = 0;
        wb[i] = 0;
        for (std::int64_t h = 1; h <= reach; ++h) {
          const std::int64_t m = n + ar + sgn * qq * h;
          wc[i] += in1(m);
          wb[i] += bad1(m);
        }
      } else {
        // window(n) = window(n - q) + entering - leaving
        const std::int64_t enter = sgn > 0 ? n + ar + qq * reach : n + ar - qq;
        const std::int64_t leave = sgn > 0 ? n + ar : n + ar - qq * (reach + 1);
        const std::size_t prev = i - static_cast<std::size_t>(qq);
        wc[i] = wc[prev] + in1(enter) - in1(leave);
        wb[i] = wb[prev] + bad1(enter) - bad1(leave);
      }
      count[i] += wc[i];
      bad[i] += wb[i];
    }
  }
  const double per = -std::log(sigma2);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = bad[i] > 0 ? -std::numeric_limits<double>::infinity()
                        : static_cast<double>(count[i]) * per;
  }
  return out;
}

namespace detail {

// log(sum exp(v)) over finite entries; -inf when all are -inf.
inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double w : v) mx = std::max(mx, w);
  if (!std::isfinite(mx)) return mx;
  double acc = 0;
  for (double w : v) {
    if (std::isfinite(w)) acc += std::exp(w - mx);
  }
  return mx + std::log(acc);
}

inline std::vector<std::int64_t> progression(std::int64_t n, std::uint64_t q,
                                             std::span<const std::uint64_t> roots, Side side,
                                             std::int64_t reach) {
  std::vector<std::int64_t> out;
  const std::int64_t step = (side == Side::backward ? -1 : 1) * static_cast<std::int64_t>(q);
  for (std::uint64_t a : roots) {
    for (std::int64_t h = 1; h <= reach; ++h) out.push_back(n + alpha_rep(a, q) + step * h);
  }
  return out;
}

}  // namespace detail

/// Index i drawn with probability exp(lw[i]) / sum exp(lw); entries of
/// -inf are never drawn. Throws if every weight is zero.
inline std::size_t draw_from_log_weights(std::span<const double> lw, Rng& rng) {
  const double log_total = detail::log_sum_exp(lw);
  if (!std::isfinite(log_total)) throw Error("all weights are zero");
  const double u = rng.uniform();
  double acc = 0;
  std::size_t pick = lw.size();
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (!std::isfinite(lw[i])) continue;
    acc += std::exp(lw[i] - log_total);
    pick = i;
    if (acc > u) break;
  }
  return pick;
}

struct RandomOptions {
  double sum_window_lo = 0.5;  // accept q when sum lambda / ((K+2)y) is in [lo, hi]
  double sum_window_hi = 2.0;
};

/// Survivor set S' = S_z(b) on [1,y] (forward) or S'' = S_z(-N-b) on
/// [-y,-1] (backward) for the small-prime residues b.
inline SurvivorSet side_survivors(const RootTable& table, const ResidueAssignment& small,
                                  std::uint64_t bound, std::uint64_t y, Side side,
                                  const std::optional<BigInt>& n_target) {
  const auto yy = static_cast<std::int64_t>(y);
  if (side == Side::backward) {
    if (!n_target) throw UsageError("backward survivors need N");
    return sieve_survivors(table, small.mirrored(*n_target), PrimeRange{0, bound}, Interval{-yy, -1});
  }
  return sieve_survivors(table, small, PrimeRange{0, bound}, Interval{1, yy});
}

/// One random shift per ladder prime of the side's parity, drawn with
/// P(n_q = n) proportional to lambda(H_q; q, n) over the side's shift
/// range. Primes whose weight sum is zero or falls outside the sanity
/// window around (K+2)y are dropped and listed in `dropped`.
inline CoverPlan select_shifts_random(const SieveParams& params, const HScaleLadder& ladder,
                                      const RootTable& table, const ResidueAssignment& small,
                                      Side side, Rng& rng, const RandomOptions& opt = {}) {
  if (ladder.empty()) throw UsageError("random shift selection needs a nonempty ladder");
  const std::uint64_t z = floor_u64(params.z);
  const std::uint64_t y = params.y;
  const SurvivorSet survivors = side_survivors(table, small, z, y, side, params.n_target);
  CoverPlan plan;
  plan.side = side;
  (side == Side::backward ? plan.survivors_before_bwd : plan.survivors_before_fwd) = survivors.count();
  SurvivorSet residual = survivors;
  const Interval shifts = shift_range(side, y, params.K);
  const double target = (params.K + 2) * static_cast<double>(y);
  const bool even = side != Side::backward;

  for (const Scale& scale : ladder.scales) {
    if (scale.even() != even || scale.buckets.empty()) continue;
    const double hm = std::pow(scale.H, params.M);
    const std::uint64_t cut = std::min(floor_u64(hm), z);
    // Progressions stay within (K+2)y + 2 q_max of the origin.
    const auto pad = static_cast<std::int64_t>(std::ceil((params.K + 2) * static_cast<double>(y))) +
                     2 * static_cast<std::int64_t>(scale.hi) + 2;
    const Interval span{-pad, pad};
    const ResidueAssignment b1 = small.restricted(0, cut);
    const ResidueAssignment b2 = small.restricted(cut, z);
    const bool back = side == Side::backward;
    const SurvivorSet s1 = sieve_survivors(table, back ? b1.mirrored(*params.n_target) : b1,
                                           PrimeRange{0, cut}, span);
    const SurvivorSet s2 = sieve_survivors(table, back ? b2.mirrored(*params.n_target) : b2,
                                           PrimeRange{cut, z}, span);
    const double sigma2 = table.sigma(cut, z);
    const auto reach = static_cast<std::int64_t>(std::floor(params.K * scale.H));
    for (const auto& [nu, bucket] : scale.buckets) {
      for (std::uint64_t q : bucket) {
        const auto roots = table.roots_of(q);
        const std::vector<double> lw =
            shift_log_weights(scale.H, q, roots, side, s1, s2, sigma2, params.K, shifts);
        const double log_total = detail::log_sum_exp(lw);
        const double ratio = std::isfinite(log_total) ? std::exp(log_total - std::log(target)) : 0.0;
        if (!(ratio >= opt.sum_window_lo && ratio <= opt.sum_window_hi)) {
          plan.dropped.push_back(q);
          continue;
        }
        const std::size_t pick = draw_from_log_weights(lw, rng);
        PlanEntry entry;
        entry.q = q;
        entry.shift = shifts.lo + static_cast<std::int64_t>(pick);
        entry.residue = residue_for_shift(entry.shift, q, side, params.n_target);
        for (std::int64_t m : detail::progression(entry.shift, q, roots, side, reach)) {
          if (survivors.contains(m)) {
            (side == Side::backward ? entry.covered_bwd : entry.covered_fwd).push_back(m);
            residual.erase(m);
          }
        }
        plan.entries.push_back(std::move(entry));
      }
    }
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.q < b.q; });
  (side == Side::backward ? plan.residual_bwd : plan.residual_fwd) = residual.to_vector();
  return plan;
}

// ---------------------------------------------------------------------------
// Greedy selection

/// Finite progression reach K * H_q from a ladder. Without one, each prime
/// covers its full residue classes.
struct GreedyReach {
  const HScaleLadder* ladder = nullptr;
  double K = 8.0;
  std::uint64_t y = 0;
};

/// For each prime in ascending order, the shift whose classes
/// n = shift + alpha (mod q) (or, with a reach, whose progression of
/// K H_q steps) cover the most uncovered survivors; ties go to the
/// smallest residue, then the smallest shift.
inline CoverPlan select_shifts_greedy(std::span<const std::uint64_t> primes,
                                      const SurvivorSet& survivors, const RootTable& table,
                                      Side side, const std::optional<BigInt>& n_target = std::nullopt,
                                      const GreedyReach& reach = {}) {
  if (side == Side::both) throw UsageError("use select_shifts_greedy_joint for both sides");
  std::vector<std::uint64_t> order(primes.begin(), primes.end());
  std::sort(order.begin(), order.end());
  CoverPlan plan;
  plan.side = side;
  const bool back = side == Side::backward;
  (back ? plan.survivors_before_bwd : plan.survivors_before_fwd) = survivors.count();
  SurvivorSet left = survivors;
  std::vector<std::uint64_t> hist;
  std::vector<std::int64_t> score;
  for (std::uint64_t q : order) {
    const auto roots = table.roots_of(q);
    if (roots.empty()) continue;
    PlanEntry entry;
    entry.q = q;
    auto& covered = back ? entry.covered_bwd : entry.covered_fwd;
    if (reach.ladder == nullptr) {
      hist.assign(q, 0);
      left.for_each([&](std::int64_t n) { ++hist[mod_i64(n, q)]; });
      std::uint64_t best = 0, best_score = 0;
      bool have = false;
      // residue order for ties: forward r = s, backward r = (-N - s)
      for (std::uint64_t s = 0; s < q; ++s) {
        std::uint64_t sc = 0;
        for (std::uint64_t a : roots) sc += hist[(s + a) % q];
        const bool better = !have || sc > best_score ||
                            (sc == best_score && residue_for_shift(static_cast<std::int64_t>(s), q, side, n_target) <
                                                     residue_for_shift(static_cast<std::int64_t>(best), q, side, n_target));
        if (better) {
          best = s;
          best_score = sc;
          have = true;
        }
      }
      entry.shift = static_cast<std::int64_t>(best);
      left.for_each([&](std::int64_t n) {
        const std::uint64_t c = (mod_i64(n, q) + q - best) % q;
        if (std::find(roots.begin(), roots.end(), c) != roots.end()) covered.push_back(n);
      });
    } else {
      const Scale& scale = reach.ladder->scale_for(q);
      const auto steps = static_cast<std::int64_t>(std::floor(reach.K * scale.H));
      const Interval shifts = shift_range(side, reach.y, reach.K);
      score.assign(static_cast<std::size_t>(shifts.length()), 0);
      const std::int64_t step = (back ? -1 : 1) * static_cast<std::int64_t>(q);
      left.for_each([&](std::int64_t v) {
        for (std::uint64_t a : roots) {
          for (std::int64_t h = 1; h <= steps; ++h) {
            const std::int64_t n = v - alpha_rep(a, q) - step * h;
            if (n >= shifts.lo && n <= shifts.hi) ++score[static_cast<std::size_t>(n - shifts.lo)];
          }
        }
      });
      std::size_t best = 0;
      for (std::size_t i = 1; i < score.size(); ++i) {
        if (score[i] > score[best]) {
          best = i;
        } else if (score[i] == score[best]) {
          const auto ri = residue_for_shift(shifts.lo + static_cast<std::int64_t>(i), q, side, n_target);
          const auto rb = residue_for_shift(shifts.lo + static_cast<std::int64_t>(best), q, side, n_target);
          if (ri < rb) best = i;
        }
      }
      entry.shift = shifts.lo + static_cast<std::int64_t>(best);
      for (std::int64_t m : detail::progression(entry.shift, q, roots, side, steps)) {
        if (left.contains(m)) covered.push_back(m);
      }
      std::sort(covered.begin(), covered.end());
      covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    }
    for (std::int64_t n : covered) left.erase(n);
    entry.residue = residue_for_shift(entry.shift, q, side, n_target);
    plan.entries.push_back(std::move(entry));
  }
  (back ? plan.residual_bwd : plan.residual_fwd) = left.to_vector();
  return plan;
}

/// Two-sided dense-mode greedy: one residue r per prime (ascending), scored
/// on both sides at once. Forward removes n = r + alpha, backward removes
/// n = alpha - N - r (mod q). Ties go to the smallest r.
inline CoverPlan select_shifts_greedy_joint(std::span<const std::uint64_t> primes,
                                            const SurvivorSet& fwd, const SurvivorSet& bwd,
                                            const RootTable& table, const BigInt& n_target) {
  std::vector<std::uint64_t> order(primes.begin(), primes.end());
  std::sort(order.begin(), order.end());
  CoverPlan plan;
  plan.side = Side::both;
  plan.survivors_before_fwd = fwd.count();
  plan.survivors_before_bwd = bwd.count();
  SurvivorSet left_f = fwd, left_b = bwd;
  std::vector<std::uint64_t> hf, hb;
  for (std::uint64_t q : order) {
    const auto roots = table.roots_of(q);
    if (roots.empty()) continue;
    const std::uint64_t nq = mod_u64(n_target, q);
    hf.assign(q, 0);
    hb.assign(q, 0);
    left_f.for_each([&](std::int64_t n) { ++hf[mod_i64(n, q)]; });
    left_b.for_each([&](std::int64_t n) { ++hb[mod_i64(n, q)]; });
    std::uint64_t best = 0, best_score = 0;
    for (std::uint64_t r = 0; r < q; ++r) {
      std::uint64_t sc = 0;
      for (std::uint64_t a : roots) {
        sc += hf[(r + a) % q];
        sc += hb[(a + 2 * q - nq - r) % q];
      }
      if (sc > best_score) {
        best = r;
        best_score = sc;
      }
    }
    PlanEntry entry;
    entry.q = q;
    entry.shift = static_cast<std::int64_t>(best);
    entry.residue = best;
    auto hit = [&](std::uint64_t c) { return std::find(roots.begin(), roots.end(), c) != roots.end(); };
    left_f.for_each([&](std::int64_t n) {
      if (hit((mod_i64(n, q) + q - best) % q)) entry.covered_fwd.push_back(n);
    });
    left_b.for_each([&](std::int64_t n) {
      // n - (-N - b) = n + N + b
      if (hit((mod_i64(n, q) + nq + best) % q)) entry.covered_bwd.push_back(n);
    });
    for (std::int64_t n : entry.covered_fwd) left_f.erase(n);
    for (std::int64_t n : entry.covered_bwd) left_b.erase(n);
    plan.entries.push_back(std::move(entry));
  }
  plan.residual_fwd = left_f.to_vector();
  plan.residual_bwd = left_b.to_vector();
  return plan;
}

// ---------------------------------------------------------------------------
// Residual vs pairing capacity

/// Usable primes available for clean-up pairing: (x/2, 3x/4] forward and
/// (3x/4, x] backward; a one-sided construction pairs over (x/2, x].
inline std::vector<std::uint64_t> pairing_primes(const RootTable& table, std::uint64_t x, Side side,
                                                 bool two_sided) {
  if (!two_sided) return table.usable_primes(x / 2, x);
  if (side == Side::backward) return table.usable_primes(3 * x / 4, x);
  return table.usable_primes(x / 2, 3 * x / 4);
}

struct ResidualReport {
  std::size_t residual_fwd = 0;
  std::size_t capacity_fwd = 0;
  std::size_t residual_bwd = 0;
  std::size_t capacity_bwd = 0;
  bool pass = false;
};

inline ResidualReport covering_residual_check(const CoverPlan& plan, const SieveParams& params,
                                              const RootTable& table, bool two_sided) {
  ResidualReport r;
  r.residual_fwd = plan.residual_fwd.size();
  r.residual_bwd = plan.residual_bwd.size();
  r.capacity_fwd = pairing_primes(table, params.x, Side::forward, two_sided).size();
  r.capacity_bwd = two_sided ? pairing_primes(table, params.x, Side::backward, true).size() : 0;
  r.pass = r.residual_fwd <= r.capacity_fwd && r.residual_bwd <= r.capacity_bwd;
  return r;
}

}  // namespace composite_forge
