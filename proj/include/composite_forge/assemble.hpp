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
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "composite_forge/bigint.hpp"
#include "composite_forge/cover.hpp"
#include "composite_forge/modroots.hpp"
#include "composite_forge/poly.hpp"
#include "composite_forge/sieve.hpp"

namespace composite_forge {

struct StageRecord {
  Stage stage = Stage::small;
  Side side = Side::forward;
  ResidueAssignment assignment;
};

// ---------------------------------------------------------------------------
// Clean-up pairing

struct PairingResult {
  ResidueAssignment fwd{Stage::cleanup};
  ResidueAssignment bwd{Stage::cleanup};
  std::vector<std::pair<std::int64_t, std::uint64_t>> pairs_fwd;  // survivor -> prime
  std::vector<std::pair<std::int64_t, std::uint64_t>> pairs_bwd;
};

namespace detail {

inline void pair_side(const std::vector<std::int64_t>& residual, const std::vector<std::uint64_t>& pool,
                      const RootTable& table, Side side, const std::optional<BigInt>& n_target,
                      ResidueAssignment& out,
                      std::vector<std::pair<std::int64_t, std::uint64_t>>& pairs) {
  std::vector<std::int64_t> left(residual);
  std::sort(left.begin(), left.end());
  left.erase(std::unique(left.begin(), left.end()), left.end());
  if (left.size() > pool.size()) {
    throw InfeasibleError("pairing capacity exceeded on " + std::string(to_string(side)) + " side: " +
                          std::to_string(left.size()) + " survivors, " + std::to_string(pool.size()) +
                          " primes; retry with another seed or a larger x");
  }
  for (std::size_t i = 0; i < left.size(); ++i) {
    const std::uint64_t q = pool[i];
    const std::uint64_t alpha = table.roots_of(q).front();
    const std::uint64_t a = mod_i64(left[i], q);
    std::uint64_t r = 0;
    if (side == Side::backward) {
      // b = -N - a + alpha
      r = (3 * q - mod_u64(*n_target, q) - a + alpha) % q;
    } else {
      r = (a + q - alpha) % q;
    }
    out.set(q, r);
    pairs.emplace_back(left[i], q);
  }
}

}  // namespace detail

/// Injectively pairs each residual survivor with the smallest free usable
/// prime of its side's pool: forward b = a - alpha, backward
/// b = -N - a + alpha (mod q), alpha the least root. Primes in `taken`
/// are skipped. One-sided runs pair over (x/2, x].
inline PairingResult pairing_stage(const std::vector<std::int64_t>& residual_fwd,
                                   const std::vector<std::int64_t>& residual_bwd,
                                   const RootTable& table, std::uint64_t x,
                                   const std::optional<BigInt>& n_target, bool two_sided,
                                   const ResidueAssignment& taken = ResidueAssignment{}) {
  if (two_sided && !n_target) throw UsageError("two-sided pairing needs N");
  if (!two_sided && !residual_bwd.empty()) throw UsageError("backward residual in a one-sided run");
  auto pool = [&](Side side) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t q : pairing_primes(table, x, side, two_sided)) {
      if (!taken.contains(q)) out.push_back(q);
    }
    return out;
  };
  PairingResult res;
  detail::pair_side(residual_fwd, pool(Side::forward), table, Side::forward, n_target, res.fwd,
                    res.pairs_fwd);
  if (two_sided) {
    detail::pair_side(residual_bwd, pool(Side::backward), table, Side::backward, n_target, res.bwd,
                      res.pairs_bwd);
  }
  return res;
}

// ---------------------------------------------------------------------------
// CRT

struct CrtResult {
  BigInt b;        // 0 <= b < modulus
  BigInt modulus;  // product of the assigned primes
};

/// Incremental Garner combination of (q, r_q) over distinct primes.
inline CrtResult crt_combine(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& system) {
  CrtResult out{BigInt(0), BigInt(1)};
  for (const auto& [q, r] : system) {
    if (q < 2) throw Error("CRT modulus must be >= 2");
    const std::uint64_t bq = mod_u64(out.b, q);
    const std::uint64_t mq = mod_u64(out.modulus, q);
    if (mq == 0) throw Error("duplicate prime " + std::to_string(q) + " in CRT system");
    const std::uint64_t inv = powmod(mq, q - 2, q);
    const std::uint64_t t = mulmod((r % q + q - bq) % q, inv, q);
    out.b += out.modulus * from_u64(t);
    out.modulus *= from_u64(q);
  }
  return out;
}

inline CrtResult crt_combine(const std::vector<StageRecord>& stages) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> system;
  for (const auto& s : stages) {
    for (const auto& [q, r] : s.assignment.residues()) system.emplace_back(q, r);
  }
  return crt_combine(system);
}

// ---------------------------------------------------------------------------
// Placement

struct Placement {
  BigInt N, b1, b2;
  BigInt I1_lo, I1_hi, I2_lo, I2_hi;
  BigInt n1, n2;
  std::uint64_t m = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

inline BigInt pow10(unsigned k) {
  BigInt v;
  mpz_ui_pow_ui(v.get_mpz_t(), 10, k);
  return v;
}

/// Smallest power of ten N with modulus^3 <= N.
inline BigInt auto_N(const BigInt& modulus) {
  const BigInt cube = modulus * modulus * modulus;
  unsigned k = static_cast<unsigned>(mpz_sizeinbase(cube.get_mpz_t(), 10));
  if (k > 0) --k;
  while (pow10(k) < cube) ++k;
  while (k > 0 && pow10(k - 1) >= cube) --k;
  return pow10(k);
}

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline BigInt floor_mod(const BigInt& a, const BigInt& m) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

/// Places b mod P into [1, N]: b1 = b (mod P) in [-3N/10, -N/5] with the
/// smallest |b1|, b2 = -b1, I1 = [b2+1, b2+y], I2 = [N-b2-y, N-b2-1].
inline Placement place(const BigInt& b, const BigInt& modulus, const BigInt& N, std::uint64_t y) {
  if (modulus * modulus * modulus > N) {
    throw UsageError("modulus too large for N: need P(x)^3 <= N; choose a larger N");
  }
  const BigInt lo = ceil_div(-3 * N, BigInt(10));
  const BigInt hi = floor_div(-N, BigInt(5));
  Placement p;
  p.N = N;
  p.b1 = hi - floor_mod(hi - b, modulus);
  if (p.b1 < lo) throw UsageError("placement window shorter than the modulus; choose a larger N");
  p.b2 = -p.b1;
  const BigInt Y = from_u64(y);
  p.I1_lo = p.b2 + 1;
  p.I1_hi = p.b2 + Y;
  p.I2_lo = N - p.b2 - Y;
  p.I2_hi = N - p.b2 - 1;
  p.n1 = p.b2 + from_u64(y / 2);
  p.n2 = N - p.b2 - from_u64(y / 2);
  p.m = y / 2 >= 1 ? y / 2 - 1 : 0;
  return p;
}

// ---------------------------------------------------------------------------
// Certificate

struct ResidueCertificate {
  explicit ResidueCertificate(IntPolynomial f) : poly(std::move(f)) {}

  IntPolynomial poly;
  SieveParams params;
  std::uint64_t y_target = 0;
  std::uint64_t seed = 0;
  std::string mode = "greedy";
  bool two_sided = true;
  std::vector<StageRecord> stages;
  std::optional<Placement> placement;
  Irreducibility irreducibility = Irreducibility::fail;

  ResidueAssignment merged() const {
    ResidueAssignment all(Stage::small);
    for (const auto& s : stages) all.merge(s.assignment);
    return all;
  }

  BigInt modulus() const { return crt_combine(stages).modulus; }
  std::size_t P_x_bitlength() const { return mpz_sizeinbase(modulus().get_mpz_t(), 2); }
  BigInt b_mod_Px() const { return crt_combine(stages).b; }
};

namespace detail {

// Shortest round-trip decimal form.
inline std::string real_str(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double real_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("bad real value: " + s);
  return v;
}

inline BigInt big_from(const nlohmann::json& j) {
  if (j.is_number_integer()) return from_i64(j.get<std::int64_t>());
  return parse_decimal(j.get<std::string>());
}

}  // namespace detail

inline nlohmann::json to_json(const ResidueCertificate& c) {
  using nlohmann::json;
  json params = {
      {"x", c.params.x},
      {"delta", detail::real_str(c.params.delta)},
      {"xi", detail::real_str(c.params.xi)},
      {"M", detail::real_str(c.params.M)},
      {"K", detail::real_str(c.params.K)},
      {"eps", detail::real_str(c.params.eps)},
      {"y", c.params.y},
      {"y_target", c.y_target},
      {"z", detail::real_str(c.params.z)},
      {"z_pinned", c.params.z_pinned},
  };
  json stages = json::array();
  for (const auto& s : c.stages) {
    json rows = json::array();
    for (const auto& [q, r] : s.assignment.residues()) rows.push_back({q, r});
    stages.push_back({{"stage", to_string(s.stage)}, {"side", to_string(s.side)}, {"assignments", rows}});
  }
  json j = {
      {"version", 1},
      {"poly", c.poly.literal()},
      {"params", params},
      {"seed", c.seed},
      {"mode", c.mode},
      {"two_sided", c.two_sided},
      {"stages", stages},
      {"irreducibility", to_string(c.irreducibility)},
  };
  if (!c.stages.empty()) j["P_x_bitlength"] = c.P_x_bitlength();
  if (c.placement) {
    const Placement& p = *c.placement;
    j["placement"] = {
        {"N", to_decimal(p.N)},
        {"b1", to_decimal(p.b1)},
        {"b2", to_decimal(p.b2)},
        {"I1", {to_decimal(p.I1_lo), to_decimal(p.I1_hi)}},
        {"I2", {to_decimal(p.I2_lo), to_decimal(p.I2_hi)}},
        {"n1", to_decimal(p.n1)},
        {"n2", to_decimal(p.n2)},
        {"m", std::to_string(p.m)},
    };
  }
  return j;
}

/// Parses a certificate; throws Error on malformed input.
inline ResidueCertificate certificate_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw Error("unsupported certificate version");
    ResidueCertificate c(IntPolynomial::parse(j.at("poly").get<std::string>()));
    const auto& p = j.at("params");
    c.params.x = p.at("x").get<std::uint64_t>();
    c.params.delta = detail::real_from(p.at("delta"));
    c.params.xi = detail::real_from(p.at("xi"));
    c.params.M = detail::real_from(p.at("M"));
    c.params.K = detail::real_from(p.at("K"));
    c.params.eps = detail::real_from(p.at("eps"));
    c.params.y = p.at("y").get<std::uint64_t>();
    c.y_target = p.value("y_target", c.params.y);
    c.params.z = detail::real_from(p.at("z"));
    c.params.z_pinned = p.value("z_pinned", false);
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = j.value("mode", std::string("greedy"));
    c.two_sided = j.value("two_sided", true);
    for (const auto& s : j.at("stages")) {
      StageRecord rec;
      rec.stage = stage_from_string(s.at("stage").get<std::string>());
      rec.side = side_from_string(s.at("side").get<std::string>());
      rec.assignment = ResidueAssignment(rec.stage);
      for (const auto& row : s.at("assignments")) {
        const auto q = row.at(0).get<std::uint64_t>();
        const auto r = row.at(1).get<std::uint64_t>();
        if (q < 2 || r >= q) throw Error("bad assignment (" + std::to_string(q) + ", " + std::to_string(r) + ")");
        rec.assignment.set(q, r);
      }
      c.stages.push_back(std::move(rec));
    }
    c.irreducibility = irreducibility_from_string(j.at("irreducibility").get<std::string>());
    if (j.contains("placement")) {
      const auto& q = j.at("placement");
      Placement pl;
      pl.N = detail::big_from(q.at("N"));
      pl.b1 = detail::big_from(q.at("b1"));
      pl.b2 = q.contains("b2") ? detail::big_from(q.at("b2")) : BigInt(-pl.b1);
      pl.I1_lo = detail::big_from(q.at("I1").at(0));
      pl.I1_hi = detail::big_from(q.at("I1").at(1));
      pl.I2_lo = detail::big_from(q.at("I2").at(0));
      pl.I2_hi = detail::big_from(q.at("I2").at(1));
      pl.n1 = detail::big_from(q.at("n1"));
      pl.n2 = detail::big_from(q.at("n2"));
      const BigInt m = detail::big_from(q.at("m"));
      if (m < 0 || !fits_i64(m)) throw Error("bad m");
      pl.m = static_cast<std::uint64_t>(to_i64(m));
      c.placement = pl;
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace composite_forge
