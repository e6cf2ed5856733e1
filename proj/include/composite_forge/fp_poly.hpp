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
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "composite_forge/bigint.hpp"
#include "composite_forge/primes.hpp"
#include "composite_forge/rng.hpp"

// Dense univariate polynomials over Z/pZ, coefficients low to high.
// The zero polynomial is the empty vector.
namespace composite_forge::fp {

using Poly = std::vector<std::uint64_t>;

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

inline Poly reduce(std::span<const BigInt> coeffs, std::uint64_t p) {
  Poly out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = mod_u64(coeffs[i], p);
  trim(out);
  return out;
}

inline std::uint64_t inverse(std::uint64_t a, std::uint64_t p) {
  return powmod(a, p - 2, p);
}

inline std::uint64_t eval(const Poly& a, std::uint64_t x, std::uint64_t p) {
  std::uint64_t r = 0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) r = (mulmod(r, x, p) + *it) % p;
  return r;
}

inline Poly sub(Poly a, const Poly& b, std::uint64_t p) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
  trim(a);
  return a;
}

inline Poly mul(const Poly& a, const Poly& b, std::uint64_t p) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      out[i + j] = (out[i + j] + mulmod(a[i], b[j], p)) % p;
    }
  }
  trim(out);
  return out;
}

/// Remainder of a modulo b (b nonzero).
inline Poly rem(Poly a, const Poly& b, std::uint64_t p) {
  const int db = degree(b);
  const std::uint64_t inv_lead = inverse(b.back(), p);
  while (degree(a) >= db) {
    const std::uint64_t c = mulmod(a.back(), inv_lead, p);
    const std::size_t shift = a.size() - b.size();
    for (std::size_t j = 0; j < b.size(); ++j) {
      a[shift + j] = (a[shift + j] + p - mulmod(c, b[j], p)) % p;
    }
    trim(a);
  }
  return a;
}

inline Poly monic(Poly a, std::uint64_t p) {
  if (a.empty()) return a;
  const std::uint64_t inv = inverse(a.back(), p);
  for (auto& c : a) c = mulmod(c, inv, p);
  return a;
}

inline Poly gcd(Poly a, Poly b, std::uint64_t p) {
  while (!b.empty()) {
    Poly r = rem(std::move(a), b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(std::move(a), p);
}

/// Quotient of a by b (b nonzero), exact remainder discarded.
inline Poly quot(Poly a, const Poly& b, std::uint64_t p) {
  if (degree(a) < degree(b)) return {};
  Poly q(a.size() - b.size() + 1, 0);
  const std::uint64_t inv_lead = inverse(b.back(), p);
  while (!a.empty() && degree(a) >= degree(b)) {
    const std::uint64_t c = mulmod(a.back(), inv_lead, p);
    const std::size_t shift = a.size() - b.size();
    q[shift] = c;
    for (std::size_t j = 0; j < b.size(); ++j) {
      a[shift + j] = (a[shift + j] + p - mulmod(c, b[j], p)) % p;
    }
    // The leading term cancels by construction even if lower ones vanish.
    a.pop_back();
    trim(a);
  }
  trim(q);
  return q;
}

/// base^e mod m by square-and-multiply.
inline Poly powmod(Poly base, std::uint64_t e, const Poly& m, std::uint64_t p) {
  Poly result{1};
  result = rem(std::move(result), m, p);
  base = rem(std::move(base), m, p);
  while (e > 0) {
    if (e & 1) result = rem(mul(result, base, p), m, p);
    base = rem(mul(base, base, p), m, p);
    e >>= 1;
  }
  return result;
}

/// f of degree d is irreducible iff gcd(X^(p^i) - X, f) = 1 for 1 <= i <= d/2.
inline bool is_irreducible(const Poly& f, std::uint64_t p) {
  const int d = degree(f);
  if (d <= 0) return false;
  if (d == 1) return true;
  const Poly m = monic(f, p);
  const Poly x{0, 1};
  Poly acc = rem(x, m, p);
  for (int i = 1; i <= d / 2; ++i) {
    acc = powmod(acc, p, m, p);
    if (degree(gcd(sub(acc, x, p), m, p)) > 0) return false;
  }
  return true;
}

namespace detail {

// Equal-degree splitting of a monic squarefree product of distinct linear
// factors into its roots.
inline void split_linear(const Poly& g, std::uint64_t p, Rng& rng,
                         std::vector<std::uint64_t>& out) {
  const int d = degree(g);
  if (d <= 0) return;
  if (d == 1) {
    out.push_back((p - g[0]) % p);
    return;
  }
  for (;;) {
    const std::uint64_t a = rng.below(p);
    Poly h = powmod(Poly{a, 1}, (p - 1) / 2, g, p);
    h = sub(h, Poly{1}, p);
    Poly f1 = gcd(g, h, p);
    const int d1 = degree(f1);
    if (d1 > 0 && d1 < d) {
      split_linear(f1, p, rng, out);
      split_linear(quot(g, f1, p), p, rng, out);
      return;
    }
  }
}

}  // namespace detail

/// Distinct roots of f in [0, p) via gcd(X^p - X, f) and equal-degree
/// splitting. Requires p odd.
inline std::vector<std::uint64_t> roots_by_splitting(const Poly& f, std::uint64_t p) {
  std::vector<std::uint64_t> out;
  if (degree(f) <= 0) return out;
  const Poly m = monic(f, p);
  Poly xp = powmod(Poly{0, 1}, p, m, p);
  const Poly g = gcd(m, sub(xp, Poly{0, 1}, p), p);
  if (degree(g) <= 0) return out;
  Rng rng(0x5eed0000ULL ^ p);
  detail::split_linear(g, p, rng, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace composite_forge::fp
