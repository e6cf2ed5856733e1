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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "composite_forge/bigint.hpp"
#include "composite_forge/fp_poly.hpp"
#include "composite_forge/primes.hpp"

namespace composite_forge {

/// An integer-valued polynomial f = sum_j a_j * C(x, j) with integer a_j,
/// together with its integer-coefficient companion B! * f.
///
/// The binomial basis is the canonical form: every integer-valued
/// polynomial has one (Pólya), including those whose monomial coefficients
/// are not integers, e.g. C(x,2) + 1 = x^2/2 - x/2 + 1.
class IntPolynomial {
 public:
  /// Throws UsageError unless the degree is >= 1 and a_B > 0. Trailing
  /// zero coefficients are dropped.
  static IntPolynomial from_binomial(std::vector<BigInt> a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    if (a.size() < 2) throw UsageError("polynomial must have degree >= 1");
    if (a.back() < 0) throw UsageError("leading coefficient must be positive");
    return IntPolynomial(std::move(a));
  }

  /// Monomial coefficients c_0..c_B (integers), converted to the binomial
  /// basis by forward differences at 0.
  static IntPolynomial from_monomial(std::vector<BigInt> c) {
    while (!c.empty() && c.back() == 0) c.pop_back();
    if (c.size() < 2) throw UsageError("polynomial must have degree >= 1");
    std::vector<BigInt> values(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
      BigInt acc = 0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * static_cast<unsigned long>(n) + *it;
      values[n] = acc;
    }
    std::vector<BigInt> a;
    a.reserve(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      a.push_back(values[0]);
      for (std::size_t i = 0; i + 1 < values.size() - j; ++i) values[i] = values[i + 1] - values[i];
    }
    return from_binomial(std::move(a));
  }

  /// `binom:[a0,a1,...,aB]` or `poly:[c0,c1,...,cB]`.
  static IntPolynomial parse(std::string_view literal) {
    std::string s;
    for (char ch : literal) {
      if (ch != ' ' && ch != '\t') s.push_back(ch);
    }
    const auto colon = s.find(':');
    if (colon == std::string::npos || s.size() < colon + 3 || s[colon + 1] != '[' ||
        s.back() != ']') {
      throw UsageError("bad polynomial literal: " + std::string(literal));
    }
    const std::string kind = s.substr(0, colon);
    const std::string body = s.substr(colon + 2, s.size() - colon - 3);
    std::vector<BigInt> coeffs;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      const auto comma = body.find(',', pos);
      const auto end = comma == std::string::npos ? body.size() : comma;
      coeffs.push_back(parse_decimal(std::string_view(body).substr(pos, end - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (kind == "binom") return from_binomial(std::move(coeffs));
    if (kind == "poly") return from_monomial(std::move(coeffs));
    throw UsageError("unknown polynomial kind '" + kind + "' (expected binom or poly)");
  }

  int degree() const { return static_cast<int>(binom_.size()) - 1; }
  std::span<const BigInt> binomial_coeffs() const { return binom_; }
  std::span<const BigInt> companion_coeffs() const { return companion_; }
  const BigInt& degree_factorial() const { return factorial_; }

  /// Leading monomial coefficient of the companion; equals a_B.
  const BigInt& leading() const { return binom_.back(); }

  /// f(n) = sum_j a_j C(n, j), exact for any integer n.
  BigInt operator()(const BigInt& n) const {
    BigInt result = binom_[0];
    BigInt c = 1;
    for (std::size_t j = 1; j < binom_.size(); ++j) {
      c *= n - static_cast<unsigned long>(j - 1);
      mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(j));
      result += binom_[j] * c;
    }
    return result;
  }

  /// Horner evaluation of the companion B! * f at n.
  BigInt eval_companion(const BigInt& n) const {
    BigInt acc = 0;
    for (auto it = companion_.rbegin(); it != companion_.rend(); ++it) acc = acc * n + *it;
    return acc;
  }

  /// Companion value mod p, reducing n first.
  std::uint64_t companion_mod(std::uint64_t n_mod_p, std::uint64_t p) const {
    std::uint64_t acc = 0;
    for (auto it = companion_.rbegin(); it != companion_.rend(); ++it) {
      acc = (mulmod(acc, n_mod_p, p) + mod_u64(*it, p)) % p;
    }
    return acc;
  }

  /// Canonical literal (binomial form).
  std::string literal() const {
    std::string s = "binom:[";
    for (std::size_t i = 0; i < binom_.size(); ++i) {
      if (i) s += ',';
      s += to_decimal(binom_[i]);
    }
    return s + "]";
  }

  std::uint64_t hash() const { return fnv1a(literal()); }

  /// n0 such that f is increasing on [n0, inf): one more than the Cauchy
  /// bound on the real roots of the companion's derivative.
  BigInt monotone_threshold() const {
    if (degree() == 1) return 0;
    const std::size_t d = companion_.size() - 1;
    const BigInt lead = companion_[d] * static_cast<unsigned long>(d);
    BigInt worst = 0;
    for (std::size_t i = 1; i < d; ++i) {
      BigInt ci = abs(companion_[i]) * static_cast<unsigned long>(i);
      BigInt ratio;
      mpz_cdiv_q(ratio.get_mpz_t(), ci.get_mpz_t(), lead.get_mpz_t());
      worst = std::max(worst, ratio);
    }
    return worst + 2;
  }

  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) {
    return a.binom_ == b.binom_;
  }

 private:
  explicit IntPolynomial(std::vector<BigInt> a) : binom_(std::move(a)) {
    const std::size_t b = binom_.size() - 1;
    factorial_ = 1;
    for (std::size_t k = 2; k <= b; ++k) factorial_ *= static_cast<unsigned long>(k);
    // sum_j a_j * (B!/j!) * x(x-1)...(x-j+1)
    companion_.assign(b + 1, 0);
    std::vector<BigInt> falling{1};
    BigInt scale = factorial_;
    for (std::size_t j = 0; j <= b; ++j) {
      if (j > 0) {
        // falling *= (x - (j-1))
        std::vector<BigInt> next(falling.size() + 1, 0);
        for (std::size_t i = 0; i < falling.size(); ++i) {
          next[i + 1] += falling[i];
          next[i] -= falling[i] * static_cast<unsigned long>(j - 1);
        }
        falling = std::move(next);
        mpz_divexact_ui(scale.get_mpz_t(), scale.get_mpz_t(), static_cast<unsigned long>(j));
      }
      for (std::size_t i = 0; i < falling.size(); ++i) companion_[i] += binom_[j] * scale * falling[i];
    }
  }

  std::vector<BigInt> binom_;
  std::vector<BigInt> companion_;
  BigInt factorial_;
};

inline BigInt eval(const IntPolynomial& f, const BigInt& n) { return f(n); }

inline std::vector<BigInt> companion(const IntPolynomial& f) {
  return {f.companion_coeffs().begin(), f.companion_coeffs().end()};
}

enum class Irreducibility { proved, heuristic_pass, asserted_by_user, fail };

inline std::string_view to_string(Irreducibility v) {
  switch (v) {
    case Irreducibility::proved: return "proved";
    case Irreducibility::heuristic_pass: return "heuristic-pass";
    case Irreducibility::asserted_by_user: return "asserted-by-user";
    case Irreducibility::fail: return "fail";
  }
  return "fail";
}

inline Irreducibility irreducibility_from_string(std::string_view s) {
  if (s == "proved") return Irreducibility::proved;
  if (s == "heuristic-pass") return Irreducibility::heuristic_pass;
  if (s == "asserted-by-user") return Irreducibility::asserted_by_user;
  if (s == "fail") return Irreducibility::fail;
  throw UsageError("unknown irreducibility verdict: " + std::string(s));
}

namespace detail {

// Positive divisors of |v| when |v| factors by trial division up to 10^6
// with a cofactor that is 1 or prime. nullopt otherwise, or when there
// are more than `cap` divisors.
inline std::optional<std::vector<BigInt>> divisors(const BigInt& v, std::size_t cap = 4096) {
  BigInt n = abs(v);
  if (n == 0) return std::nullopt;
  std::vector<std::pair<BigInt, int>> factors;
  for (unsigned long d = 2; d <= 1000000 && BigInt(d) * d <= n; ++d) {
    if (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
      int e = 0;
      while (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
        mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), d);
        ++e;
      }
      factors.emplace_back(BigInt(d), e);
    }
  }
  if (n > 1) {
    if (!is_probable_prime(n)) return std::nullopt;
    factors.emplace_back(n, 1);
  }
  std::vector<BigInt> out{1};
  for (const auto& [p, e] : factors) {
    const std::size_t base = out.size();
    BigInt pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
      if (out.size() > cap) return std::nullopt;
    }
  }
  return out;
}

// true/false when decidable, nullopt when the candidate set is too large.
inline std::optional<bool> has_rational_root(std::span<const BigInt> c) {
  if (c.front() == 0) return true;
  const auto num = divisors(c.front());
  const auto den = divisors(c.back());
  if (!num || !den) return std::nullopt;
  const std::size_t b = c.size() - 1;
  for (const BigInt& q : *den) {
    for (const BigInt& p0 : *num) {
      if (gcd(p0, q) != 1) continue;
      for (int sign : {1, -1}) {
        const BigInt p = p0 * sign;
        // q^B * f(p/q) = sum_i c_i p^i q^(B-i)
        BigInt acc = 0;
        BigInt pp = 1;
        for (std::size_t i = 0; i <= b; ++i) {
          BigInt qq;
          mpz_pow_ui(qq.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(b - i));
          acc += c[i] * pp * qq;
          pp *= p;
        }
        if (acc == 0) return true;
      }
    }
  }
  return false;
}

inline bool irreducible_mod_some_small_prime(std::span<const BigInt> c) {
  for (std::uint64_t p : primes_up_to(100)) {
    if (mod_u64(c.back(), p) == 0) continue;
    if (fp::is_irreducible(fp::reduce(c, p), p)) return true;
  }
  return false;
}

}  // namespace detail

/// Degree <= 3: proved or fail by the rational-root test on the companion.
/// Degree >= 4: heuristic-pass when there is no rational root and the
/// companion stays irreducible mod some prime p <= 100 with p not dividing
/// the leading coefficient; otherwise asserted-by-user (if the caller
/// asserts it) or fail.
inline Irreducibility irreducibility_check(const IntPolynomial& f, bool user_asserts = false) {
  const int b = f.degree();
  if (b == 1) return Irreducibility::proved;
  const auto c = f.companion_coeffs();
  const std::optional<bool> root = detail::has_rational_root(c);
  if (root.value_or(false)) return Irreducibility::fail;
  const auto undecided = user_asserts ? Irreducibility::asserted_by_user : Irreducibility::fail;
  if (b <= 3) {
    if (root.has_value()) return Irreducibility::proved;
    return detail::irreducible_mod_some_small_prime(c) ? Irreducibility::proved : undecided;
  }
  return detail::irreducible_mod_some_small_prime(c) ? Irreducibility::heuristic_pass : undecided;
}

}  // namespace composite_forge
