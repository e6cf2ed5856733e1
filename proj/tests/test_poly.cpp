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


#include <gtest/gtest.h>

#include <random>

#include "composite_forge/poly.hpp"

namespace cf = composite_forge;
using cf::BigInt;
using cf::IntPolynomial;

namespace {

// Independent evaluation through GMP's binomial coefficients.
BigInt binomial_sum(const std::vector<BigInt>& a, long n) {
  BigInt acc = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    BigInt c;
    mpz_bin_ui(c.get_mpz_t(), cf::from_i64(n).get_mpz_t(), static_cast<unsigned long>(j));
    acc += a[j] * c;
  }
  return acc;
}

IntPolynomial random_poly(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<int> deg(1, max_degree);
  std::uniform_int_distribution<int> coef(-50, 50);
  std::vector<BigInt> a(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& v : a) v = coef(rng);
  a.back() = 1 + std::abs(coef(rng));
  return IntPolynomial::from_binomial(a);
}

}  // namespace

TEST(Eval, Examples) {
  EXPECT_EQ(cf::eval(IntPolynomial::parse("binom:[0,1]"), 7), 7);
  EXPECT_EQ(cf::eval(IntPolynomial::parse("binom:[1,0,1]"), 5), 11);
  EXPECT_EQ(cf::eval(IntPolynomial::parse("poly:[1,0,1]"), -3), 10);
}

TEST(Eval, HugeArguments) {
  const auto f = IntPolynomial::parse("poly:[1,0,1]");
  const BigInt n = cf::parse_decimal("123456789012345678901234567890");
  EXPECT_EQ(f(n), n * n + 1);
  EXPECT_EQ(f(-n), n * n + 1);
}

TEST(Companion, Examples) {
  EXPECT_EQ(cf::companion(IntPolynomial::parse("poly:[1,0,1]")), (std::vector<BigInt>{2, 0, 2}));
  EXPECT_EQ(cf::companion(IntPolynomial::parse("poly:[0,1]")), (std::vector<BigInt>{0, 1}));
  EXPECT_EQ(cf::companion(IntPolynomial::parse("binom:[1,0,1]")), (std::vector<BigInt>{2, -1, 1}));
}

TEST(Companion, MatchesScaledEvaluationOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> arg(-1000000, 1000000);
  for (int t = 0; t < 1000; ++t) {
    const IntPolynomial f = random_poly(rng, 5);
    const long n = arg(rng);
    const std::vector<BigInt> a(f.binomial_coeffs().begin(), f.binomial_coeffs().end());
    const BigInt v = binomial_sum(a, n);
    ASSERT_EQ(f(n), v) << f.literal() << " at " << n;
    ASSERT_EQ(f.eval_companion(n), f.degree_factorial() * v) << f.literal() << " at " << n;
  }
}

TEST(Companion, LeadingCoefficientIsTopBinomialCoefficient) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const IntPolynomial f = random_poly(rng, 6);
    EXPECT_EQ(f.companion_coeffs().back(), f.leading());
  }
}

TEST(Companion, ModularEvaluationAgrees) {
  std::mt19937_64 rng(9);
  const std::vector<std::uint64_t> primes = {2, 3, 5, 101, 65537, 1000003};
  for (int t = 0; t < 200; ++t) {
    const IntPolynomial f = random_poly(rng, 5);
    for (std::uint64_t p : primes) {
      const std::uint64_t n = rng() % p;
      EXPECT_EQ(f.companion_mod(n, p), cf::mod_u64(f.eval_companion(cf::from_u64(n)), p));
    }
  }
}

TEST(Parse, MonomialAndBinomialForms) {
  EXPECT_EQ(IntPolynomial::parse("poly:[1,0,1]"), IntPolynomial::parse("binom:[1,1,2]"));
  EXPECT_EQ(IntPolynomial::parse(" poly : [ 2 , 0 , 0 , 1 ] ").degree(), 3);
  EXPECT_EQ(IntPolynomial::parse("binom:[0,1,0,0]").degree(), 1);
  const auto f = IntPolynomial::parse("poly:[-7,3,0,5]");
  EXPECT_EQ(IntPolynomial::parse(f.literal()), f);
  EXPECT_EQ(IntPolynomial::parse(f.literal()).hash(), f.hash());
}

TEST(Parse, Rejections) {
  for (const char* bad : {"poly:[]", "binom:[1]", "binom:[1,0]", "binom:[0,-1]", "poly:[1,2.5]", "x^2+1",
                          "mono:[1,1]", "poly:[1,,2]", "poly:[1,2"}) {
    EXPECT_THROW(IntPolynomial::parse(bad), cf::UsageError) << bad;
  }
}

TEST(Monotone, ThresholdHoldsOnSamples) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const IntPolynomial f = random_poly(rng, 5);
    const BigInt n0 = f.monotone_threshold();
    for (long k = 0; k < 300; ++k) {
      const BigInt n = n0 + k;
      ASSERT_LT(f(n), f(n + 1)) << f.literal() << " at " << n;
    }
  }
}

TEST(Irreducibility, Verdicts) {
  using cf::Irreducibility;
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[1,0,1]")), Irreducibility::proved);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[-1,0,1]")), Irreducibility::fail);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[0,1]")), Irreducibility::proved);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[2,0,0,1]")), Irreducibility::proved);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[0,1,1]")), Irreducibility::fail);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("binom:[1,0,1]")), Irreducibility::proved);
  // x^4 + 2 is Eisenstein and stays irreducible modulo some small prime.
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[2,0,0,0,1]")), Irreducibility::heuristic_pass);
  // x^4 + 1 splits modulo every prime.
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[1,0,0,0,1]")), Irreducibility::fail);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[1,0,0,0,1]"), true),
            Irreducibility::asserted_by_user);
  EXPECT_EQ(cf::irreducibility_check(IntPolynomial::parse("poly:[-1,0,0,0,1]"), true), Irreducibility::fail);
}

TEST(Irreducibility, NamesRoundTrip) {
  using cf::Irreducibility;
  for (auto v : {Irreducibility::proved, Irreducibility::heuristic_pass, Irreducibility::asserted_by_user,
                 Irreducibility::fail}) {
    EXPECT_EQ(cf::irreducibility_from_string(cf::to_string(v)), v);
  }
  EXPECT_EQ(cf::to_string(Irreducibility::heuristic_pass), "heuristic-pass");
}
