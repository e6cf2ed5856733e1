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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "composite_forge/modroots.hpp"
#include "composite_forge/primes.hpp"

namespace cf = composite_forge;
using cf::BigInt;
using cf::IntPolynomial;

namespace {

std::vector<std::uint64_t> brute_roots(const IntPolynomial& f, std::uint64_t p) {
  std::vector<std::uint64_t> out;
  if (p <= static_cast<std::uint64_t>(f.degree()) || cf::mod_u64(f.leading(), p) == 0) return out;
  for (std::uint64_t n = 0; n < p; ++n) {
    if (cf::mod_u64(f.eval_companion(cf::from_u64(n)), p) == 0) out.push_back(n);
  }
  return out;
}

bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

}  // namespace

TEST(RootsModP, Examples) {
  const auto f = IntPolynomial::parse("poly:[1,0,1]");
  const auto c = f.companion_coeffs();
  EXPECT_EQ(cf::roots_mod_p(c, 13), (std::vector<std::uint64_t>{5, 8}));
  EXPECT_TRUE(cf::roots_mod_p(c, 3).empty());
  EXPECT_TRUE(cf::roots_mod_p(c, 2).empty());
}

TEST(RootsModP, RejectsComposite) {
  const auto f = IntPolynomial::parse("poly:[1,0,1]");
  EXPECT_THROW(cf::roots_mod_p(f.companion_coeffs(), 15), cf::UsageError);
  EXPECT_THROW(cf::roots_mod_p_split(f.companion_coeffs(), 1), cf::UsageError);
  EXPECT_THROW(cf::roots_mod_p_scan(f.companion_coeffs(), 0), cf::UsageError);
}

TEST(RootsModP, LeadingCoefficientExclusion) {
  // f~ = 3x vanishes identically mod 3; p | a_B excludes it.
  const auto f = IntPolynomial::from_binomial({0, 3});
  EXPECT_TRUE(cf::roots_mod_p(f.companion_coeffs(), 3).empty());
  EXPECT_EQ(cf::roots_mod_p(f.companion_coeffs(), 5), (std::vector<std::uint64_t>{0}));
}

TEST(RootsModP, SplittingMatchesScanBelowScanLimit) {
  const std::vector<std::string> family = {"poly:[0,1]", "poly:[1,0,1]", "binom:[1,0,1]", "poly:[2,0,0,1]",
                                           "poly:[-6,11,-6,1]", "poly:[3,1,4,1,5]", "binom:[7,0,0,0,0,2]"};
  for (const auto& lit : family) {
    const auto f = IntPolynomial::parse(lit);
    for (std::uint64_t p : cf::primes_up_to(3000)) {
      ASSERT_EQ(cf::roots_mod_p_split(f.companion_coeffs(), p), cf::roots_mod_p_scan(f.companion_coeffs(), p))
          << lit << " mod " << p;
    }
  }
}

TEST(RootsModP, LargePrimesAgainstBruteForce) {
  std::vector<std::uint64_t> large;
  for (std::uint64_t n = 10007; large.size() < 6; n += 7919) {
    if (trial_prime(n)) large.push_back(n);
  }
  large.push_back(99991);
  for (const auto& lit : {"poly:[1,0,1]", "poly:[-6,11,-6,1]", "poly:[2,0,0,1]", "poly:[-1,0,0,0,1]"}) {
    const auto f = IntPolynomial::parse(lit);
    for (std::uint64_t p : large) {
      EXPECT_EQ(cf::roots_mod_p(f.companion_coeffs(), p), brute_roots(f, p)) << lit << " mod " << p;
    }
  }
}

TEST(RootsModP, RandomPolynomialsLargePrime) {
  std::mt19937_64 rng(23);
  const std::uint64_t p = 20011;
  ASSERT_TRUE(trial_prime(p));
  for (int t = 0; t < 20; ++t) {
    std::vector<BigInt> a(static_cast<std::size_t>(2 + t % 5));
    for (auto& v : a) v = static_cast<long>(rng() % 2001) - 1000;
    a.back() = 1 + static_cast<long>(rng() % 50);
    const auto f = IntPolynomial::from_binomial(a);
    EXPECT_EQ(cf::roots_mod_p_split(f.companion_coeffs(), p), brute_roots(f, p)) << f.literal();
  }
}

TEST(RootTable, Examples) {
  const auto t1 = cf::build_root_table(IntPolynomial::parse("poly:[0,1]"), 10);
  ASSERT_EQ(t1.size(), 4u);
  for (std::uint64_t p : {2, 3, 5, 7}) EXPECT_EQ(std::vector<std::uint64_t>(t1.roots_of(p).begin(), t1.roots_of(p).end()), (std::vector<std::uint64_t>{0}));

  const auto t2 = cf::build_root_table(IntPolynomial::parse("poly:[1,0,1]"), 13);
  EXPECT_EQ(t2.usable_primes(0, 13), (std::vector<std::uint64_t>{5, 13}));

  const auto t3 = cf::build_root_table(IntPolynomial::parse("poly:[1,0,1]"), 2);
  EXPECT_TRUE(t3.usable_primes(0, 2).empty());
  EXPECT_THROW(t3.roots_of(3), cf::Error);
}

TEST(RootTable, Invariants) {
  for (const auto& lit : {"poly:[1,0,1]", "binom:[1,0,1]", "poly:[2,0,0,1]", "poly:[-6,11,-6,1]"}) {
    const auto f = IntPolynomial::parse(lit);
    const auto t = cf::build_root_table(f, 5000);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::uint64_t p = t.prime(i);
      const auto r = t.roots(i);
      EXPECT_LE(r.size(), static_cast<std::size_t>(f.degree()));
      EXPECT_LT(r.size(), p);
      EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
      for (std::uint64_t a : r) EXPECT_EQ(f.companion_mod(a, p), 0u);
    }
    const auto& s = t.stats();
    double sum = 0;
    for (const auto& [nu, frac] : s.rho_nu_hat) sum += frac;
    EXPECT_NEAR(sum, s.rho_hat, 1e-12);
    EXPECT_GT(s.sigma_x, 0);
    EXPECT_LE(s.sigma_x, 1);
  }
}

TEST(RootTable, ThreadedBuildMatchesScan) {
  const auto f = IntPolynomial::parse("poly:[2,0,0,1]");
  const auto t = cf::build_root_table(f, 60000);
  ASSERT_GT(t.size(), 4096u);
  const auto c = f.companion_coeffs();
  for (std::size_t i = 0; i < t.size(); i += 37) {
    const auto r = t.roots(i);
    EXPECT_EQ(std::vector<std::uint64_t>(r.begin(), r.end()), cf::roots_mod_p_scan(c, t.prime(i)));
  }
}

TEST(DensityStats, SigmaForIdentity) {
  const auto t = cf::build_root_table(IntPolynomial::parse("poly:[0,1]"), 100);
  double prod = 1;
  for (std::uint64_t p : cf::primes_up_to(100)) prod *= 1.0 - 1.0 / static_cast<double>(p);
  EXPECT_NEAR(cf::density_stats(t).sigma_x, prod, 1e-12);
  EXPECT_NEAR(cf::density_stats(t).sigma_x, 0.12032, 5e-5);
  EXPECT_EQ(cf::density_stats(t).prime_count, 25u);
  EXPECT_NEAR(t.sigma(10, 100) * t.sigma(0, 10), t.stats().sigma_x, 1e-12);
}

TEST(DensityStats, MertensConstant) {
  const auto t = cf::build_root_table(IntPolynomial::parse("poly:[0,1]"), 1000000);
  EXPECT_NEAR(t.stats().mertens_sum - std::log(std::log(1e6)), 0.2615, 0.01);
}

TEST(DensityStats, SumOfSquaresPlusOne) {
  const auto t = cf::build_root_table(IntPolynomial::parse("poly:[1,0,1]"), 1000000);
  const auto& s = t.stats();
  std::uint64_t one_mod_four = 0;
  for (std::uint64_t p : cf::primes_up_to(1000000)) one_mod_four += p % 4 == 1 ? 1 : 0;
  EXPECT_EQ(s.usable_count, one_mod_four);
  EXPECT_NEAR(s.rho_hat, 0.5, 0.01);
  EXPECT_NEAR(s.rho_nu_hat.at(2), 0.5, 0.01);
  EXPECT_EQ(s.rho_nu_hat.count(1), 0u);
}

TEST(Collision, Examples) {
  const auto tx = cf::build_root_table(IntPolynomial::parse("poly:[0,1]"), 100);
  EXPECT_EQ(cf::residue_collision_count(tx, 6, 2, 10), 1u);
  EXPECT_EQ(cf::residue_collision_count(tx, 1, 10, 100), 0u);

  const auto f = IntPolynomial::parse("poly:[1,0,1]");
  const auto t = cf::build_root_table(f, 20);
  std::uint64_t expect = 0;
  for (std::uint64_t q = 3; q <= 20; ++q) {
    if (!trial_prime(q)) continue;
    const auto r = brute_roots(f, q);
    bool hit = false;
    for (auto a : r) {
      for (auto b : r) hit = hit || (a + q - b) % q == 8 % q;
    }
    expect += hit ? 1 : 0;
  }
  EXPECT_EQ(cf::residue_collision_count(t, 8, 2, 20), expect);
}

TEST(Cache, RoundTripAndRejection) {
  const auto f = IntPolynomial::parse("poly:[1,0,1]");
  const auto t = cf::build_root_table(f, 5000);
  const auto dir = std::filesystem::temp_directory_path() / "cf_cache_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "rt.bin";
  cf::save_root_table(t, path);
  const auto back = cf::load_root_table(path, f, 5000);
  ASSERT_TRUE(back.has_value());
  ASSERT_EQ(back->size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_TRUE(std::equal(t.roots(i).begin(), t.roots(i).end(), back->roots(i).begin(), back->roots(i).end()));
  }
  EXPECT_FALSE(cf::load_root_table(path, f, 4999).has_value());
  EXPECT_FALSE(cf::load_root_table(path, IntPolynomial::parse("poly:[0,1]"), 5000).has_value());
  {
    std::fstream fs(path, std::ios::in | std::ios::out | std::ios::binary);
    fs.seekp(0);
    fs.write("XXXX", 4);
  }
  EXPECT_FALSE(cf::load_root_table(path, f, 5000).has_value());
  std::filesystem::resize_file(path, 40);
  EXPECT_FALSE(cf::load_root_table(path, f, 5000).has_value());
  std::filesystem::remove_all(dir);
}

TEST(Cache, EnvironmentDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "cf_cache_env";
  std::filesystem::remove_all(dir);
  ::setenv("COMPOSITE_FORGE_CACHE", dir.c_str(), 1);
  const auto f = IntPolynomial::parse("poly:[2,0,0,1]");
  const auto a = cf::build_root_table_cached(f, 3000);
  const auto b = cf::build_root_table_cached(f, 3000);
  ::unsetenv("COMPOSITE_FORGE_CACHE");
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}), 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(std::equal(a.roots(i).begin(), a.roots(i).end(), b.roots(i).begin(), b.roots(i).end()));
  }
  std::filesystem::remove_all(dir);
}
