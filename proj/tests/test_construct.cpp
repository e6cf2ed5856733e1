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

#include <sstream>

#include "composite_forge/construct.hpp"
#include "composite_forge/verify.hpp"

namespace cf = composite_forge;
using cf::BigInt;

namespace {

cf::ConstructConfig config(const std::string& poly, std::uint64_t x, bool two_sided) {
  cf::ConstructConfig cfg;
  cfg.poly = poly;
  cfg.x = x;
  cfg.two_sided = two_sided;
  cfg.seed = 1;
  return cfg;
}

void expect_sound(const cf::ConstructResult& r) {
  const auto& c = r.cert;
  const auto rep = cf::verify_certificate(cf::to_json(c), true);
  EXPECT_TRUE(rep.valid) << rep.to_json().dump();
  EXPECT_EQ(rep.checked, (c.two_sided ? 2 : 1) * c.params.y);
  EXPECT_TRUE(r.residual.pass);
  EXPECT_LE(r.residual.residual_fwd, r.residual.capacity_fwd);
  EXPECT_LE(r.residual.residual_bwd, r.residual.capacity_bwd);

  // stages are disjoint and cover every usable prime
  const auto table = cf::build_root_table(c.poly, c.params.x);
  std::size_t total = 0;
  for (const auto& s : c.stages) total += s.assignment.size();
  const auto all = c.merged();
  EXPECT_EQ(total, all.size());
  EXPECT_EQ(all.size(), table.usable_primes(0, c.params.x).size());

  // re-sieve from b
  const auto crt = cf::crt_combine(c.stages);
  const auto y = static_cast<std::int64_t>(c.params.y);
  const auto from_b = cf::ResidueAssignment::from_integer(table, crt.b, 0, c.params.x, cf::Stage::small);
  EXPECT_TRUE(cf::sieve_survivors(table, from_b, {0, c.params.x}, {1, y}).empty());
  if (c.two_sided) {
    EXPECT_TRUE(cf::sieve_survivors(table, from_b.mirrored(c.placement->N), {0, c.params.x}, {-y, -1}).empty());
  }
  const BigInt P = crt.modulus;
  EXPECT_LE(P * P * P, c.placement->N);
  EXPECT_EQ(c.placement->n1 + c.placement->n2, c.placement->N);
}

}  // namespace

TEST(Construct, LinearTwoSided) {
  const auto r = cf::construct(config("poly:[0,1]", 300, true));
  EXPECT_GE(r.cert.params.y, 300u);
  EXPECT_EQ(r.cert.y_target, 716u);
  EXPECT_TRUE(r.dense);
  expect_sound(r);
}

TEST(Construct, QuadraticTwoSided) {
  const auto r = cf::construct(config("poly:[1,0,1]", 300, true));
  EXPECT_GE(r.cert.params.y, 20u);
  EXPECT_EQ(r.cert.irreducibility, cf::Irreducibility::proved);
  expect_sound(r);
}

TEST(Construct, BinomialBasisPolynomial) {
  const auto r = cf::construct(config("binom:[1,0,1]", 300, true));
  expect_sound(r);
}

TEST(Construct, OneSided) {
  const auto r = cf::construct(config("poly:[0,1]", 500, false));
  EXPECT_FALSE(r.cert.two_sided);
  EXPECT_GE(r.cert.params.y, 686u);
  expect_sound(r);
}

TEST(Construct, DeterministicOutput) {
  const auto cfg = config("poly:[1,0,1]", 300, true);
  const auto a = cf::construct(cfg), b = cf::construct(cfg);
  EXPECT_EQ(cf::to_json(a.cert).dump(), cf::to_json(b.cert).dump());
  std::ostringstream sa, sb;
  cf::write_stats_csv(sa, a.stats);
  cf::write_stats_csv(sb, b.stats);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')),
            "stage,side,primes_used,survivors_before,survivors_after,capacity,seed");
}

TEST(Construct, StatsRowsAreConsistent) {
  const auto r = cf::construct(config("poly:[0,1]", 300, true));
  bool saw_medium = false;
  for (const auto& s : r.stats) {
    if (s.stage == "medium") {
      saw_medium = true;
      EXPECT_LE(s.survivors_after, s.survivors_before);
      EXPECT_LE(s.survivors_after, s.capacity);
    }
    if (s.stage == "cleanup" && s.side != "both") {
      EXPECT_EQ(s.primes_used, s.survivors_before);
    }
  }
  EXPECT_TRUE(saw_medium);
}

TEST(Construct, LadderModeWithPinnedZ) {
  auto cfg = config("poly:[0,1]", 2000, true);
  cfg.z = 30;
  for (const std::string mode : {"greedy", "random"}) {
    cfg.mode = mode;
    const auto r = cf::construct(cfg);
    EXPECT_FALSE(r.dense);
    expect_sound(r);
  }
}

TEST(Construct, Failures) {
  EXPECT_THROW(cf::construct(config("poly:[0,1]", 10, true)), cf::InfeasibleError);
  EXPECT_THROW(cf::construct(config("poly:[-1,0,1]", 300, true)), cf::UsageError);
  auto bad_mode = config("poly:[0,1]", 300, true);
  bad_mode.mode = "simplex";
  EXPECT_THROW(cf::construct(bad_mode), cf::UsageError);
  auto no_shrink = config("poly:[0,1]", 300, true);
  no_shrink.shrink_y = false;
  EXPECT_THROW(cf::construct(no_shrink), cf::InfeasibleError);
}

TEST(Construct, ExplicitN) {
  auto cfg = config("poly:[0,1]", 300, true);
  cfg.N = cf::pow10(10);
  EXPECT_THROW(cf::construct(cfg), cf::UsageError);
  const auto autoN = cf::construct(config("poly:[0,1]", 300, true)).cert.placement->N;
  cfg.N = autoN * 7 + 3;
  const auto r = cf::construct(cfg);
  EXPECT_EQ(r.cert.placement->N, autoN * 7 + 3);
  expect_sound(r);
}
