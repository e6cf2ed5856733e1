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
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "composite_forge/bigint.hpp"
#include "composite_forge/modroots.hpp"

namespace composite_forge {

enum class Stage { small, medium, cleanup };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::small: return "small";
    case Stage::medium: return "medium";
    case Stage::cleanup: return "cleanup";
  }
  return "small";
}

inline Stage stage_from_string(std::string_view s) {
  if (s == "small") return Stage::small;
  if (s == "medium") return Stage::medium;
  if (s == "cleanup") return Stage::cleanup;
  throw UsageError("unknown stage: " + std::string(s));
}

/// Per-prime residues r_q realizing b mod prod q. A prime may be set once.
class ResidueAssignment {
 public:
  explicit ResidueAssignment(Stage stage = Stage::small) : stage_(stage) {}

  Stage stage() const { return stage_; }
  std::size_t size() const { return residues_.size(); }
  bool empty() const { return residues_.empty(); }
  bool contains(std::uint64_t q) const { return residues_.count(q) != 0; }
  const std::map<std::uint64_t, std::uint64_t>& residues() const { return residues_; }

  void set(std::uint64_t q, std::uint64_t r) {
    if (!residues_.emplace(q, r % q).second) {
      throw Error("prime " + std::to_string(q) + " assigned twice");
    }
  }

  std::optional<std::uint64_t> get(std::uint64_t q) const {
    const auto it = residues_.find(q);
    if (it == residues_.end()) return std::nullopt;
    return it->second;
  }

  void merge(const ResidueAssignment& other) {
    for (const auto& [q, r] : other.residues_) set(q, r);
  }

  /// Restriction to primes lo < q <= hi.
  ResidueAssignment restricted(std::uint64_t lo, std::uint64_t hi) const {
    ResidueAssignment out(stage_);
    for (auto it = residues_.upper_bound(lo); it != residues_.end() && it->first <= hi; ++it) {
      out.residues_.emplace(it->first, it->second);
    }
    return out;
  }

  /// r'_q = (-N - r_q) mod q: the shift that sieves the backward side.
  ResidueAssignment mirrored(const BigInt& n_target) const {
    ResidueAssignment out(stage_);
    for (const auto& [q, r] : residues_) {
      const std::uint64_t nq = mod_u64(n_target, q);
      out.residues_.emplace(q, (2 * q - nq - r) % q);
    }
    return out;
  }

  /// r_q = b mod q for every usable prime lo < q <= hi.
  static ResidueAssignment from_integer(const RootTable& table, const BigInt& b, std::uint64_t lo,
                                        std::uint64_t hi, Stage stage = Stage::small) {
    ResidueAssignment out(stage);
    for (std::uint64_t q : table.usable_primes(lo, hi)) out.residues_.emplace(q, mod_u64(b, q));
    return out;
  }

  friend bool operator==(const ResidueAssignment& a, const ResidueAssignment& b) {
    return a.stage_ == b.stage_ && a.residues_ == b.residues_;
  }

 private:
  Stage stage_;
  std::map<std::uint64_t, std::uint64_t> residues_;
};

/// Primes q with lo < q <= hi.
struct PrimeRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// Inclusive integer interval; may be negative or empty (hi < lo).
struct Interval {
  std::int64_t lo = 1;
  std::int64_t hi = 0;
  std::int64_t length() const { return hi >= lo ? hi - lo + 1 : 0; }
};

/// Bitmap over [lo, hi]: bit set <=> n survives every class of the sieve
/// that produced it.
class SurvivorSet {
 public:
  SurvivorSet() = default;
  SurvivorSet(Interval interval, PrimeRange range, std::string shift)
      : interval_(interval), range_(range), shift_(std::move(shift)) {
    const auto n = static_cast<std::size_t>(interval.length());
    words_.assign((n + 63) / 64, ~0ULL);
    if (n % 64 != 0) words_.back() = (1ULL << (n % 64)) - 1;
  }

  Interval interval() const { return interval_; }
  PrimeRange prime_range() const { return range_; }
  const std::string& shift() const { return shift_; }

  bool in_range(std::int64_t n) const { return n >= interval_.lo && n <= interval_.hi; }

  bool contains(std::int64_t n) const {
    if (!in_range(n)) return false;
    const auto i = static_cast<std::uint64_t>(n - interval_.lo);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  void erase(std::int64_t n) {
    if (!in_range(n)) return;
    const auto i = static_cast<std::uint64_t>(n - interval_.lo);
    words_[i >> 6] &= ~(1ULL << (i & 63));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }

  template <class F>
  void for_each(F&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        fn(interval_.lo + static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(b)));
        bits &= bits - 1;
      }
    }
  }

  std::vector<std::int64_t> to_vector() const {
    std::vector<std::int64_t> out;
    out.reserve(count());
    for_each([&](std::int64_t n) { out.push_back(n); });
    return out;
  }

  std::span<std::uint64_t> words() { return words_; }
  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const SurvivorSet& a, const SurvivorSet& b) {
    return a.interval_.lo == b.interval_.lo && a.interval_.hi == b.interval_.hi &&
           a.words_ == b.words_;
  }

 private:
  Interval interval_;
  PrimeRange range_;
  std::string shift_;
  std::vector<std::uint64_t> words_;
};

inline constexpr std::size_t kSegmentBits = std::size_t{1} << 20;

/// Survivors in `interval` of the classes n - r_q = alpha (mod q) for every
/// usable q in `range` and alpha in I_q. Throws if a usable prime in range
/// has no residue.
inline SurvivorSet sieve_survivors(const RootTable& table, const ResidueAssignment& assign,
                                   PrimeRange range, Interval interval) {
  struct Class {
    std::uint64_t q;
    std::uint64_t c;  // n = c (mod q) is removed
  };
  std::vector<Class> classes;
  const auto [b, e] = table.index_range(range.lo, range.hi);
  for (std::size_t i = b; i < e; ++i) {
    const auto roots = table.roots(i);
    if (roots.empty()) continue;
    const std::uint64_t q = table.prime(i);
    const auto r = assign.get(q);
    if (!r) throw Error("no residue for sieving prime " + std::to_string(q));
    for (std::uint64_t a : roots) classes.push_back({q, (*r + a) % q});
  }
  SurvivorSet out(interval, range,
                  std::string(to_string(assign.stage())) + ":" + std::to_string(assign.size()));
  const auto n = static_cast<std::size_t>(interval.length());
  if (n == 0 || classes.empty()) return out;

  auto words = out.words();
  auto sieve_segment = [&](std::size_t begin, std::size_t end) {
    const std::int64_t seg_lo = interval.lo + static_cast<std::int64_t>(begin);
    for (const Class& k : classes) {
      std::size_t i = begin + (k.c + k.q - mod_i64(seg_lo, k.q)) % k.q;
      for (; i < end; i += k.q) words[i >> 6] &= ~(1ULL << (i & 63));
    }
  };
  const std::size_t segments = (n + kSegmentBits - 1) / kSegmentBits;
  const std::size_t workers =
      std::min<std::size_t>(segments, std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (std::size_t s = 0; s < segments; ++s) {
      sieve_segment(s * kSegmentBits, std::min(n, (s + 1) * kSegmentBits));
    }
  } else {
    // Segments are word aligned, so workers never touch the same word.
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < segments; s += workers) {
          sieve_segment(s * kSegmentBits, std::min(n, (s + 1) * kSegmentBits));
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

/// S(b) = S(0) + b on `interval`: sieving with shift b equals sieving with
/// shift 0 on the translated interval.
inline bool translate_check(const RootTable& table, std::int64_t b, PrimeRange range,
                            Interval interval) {
  const BigInt shift = from_i64(b);
  const auto shifted = ResidueAssignment::from_integer(table, shift, range.lo, range.hi);
  const auto zero = ResidueAssignment::from_integer(table, BigInt(0), range.lo, range.hi);
  const SurvivorSet lhs = sieve_survivors(table, shifted, range, interval);
  const SurvivorSet rhs =
      sieve_survivors(table, zero, range, Interval{interval.lo - b, interval.hi - b});
  bool same = lhs.count() == rhs.count();
  lhs.for_each([&](std::int64_t n) { same = same && rhs.contains(n - b); });
  return same;
}

}  // namespace composite_forge
