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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "composite_forge/bigint.hpp"
#include "composite_forge/fp_poly.hpp"
#include "composite_forge/poly.hpp"
#include "composite_forge/primes.hpp"

namespace composite_forge {

/// Primes below this use the exhaustive residue scan.
inline constexpr std::uint64_t kScanLimit = 10000;

namespace detail {

inline bool root_set_excluded(std::span<const BigInt> ftilde, std::uint64_t p) {
  const auto b = static_cast<std::uint64_t>(ftilde.size() - 1);
  return p <= b || mod_u64(ftilde.back(), p) == 0;
}

inline void require_prime(std::uint64_t p) {
  if (!is_prime_u64(p)) throw UsageError("roots_mod_p: " + std::to_string(p) + " is not prime");
}

}  // namespace detail

/// Exhaustive scan of [0, p). Same exclusions as roots_mod_p.
inline std::vector<std::uint64_t> roots_mod_p_scan(std::span<const BigInt> ftilde, std::uint64_t p) {
  detail::require_prime(p);
  if (detail::root_set_excluded(ftilde, p)) return {};
  const fp::Poly f = fp::reduce(ftilde, p);
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 0; n < p; ++n) {
    if (fp::eval(f, n, p) == 0) out.push_back(n);
  }
  return out;
}

/// gcd(X^p - X, f~) followed by equal-degree splitting. Same exclusions as
/// roots_mod_p; p = 2 falls back to the scan.
inline std::vector<std::uint64_t> roots_mod_p_split(std::span<const BigInt> ftilde, std::uint64_t p) {
  detail::require_prime(p);
  if (detail::root_set_excluded(ftilde, p)) return {};
  if (p == 2) return roots_mod_p_scan(ftilde, p);
  return fp::roots_by_splitting(fp::reduce(ftilde, p), p);
}

/// Sorted root set I_p of the companion f~ modulo the prime p, empty when
/// p <= B or p divides the leading coefficient. Throws UsageError for
/// composite p.
inline std::vector<std::uint64_t> roots_mod_p(std::span<const BigInt> ftilde, std::uint64_t p) {
  return p < kScanLimit ? roots_mod_p_scan(ftilde, p) : roots_mod_p_split(ftilde, p);
}

struct DensityStats {
  std::uint64_t limit = 0;
  std::uint64_t prime_count = 0;
  std::uint64_t usable_count = 0;  // primes with #I_p >= 1
  double mertens_sum = 0;          // sum_{p<=x} #I_p / p
  double sigma_x = 1;              // prod_{q<=x} (1 - #I_q / q)
  double rho_hat = 0;              // usable_count / prime_count
  double rho_hat_normalized = 0;   // usable_count / (x / log x)
  std::map<int, double> rho_nu_hat;  // nu -> #{p : #I_p = nu} / prime_count
};

/// Root sets I_p for every prime p <= limit, stored flat.
class RootTable {
 public:
  RootTable(IntPolynomial f, std::uint64_t limit, std::vector<std::uint64_t> primes,
            std::vector<std::vector<std::uint64_t>> roots)
      : poly_(std::move(f)), limit_(limit), primes_(std::move(primes)) {
    offsets_.reserve(primes_.size() + 1);
    offsets_.push_back(0);
    for (auto& r : roots) {
      flat_.insert(flat_.end(), r.begin(), r.end());
      offsets_.push_back(static_cast<std::uint32_t>(flat_.size()));
    }
    compute_stats();
  }

  const IntPolynomial& poly() const { return poly_; }
  std::uint64_t limit() const { return limit_; }
  std::size_t size() const { return primes_.size(); }
  std::uint64_t prime(std::size_t i) const { return primes_[i]; }
  std::span<const std::uint64_t> primes() const { return primes_; }

  std::span<const std::uint64_t> roots(std::size_t i) const {
    return std::span<const std::uint64_t>(flat_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  bool contains(std::uint64_t p) const {
    return std::binary_search(primes_.begin(), primes_.end(), p);
  }

  std::span<const std::uint64_t> roots_of(std::uint64_t p) const {
    const auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
    if (it == primes_.end() || *it != p) {
      throw Error("prime " + std::to_string(p) + " not in root table");
    }
    return roots(static_cast<std::size_t>(it - primes_.begin()));
  }

  /// Index range of primes p with lo < p <= hi.
  std::pair<std::size_t, std::size_t> index_range(std::uint64_t lo, std::uint64_t hi) const {
    const auto b = std::upper_bound(primes_.begin(), primes_.end(), lo);
    const auto e = std::upper_bound(primes_.begin(), primes_.end(), hi);
    return {static_cast<std::size_t>(b - primes_.begin()),
            static_cast<std::size_t>(std::max(b, e) - primes_.begin())};
  }

  /// Primes q with lo < q <= hi and I_q nonempty, ascending.
  std::vector<std::uint64_t> usable_primes(std::uint64_t lo, std::uint64_t hi) const {
    std::vector<std::uint64_t> out;
    const auto [b, e] = index_range(lo, hi);
    for (std::size_t i = b; i < e; ++i) {
      if (!roots(i).empty()) out.push_back(primes_[i]);
    }
    return out;
  }

  /// sigma(z1, z2) = prod_{z1 < q <= z2} (1 - #I_q / q).
  double sigma(std::uint64_t z1, std::uint64_t z2) const {
    const auto [b, e] = index_range(z1, z2);
    double log_sum = 0;
    for (std::size_t i = b; i < e; ++i) {
      const auto nu = static_cast<double>(roots(i).size());
      if (nu > 0) log_sum += std::log1p(-nu / static_cast<double>(primes_[i]));
    }
    return std::exp(log_sum);
  }

  /// P(lo, hi]: product of the usable primes in (lo, hi].
  BigInt modulus(std::uint64_t lo, std::uint64_t hi) const {
    BigInt acc = 1;
    for (std::uint64_t q : usable_primes(lo, hi)) acc *= static_cast<unsigned long>(q);
    return acc;
  }

  const DensityStats& stats() const { return stats_; }

 private:
  void compute_stats() {
    stats_ = DensityStats{};
    stats_.limit = limit_;
    stats_.prime_count = primes_.size();
    std::map<int, std::uint64_t> by_nu;
    double log_sigma = 0;
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      const auto nu = roots(i).size();
      if (nu == 0) continue;
      const auto p = static_cast<double>(primes_[i]);
      ++stats_.usable_count;
      ++by_nu[static_cast<int>(nu)];
      stats_.mertens_sum += static_cast<double>(nu) / p;
      log_sigma += std::log1p(-static_cast<double>(nu) / p);
    }
    stats_.sigma_x = std::exp(log_sigma);
    if (stats_.prime_count > 0) {
      const auto pc = static_cast<double>(stats_.prime_count);
      stats_.rho_hat = static_cast<double>(stats_.usable_count) / pc;
      for (const auto& [nu, count] : by_nu) stats_.rho_nu_hat[nu] = static_cast<double>(count) / pc;
    }
    if (limit_ >= 2) {
      const auto x = static_cast<double>(limit_);
      stats_.rho_hat_normalized = static_cast<double>(stats_.usable_count) / (x / std::log(x));
    }
  }

  IntPolynomial poly_;
  std::uint64_t limit_;
  std::vector<std::uint64_t> primes_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint64_t> flat_;
  DensityStats stats_;
};

/// Root table for every prime p <= x. Work is split across threads by
/// contiguous prime ranges.
inline RootTable build_root_table(const IntPolynomial& f, std::uint64_t x) {
  std::vector<std::uint64_t> primes = primes_up_to(x);
  std::vector<std::vector<std::uint64_t>> roots(primes.size());
  const auto ftilde = f.companion_coeffs();
  const std::size_t workers =
      primes.size() < 4096 ? 1 : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) roots[i] = roots_mod_p(ftilde, primes[i]);
  };
  if (workers == 1) {
    run(0, primes.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (primes.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(primes.size(), w * chunk);
      const std::size_t e = std::min(primes.size(), b + chunk);
      pool.emplace_back(run, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return RootTable(f, x, std::move(primes), std::move(roots));
}

inline DensityStats density_stats(const RootTable& table) { return table.stats(); }

/// Number of usable q in (qmin, qmax] with m mod q in I_q - I_q.
inline std::uint64_t residue_collision_count(const RootTable& table, std::uint64_t m,
                                             std::uint64_t qmin, std::uint64_t qmax) {
  std::uint64_t count = 0;
  const auto [b, e] = table.index_range(qmin, qmax);
  for (std::size_t i = b; i < e; ++i) {
    const auto r = table.roots(i);
    if (r.empty()) continue;
    const std::uint64_t q = table.prime(i);
    const std::uint64_t mq = m % q;
    bool hit = false;
    for (std::uint64_t a : r) {
      for (std::uint64_t c : r) {
        if ((a + q - c) % q == mq) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    count += hit ? 1 : 0;
  }
  return count;
}

// Cache file layout, all fields little-endian uint64:
//   magic "CFRTABL1", polynomial hash, x, record count,
//   then per prime: p, k, k residues.
namespace cache {

inline constexpr char kMagic[8] = {'C', 'F', 'R', 'T', 'A', 'B', 'L', '1'};

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return true;
}

}  // namespace cache

inline void save_root_table(const RootTable& table, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write root-table cache " + path.string());
  os.write(cache::kMagic, 8);
  cache::put_u64(os, table.poly().hash());
  cache::put_u64(os, table.limit());
  cache::put_u64(os, table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    cache::put_u64(os, table.prime(i));
    const auto r = table.roots(i);
    cache::put_u64(os, r.size());
    for (std::uint64_t a : r) cache::put_u64(os, a);
  }
  if (!os) throw Error("short write to root-table cache " + path.string());
}

/// nullopt if the file is missing, malformed, or keyed to another (f, x).
inline std::optional<RootTable> load_root_table(const std::filesystem::path& path,
                                                const IntPolynomial& f, std::uint64_t x) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, cache::kMagic)) return std::nullopt;
  std::uint64_t hash = 0, limit = 0, count = 0;
  if (!cache::get_u64(is, hash) || !cache::get_u64(is, limit) || !cache::get_u64(is, count)) {
    return std::nullopt;
  }
  if (hash != f.hash() || limit != x) return std::nullopt;
  std::vector<std::uint64_t> expected = primes_up_to(x);
  if (count != expected.size()) return std::nullopt;
  std::vector<std::vector<std::uint64_t>> roots(count);
  const auto b = static_cast<std::uint64_t>(f.degree());
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t p = 0, k = 0;
    if (!cache::get_u64(is, p) || !cache::get_u64(is, k)) return std::nullopt;
    if (p != expected[i] || k > b) return std::nullopt;
    roots[i].resize(k);
    for (auto& a : roots[i]) {
      if (!cache::get_u64(is, a) || a >= p) return std::nullopt;
    }
  }
  return RootTable(f, x, std::move(expected), std::move(roots));
}

/// build_root_table, memoized on disk under $COMPOSITE_FORGE_CACHE when set.
inline RootTable build_root_table_cached(const IntPolynomial& f, std::uint64_t x) {
  const char* dir = std::getenv("COMPOSITE_FORGE_CACHE");
  if (dir == nullptr || *dir == '\0') return build_root_table(f, x);
  char name[64];
  std::snprintf(name, sizeof(name), "rt-%016llx-%llu.bin",
                static_cast<unsigned long long>(f.hash()), static_cast<unsigned long long>(x));
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  if (auto cached = load_root_table(path, f, x)) return std::move(*cached);
  RootTable table = build_root_table(f, x);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  save_root_table(table, path);
  return table;
}

}  // namespace composite_forge
