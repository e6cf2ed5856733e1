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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace composite_forge {

using BigInt = mpz_class;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The inputs violate a documented precondition (bad literal, bad params).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// The construction cannot be completed with the given parameters.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

inline std::string to_decimal(const BigInt& v) { return v.get_str(10); }

inline BigInt parse_decimal(std::string_view s) {
  std::string str(s);
  if (str.empty()) throw UsageError("empty integer literal");
  std::size_t start = (str[0] == '-' || str[0] == '+') ? 1 : 0;
  if (start == str.size()) throw UsageError("bad integer literal: " + str);
  for (std::size_t i = start; i < str.size(); ++i) {
    if (str[i] < '0' || str[i] > '9') {
      throw UsageError("bad integer literal: " + str);
    }
  }
  if (str[0] == '+') str.erase(0, 1);
  return BigInt(str, 10);
}

/// Least nonnegative residue of `v` modulo `m` (m > 0).
inline std::uint64_t mod_u64(const BigInt& v, std::uint64_t m) {
  return mpz_fdiv_ui(v.get_mpz_t(), static_cast<unsigned long>(m));
}

inline std::uint64_t mod_i64(std::int64_t v, std::uint64_t m) {
  const auto mm = static_cast<std::int64_t>(m);
  std::int64_t r = v % mm;
  return static_cast<std::uint64_t>(r < 0 ? r + mm : r);
}

inline BigInt from_u64(std::uint64_t v) {
  BigInt r;
  mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return r;
}

inline BigInt from_i64(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  // -(v+1) avoids overflow at INT64_MIN
  BigInt r = from_u64(static_cast<std::uint64_t>(-(v + 1)));
  return -r - 1;
}

inline bool fits_i64(const BigInt& v) {
  return mpz_sizeinbase(v.get_mpz_t(), 2) <= 62;
}

inline std::int64_t to_i64(const BigInt& v) {
  if (!fits_i64(v)) throw Error("integer out of 64-bit range");
  return v.get_si();
}

/// FNV-1a, used for stable labels and cache keys.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace composite_forge
