// Copyright 2026 The Q-tree Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qtree {

/// Raised when an input violates a documented precondition (shape, range,
/// normalization). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

using Bits = std::vector<std::uint8_t>;

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw ValidationError(message);
    }
}

inline constexpr std::size_t pow2(std::size_t e) { return std::size_t{1} << e; }

/// Integer value of a bit vector read most-significant-first.
inline std::uint64_t bits_to_index(const Bits &bits) {
    std::uint64_t v = 0;
    for (auto b : bits) {
        v = (v << 1) | (b & 1u);
    }
    return v;
}

inline Bits index_to_bits(std::uint64_t index, std::size_t width) {
    Bits bits(width);
    for (std::size_t i = 0; i < width; ++i) {
        bits[width - 1 - i] = static_cast<std::uint8_t>((index >> i) & 1u);
    }
    return bits;
}

inline std::string bits_to_string(const Bits &bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

inline std::string index_to_string(std::uint64_t index, std::size_t width) {
    return bits_to_string(index_to_bits(index, width));
}

inline Bits bits_from_string(std::string_view s) {
    Bits bits;
    bits.reserve(s.size());
    for (char c : s) {
        require(c == '0' || c == '1', "bit string may only contain 0 and 1: '" + std::string(s) + "'");
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return bits;
}

/// SplitMix64 finalizer; used to derive independent generator seeds from
/// (seed, generation, index) tuples.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

} // namespace qtree
