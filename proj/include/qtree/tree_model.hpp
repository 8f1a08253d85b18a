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

/**
 * @file
 * Tree parameterizations.
 *
 * A binary tree of maximum depth d has decision layers 0..d; layer i holds
 * 2^i nodes and leaves are addressed by bit strings of length d+1. Feature
 * indices inside configurations are 1-based (feature 1 is the first feature
 * and occupies qubit 0 of a circuit).
 *
 * DecisionConfig stores the split feature of every node directly and must
 * avoid repeated features along each path. CompressedConfig stores swap
 * indices into a running permutation of (1..k); every value combination with
 * c^i_j in {i+1..k} is a valid tree. expand() and compress() convert between
 * the two.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtree/common.hpp"

namespace qtree {

/// Root-to-node sequence of binary decisions; bit i is the outcome at depth i.
class BitPath {
  public:
    BitPath() = default;
    explicit BitPath(Bits bits) : bits_(std::move(bits)) {
        for (auto b : bits_) {
            require(b <= 1, "BitPath entries must be 0 or 1");
        }
    }
    static BitPath from_string(std::string_view s) { return BitPath(bits_from_string(s)); }
    static BitPath from_index(std::size_t node_index, std::size_t length) {
        require(node_index >= 1 && node_index <= pow2(length), "node index out of range");
        return BitPath(index_to_bits(node_index - 1, length));
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    const Bits &bits() const { return bits_; }
    std::string to_string() const { return bits_to_string(bits_); }

    BitPath prefix(std::size_t length) const {
        return BitPath(Bits(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(length)));
    }

    friend bool operator==(const BitPath &, const BitPath &) = default;

  private:
    Bits bits_;
};

/// 1-based index of the node reached by `path` within its layer.
inline std::size_t node_index(const BitPath &path) {
    return static_cast<std::size_t>(bits_to_index(path.bits())) + 1;
}

/// Bit u (1-based, most significant first) of j-1 written with v bits.
inline int kappa(std::size_t j, std::size_t v, std::size_t u) {
    require(v >= 1 && u >= 1 && u <= v, "kappa: need 1 <= u <= v");
    require(j >= 1 && j <= pow2(v), "kappa: node index out of range");
    return static_cast<int>(((j - 1) >> (v - u)) & 1u);
}

namespace detail {

inline void check_layer_shape(const std::vector<std::vector<int>> &layers, const char *what) {
    require(!layers.empty(), std::string(what) + ": at least one layer required");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        require(layers[i].size() == pow2(i), std::string(what) + ": layer " + std::to_string(i) + " must hold " +
                                                  std::to_string(pow2(i)) + " entries");
    }
}

} // namespace detail

/// Per-node split feature indices e^i_j in {1..k}.
class DecisionConfig {
  public:
    DecisionConfig(int k, std::vector<std::vector<int>> layers) : k_(k), layers_(std::move(layers)) {
        require(k >= 1, "DecisionConfig: k must be positive");
        detail::check_layer_shape(layers_, "DecisionConfig");
        require(layers_.size() <= static_cast<std::size_t>(k), "DecisionConfig: depth d must satisfy d+1 <= k");
        for (const auto &layer : layers_) {
            for (int e : layer) {
                require(e >= 1 && e <= k, "DecisionConfig: feature index out of {1..k}");
            }
        }
    }

    int k() const { return k_; }
    std::size_t depth() const { return layers_.size() - 1; }
    std::size_t leaf_count() const { return pow2(layers_.size()); }
    const std::vector<std::vector<int>> &layers() const { return layers_; }

    /// Feature tested at the node reached by `prefix` (length = layer depth).
    int feature_at(const BitPath &prefix) const { return layers_.at(prefix.size())[node_index(prefix) - 1]; }

    friend bool operator==(const DecisionConfig &, const DecisionConfig &) = default;

  private:
    int k_;
    std::vector<std::vector<int>> layers_;
};

/// Per-node swap indices c^i_j in {i+1..k}.
class CompressedConfig {
  public:
    CompressedConfig(int k, std::vector<std::vector<int>> layers) : k_(k), layers_(std::move(layers)) {
        require(k >= 1, "CompressedConfig: k must be positive");
        detail::check_layer_shape(layers_, "CompressedConfig");
        require(layers_.size() <= static_cast<std::size_t>(k), "CompressedConfig: depth d must satisfy d+1 <= k");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            for (int c : layers_[i]) {
                require(c >= static_cast<int>(i) + 1 && c <= k, "CompressedConfig: swap index c^" + std::to_string(i) +
                                                                     " = " + std::to_string(c) + " outside {" +
                                                                     std::to_string(i + 1) + ".." +
                                                                     std::to_string(k) + "}");
            }
        }
    }

    int k() const { return k_; }
    std::size_t depth() const { return layers_.size() - 1; }
    std::size_t leaf_count() const { return pow2(layers_.size()); }
    const std::vector<std::vector<int>> &layers() const { return layers_; }

    friend bool operator==(const CompressedConfig &, const CompressedConfig &) = default;

  private:
    int k_;
    std::vector<std::vector<int>> layers_;
};

/// Outcome of the no-repeat check; carries the first depth-d node prefix
/// whose root path repeats a feature.
struct PathCheck {
    bool valid = true;
    std::optional<BitPath> offending_path;
    explicit operator bool() const { return valid; }
};

inline PathCheck validate_decision_config(const DecisionConfig &config) {
    const std::size_t d = config.depth();
    std::vector<int> used;
    for (std::size_t leaf = 0; leaf < pow2(d); ++leaf) {
        const BitPath path(index_to_bits(leaf, d));
        used.clear();
        for (std::size_t l = 0; l <= d; ++l) {
            const int e = config.feature_at(path.prefix(l));
            for (int seen : used) {
                if (seen == e) {
                    return PathCheck{false, path};
                }
            }
            used.push_back(e);
        }
    }
    return PathCheck{};
}

namespace detail {

/// Element swap S(I, a, b) on 1-based positions.
inline void swap_positions(std::vector<int> &index_vector, int a, int b) {
    std::swap(index_vector[static_cast<std::size_t>(a - 1)], index_vector[static_cast<std::size_t>(b - 1)]);
}

/// 1-based position of `value` in `index_vector`.
inline int position_of(const std::vector<int> &index_vector, int value) {
    for (std::size_t i = 0; i < index_vector.size(); ++i) {
        if (index_vector[i] == value) {
            return static_cast<int>(i) + 1;
        }
    }
    throw ValidationError("feature index " + std::to_string(value) + " not present in index vector");
}

inline std::vector<int> identity_index_vector(int k) {
    std::vector<int> v(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        v[static_cast<std::size_t>(i)] = i + 1;
    }
    return v;
}

} // namespace detail

/// Applies the swaps of `config` along `path` (length l) to (1..k) and
/// returns the permuted index vector T(l; path). Position v+1 of the result
/// is the feature tested at depth v on this path, for v <= l.
inline std::vector<int> path_index_vector(const CompressedConfig &config, const BitPath &path) {
    require(path.size() <= config.depth(), "path_index_vector: path longer than tree");
    auto J = detail::identity_index_vector(config.k());
    for (std::size_t v = 0; v <= path.size(); ++v) {
        const int c = config.layers()[v][node_index(path.prefix(v)) - 1];
        detail::swap_positions(J, static_cast<int>(v) + 1, c);
    }
    return J;
}

inline DecisionConfig expand(const CompressedConfig &config) {
    const std::size_t d = config.depth();
    std::vector<std::vector<int>> layers(d + 1);
    for (std::size_t l = 0; l <= d; ++l) {
        layers[l].resize(pow2(l));
        for (std::size_t j = 0; j < pow2(l); ++j) {
            const auto J = path_index_vector(config, BitPath(index_to_bits(j, l)));
            layers[l][j] = J[l];
        }
    }
    return DecisionConfig(config.k(), std::move(layers));
}

inline CompressedConfig compress(const DecisionConfig &config) {
    const auto check = validate_decision_config(config);
    require(check.valid, "compress: decision configuration repeats a feature along path '" +
                             (check.offending_path ? check.offending_path->to_string() : std::string()) + "'");
    const std::size_t d = config.depth();
    std::vector<std::vector<int>> layers(d + 1);
    for (std::size_t l = 0; l <= d; ++l) {
        layers[l].resize(pow2(l));
        for (std::size_t j = 0; j < pow2(l); ++j) {
            const BitPath path(index_to_bits(j, l));
            auto J = detail::identity_index_vector(config.k());
            for (std::size_t v = 0; v < l; ++v) {
                const int e = config.feature_at(path.prefix(v));
                detail::swap_positions(J, static_cast<int>(v) + 1, detail::position_of(J, e));
            }
            layers[l][j] = detail::position_of(J, config.feature_at(path));
        }
    }
    return CompressedConfig(config.k(), std::move(layers));
}

/// Flattened CompressedConfig in layer order, with per-gene bounds.
class Chromosome {
  public:
    Chromosome(int k, std::size_t depth, std::vector<int> genes) : k_(k), depth_(depth), genes_(std::move(genes)) {
        require(genes_.size() == length(depth), "Chromosome: expected " + std::to_string(length(depth)) + " genes");
        for (std::size_t i = 0; i < genes_.size(); ++i) {
            require(genes_[i] >= lower_bound(i) && genes_[i] <= k_, "Chromosome: gene " + std::to_string(i) +
                                                                        " out of bounds");
        }
    }

    static constexpr std::size_t length(std::size_t depth) { return pow2(depth + 1) - 1; }

    int k() const { return k_; }
    std::size_t depth() const { return depth_; }
    std::size_t size() const { return genes_.size(); }
    const std::vector<int> &genes() const { return genes_; }
    int operator[](std::size_t i) const { return genes_[i]; }

    /// Layer of gene i: genes 2^l - 1 .. 2^{l+1} - 2 belong to layer l.
    static std::size_t layer_of(std::size_t gene) {
        std::size_t layer = 0;
        while (pow2(layer + 1) - 1 <= gene) {
            ++layer;
        }
        return layer;
    }
    int lower_bound(std::size_t gene) const { return static_cast<int>(layer_of(gene)) + 1; }
    int upper_bound(std::size_t) const { return k_; }

    friend bool operator==(const Chromosome &, const Chromosome &) = default;

  private:
    int k_;
    std::size_t depth_;
    std::vector<int> genes_;
};

inline Chromosome encode_chromosome(const CompressedConfig &config) {
    std::vector<int> genes;
    genes.reserve(Chromosome::length(config.depth()));
    for (const auto &layer : config.layers()) {
        genes.insert(genes.end(), layer.begin(), layer.end());
    }
    return Chromosome(config.k(), config.depth(), std::move(genes));
}

inline CompressedConfig decode_chromosome(const Chromosome &chromosome) {
    std::vector<std::vector<int>> layers(chromosome.depth() + 1);
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].assign(chromosome.genes().begin() + static_cast<std::ptrdiff_t>(pos),
                         chromosome.genes().begin() + static_cast<std::ptrdiff_t>(pos + pow2(l)));
        pos += pow2(l);
    }
    return CompressedConfig(chromosome.k(), std::move(layers));
}

} // namespace qtree
