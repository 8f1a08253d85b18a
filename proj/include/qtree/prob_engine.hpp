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
 * Classical probabilistic model of a tree.
 *
 * Basis indexing is shared with the simulator: for features x_1..x_k and
 * labels y_1..y_m the index is sum_i x_i 2^{k+m-i} + sum_j y_j 2^{m-j}, i.e.
 * x_1 is the most significant bit.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qtree/common.hpp"
#include "qtree/tree_model.hpp"

namespace qtree {

/// One labelled data point.
struct Sample {
    Bits x;
    Bits y;
    friend bool operator==(const Sample &, const Sample &) = default;
};

/// Dense normalized table p(x, y) over 2^{k+m} basis states.
class JointDistribution {
  public:
    JointDistribution(int k, int m, std::vector<double> probs) : k_(k), m_(m), probs_(std::move(probs)) {
        require(k >= 1 && m >= 0, "JointDistribution: need k >= 1 and m >= 0");
        require(k + m <= 24, "JointDistribution: k + m too large for a dense table");
        require(probs_.size() == pow2(static_cast<std::size_t>(k + m)), "JointDistribution: table size must be 2^(k+m)");
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            require(probs_[i] >= 0.0, "JointDistribution: negative probability");
            total += probs_[i];
            if (probs_[i] > 0.0) {
                support_.push_back(i);
            }
        }
        require(std::abs(total - 1.0) <= 1e-12, "JointDistribution: probabilities must sum to 1");
    }

    int k() const { return k_; }
    int m() const { return m_; }
    std::size_t width() const { return static_cast<std::size_t>(k_ + m_); }
    const std::vector<double> &probs() const { return probs_; }
    double operator[](std::size_t index) const { return probs_[index]; }
    /// Basis indices with non-zero mass, ascending.
    const std::vector<std::size_t> &support() const { return support_; }

    std::size_t index_of(const Bits &x, const Bits &y) const {
        require(x.size() == static_cast<std::size_t>(k_) && y.size() == static_cast<std::size_t>(m_),
                "JointDistribution: feature/label width mismatch");
        return static_cast<std::size_t>((bits_to_index(x) << m_) | bits_to_index(y));
    }
    /// Feature bit i (1-based) of basis index `index`.
    std::uint8_t feature_bit(std::size_t index, int feature) const {
        return static_cast<std::uint8_t>((index >> (k_ + m_ - feature)) & 1u);
    }
    /// Label bit j (1-based) of basis index `index`.
    std::uint8_t label_bit(std::size_t index, int label) const {
        return static_cast<std::uint8_t>((index >> (m_ - label)) & 1u);
    }
    std::size_t label_part(std::size_t index) const { return index & (pow2(static_cast<std::size_t>(m_)) - 1); }
    std::size_t feature_part(std::size_t index) const { return index >> m_; }

    /// Marginal over the features only (the query-circuit view of the data).
    std::vector<double> feature_marginal() const {
        std::vector<double> out(pow2(static_cast<std::size_t>(k_)), 0.0);
        for (auto i : support_) {
            out[feature_part(i)] += probs_[i];
        }
        return out;
    }

  private:
    int k_;
    int m_;
    std::vector<double> probs_;
    std::vector<std::size_t> support_;
};

inline JointDistribution distribution_from_dataset(std::span<const Sample> data) {
    require(!data.empty(), "distribution_from_dataset: empty dataset");
    const std::size_t k = data.front().x.size();
    const std::size_t m = data.front().y.size();
    std::map<std::size_t, std::size_t> histogram;
    for (std::size_t r = 0; r < data.size(); ++r) {
        require(data[r].x.size() == k && data[r].y.size() == m,
                "distribution_from_dataset: inconsistent widths in row " + std::to_string(r + 1));
        histogram[static_cast<std::size_t>((bits_to_index(data[r].x) << m) | bits_to_index(data[r].y))]++;
    }
    std::vector<double> probs(pow2(k + m), 0.0);
    const double total = static_cast<double>(data.size());
    for (auto [index, count] : histogram) {
        probs[index] = static_cast<double>(count) / total;
    }
    // Renormalize so the table passes the 1e-12 sum check exactly.
    double sum = 0.0;
    for (double p : probs) {
        sum += p;
    }
    for (double &p : probs) {
        p /= sum;
    }
    return JointDistribution(static_cast<int>(k), static_cast<int>(m), std::move(probs));
}

/// p(y) over 2^m label configurations.
inline std::vector<double> marginal_labels(const JointDistribution &p) {
    std::vector<double> out(pow2(static_cast<std::size_t>(p.m())), 0.0);
    for (auto i : p.support()) {
        out[p.label_part(i)] += p[i];
    }
    return out;
}

/// Per-label majority value of the distribution; ties go to 0.
inline Bits majority_labels(const JointDistribution &p) {
    Bits out(static_cast<std::size_t>(p.m()), 0);
    for (int j = 1; j <= p.m(); ++j) {
        double ones = 0.0;
        for (auto i : p.support()) {
            if (p.label_bit(i, j)) {
                ones += p[i];
            }
        }
        out[static_cast<std::size_t>(j - 1)] = ones > 0.5 ? 1 : 0;
    }
    return out;
}

/// (feature index, required bit) pairs collected along a root path.
struct Condition {
    int feature;
    std::uint8_t value;
    friend bool operator==(const Condition &, const Condition &) = default;
};
using ConditionSet = std::vector<Condition>;

inline ConditionSet leaf_condition_set(const DecisionConfig &config, const BitPath &path) {
    require(path.size() <= config.depth() + 1, "leaf_condition_set: path longer than tree");
    ConditionSet out;
    out.reserve(path.size());
    for (std::size_t l = 0; l < path.size(); ++l) {
        out.push_back({config.feature_at(path.prefix(l)), path[l]});
    }
    return out;
}

struct LeafProfile {
    double reach_prob = 0.0;
    /// label_marginals[i] = {p(y_i=0 | C), p(y_i=1 | C)}.
    std::vector<std::array<double, 2>> label_marginals;
    bool defined = false;
};

namespace detail {

/// Leaf (0-based) reached by the features of basis index `index`.
inline std::size_t traverse_index(const DecisionConfig &config, const JointDistribution &p, std::size_t index) {
    std::size_t node = 0;
    for (std::size_t l = 0; l <= config.depth(); ++l) {
        const int e = config.layers()[l][node];
        node = (node << 1) | p.feature_bit(index, e);
    }
    return node;
}

inline std::size_t traverse_bits(const DecisionConfig &config, const Bits &x) {
    std::size_t node = 0;
    for (std::size_t l = 0; l <= config.depth(); ++l) {
        const int e = config.layers()[l][node];
        node = (node << 1) | x[static_cast<std::size_t>(e - 1)];
    }
    return node;
}

inline void check_compatible(const JointDistribution &p, const DecisionConfig &config) {
    require(p.k() == config.k(), "tree and distribution disagree on the feature count k");
}

} // namespace detail

/// p(C_nu, y) for every leaf nu and label configuration y, laid out as
/// index (nu-1) * 2^m + y; this is the order of a measured bit string
/// x̄_1..x̄_{d+1} ȳ.
inline std::vector<double> leaf_label_joint(const JointDistribution &p, const DecisionConfig &config) {
    detail::check_compatible(p, config);
    const std::size_t labels = pow2(static_cast<std::size_t>(p.m()));
    std::vector<double> out(config.leaf_count() * labels, 0.0);
    for (auto i : p.support()) {
        out[detail::traverse_index(config, p, i) * labels + p.label_part(i)] += p[i];
    }
    return out;
}

inline std::vector<LeafProfile> leaf_profiles(const JointDistribution &p, const DecisionConfig &config) {
    detail::check_compatible(p, config);
    const std::size_t m = static_cast<std::size_t>(p.m());
    std::vector<LeafProfile> out(config.leaf_count());
    std::vector<std::vector<double>> ones(config.leaf_count(), std::vector<double>(m, 0.0));
    for (auto i : p.support()) {
        const auto leaf = detail::traverse_index(config, p, i);
        out[leaf].reach_prob += p[i];
        for (std::size_t j = 0; j < m; ++j) {
            if (p.label_bit(i, static_cast<int>(j + 1))) {
                ones[leaf][j] += p[i];
            }
        }
    }
    for (std::size_t leaf = 0; leaf < out.size(); ++leaf) {
        auto &profile = out[leaf];
        profile.defined = profile.reach_prob > 0.0;
        profile.label_marginals.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (profile.defined) {
                const double p1 = std::clamp(ones[leaf][j] / profile.reach_prob, 0.0, 1.0);
                profile.label_marginals[j] = {1.0 - p1, p1};
            } else {
                profile.label_marginals[j] = {0.5, 0.5};
            }
        }
    }
    return out;
}

struct Traversal {
    BitPath path;
    ConditionSet conditions;
    std::size_t leaf_index = 1; ///< 1-based node index of the leaf
};

inline Traversal classical_traverse(const DecisionConfig &config, const Bits &x_query) {
    require(x_query.size() == static_cast<std::size_t>(config.k()), "classical_traverse: query must have k bits");
    Bits bits;
    ConditionSet conditions;
    std::size_t node = 0;
    for (std::size_t l = 0; l <= config.depth(); ++l) {
        const int e = config.layers()[l][node];
        const auto bit = x_query[static_cast<std::size_t>(e - 1)];
        bits.push_back(bit);
        conditions.push_back({e, bit});
        node = (node << 1) | bit;
    }
    return Traversal{BitPath(std::move(bits)), std::move(conditions), node + 1};
}

/// Tolerance under which two label probabilities count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// argmax over {0, 1}; exact ties resolve to `tie_break`.
inline std::uint8_t argmax_label(const std::array<double, 2> &dist, std::uint8_t tie_break) {
    if (std::abs(dist[1] - dist[0]) <= kTieTolerance) {
        return tie_break;
    }
    return dist[1] > dist[0] ? 1 : 0;
}

struct Prediction {
    std::vector<std::array<double, 2>> label_probs;
    std::vector<double> sigma; ///< per-label standard deviation (0 for exact inputs)
    Bits labels;
    bool defined = true;
};

inline Prediction predict_from_profile(const LeafProfile &profile, const Bits &tie_break) {
    require(tie_break.size() == profile.label_marginals.size(), "tie_break must hold one value per label");
    Prediction out;
    out.defined = profile.defined;
    out.label_probs = profile.label_marginals;
    out.sigma.assign(out.label_probs.size(), 0.0);
    for (std::size_t j = 0; j < out.label_probs.size(); ++j) {
        out.labels.push_back(profile.defined ? argmax_label(out.label_probs[j], tie_break[j]) : tie_break[j]);
    }
    return out;
}

inline Prediction classical_predict(const JointDistribution &p, const DecisionConfig &config, const Bits &x_query,
                                    const Bits &tie_break) {
    const auto profiles = leaf_profiles(p, config);
    const auto traversal = classical_traverse(config, x_query);
    return predict_from_profile(profiles[traversal.leaf_index - 1], tie_break);
}

/// Weighted binary entropy in bits with 0 log 0 = 0.
inline double binary_entropy(const std::array<double, 2> &dist) {
    double s = 0.0;
    for (double q : dist) {
        if (q > 0.0) {
            s -= q * std::log2(q);
        }
    }
    return s;
}

} // namespace qtree
