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
 * Ensembles of equal-depth trees selected by an ancilla register, bagging
 * induction and weighted prediction.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qtree/circuit.hpp"
#include "qtree/common.hpp"
#include "qtree/dataset.hpp"
#include "qtree/estimator.hpp"
#include "qtree/induction.hpp"
#include "qtree/predictor.hpp"
#include "qtree/statevector.hpp"

namespace qtree {

struct ForestConfig {
    std::vector<CompressedConfig> trees;
    std::vector<double> weights;

    std::size_t size() const { return trees.size(); }
    std::size_t ancillas() const { return ancilla_count(trees.size()); }
    std::size_t depth() const { return trees.front().depth(); }
    int k() const { return trees.front().k(); }

    void validate() const {
        const std::size_t f = trees.size();
        require(f >= 2 && (f & (f - 1)) == 0, "forest: tree count must be a power of two >= 2 (got " + std::to_string(f) + ")");
        require(weights.size() == f, "forest: one weight per tree required");
        double total = 0.0;
        for (double w : weights) {
            require(w >= 0.0 && std::isfinite(w), "forest: weights must be non-negative");
            total += w;
        }
        require(std::abs(total - 1.0) <= 1e-12, "forest: weights must sum to 1");
        for (const auto &t : trees) {
            require(t.depth() == depth(), "forest: all trees must share the same depth");
            require(t.k() == k(), "forest: all trees must share k");
        }
    }
};

/// 1-based tree index addressed by the ancilla bits (first bit most significant).
inline std::size_t tree_selector(const Bits &ancilla, std::size_t expected_width) {
    require(ancilla.size() == expected_width, "tree_selector: expected " + std::to_string(expected_width) + " ancilla bits");
    return bits_to_index(ancilla) + 1;
}

inline Circuit build_forest_circuit(const ForestConfig &fc, const JointDistribution &p) {
    fc.validate();
    return build_forest_circuit(fc.trees, fc.weights, p);
}

/// Simulated distribution over (leaf bits, labels, ancillas).
inline std::vector<double> forest_exact_distribution(const ForestConfig &fc, const JointDistribution &p) {
    return exact_measurement_distribution(build_forest_circuit(fc, p));
}

/// Ancilla-register marginal of a forest shot table: estimated tree weights.
inline std::vector<Interval> estimate_tree_weights(const ShotResult &shots, std::size_t tree_count) {
    const std::size_t fa = ancilla_count(tree_count);
    require(shots.width >= fa && shots.shots >= 1, "estimate_tree_weights: shot table too narrow or empty");
    std::vector<std::uint64_t> n(tree_count, 0);
    for (std::size_t s = 0; s < shots.counts.size(); ++s) {
        n[s & (pow2(fa) - 1)] += shots.counts[s];
    }
    std::vector<Interval> out;
    for (auto c : n) {
        out.push_back(binomial_interval(c, shots.shots));
    }
    return out;
}

/// Per-tree leaf estimates from a forest shot table, conditioned on the
/// ancilla value of each tree.
inline std::vector<LeafEstimates> forest_leaf_estimates(const ShotResult &shots, std::size_t tree_count,
                                                        std::size_t depth, std::size_t m) {
    const std::size_t fa = ancilla_count(tree_count);
    require(shots.width == depth + 1 + m + fa, "forest_leaf_estimates: bit strings must have length d+1+m+f'");
    std::vector<ShotResult> per_tree(tree_count);
    for (auto &t : per_tree) {
        t.width = depth + 1 + m;
        t.counts.assign(pow2(t.width), 0);
        t.seed = shots.seed;
    }
    for (std::size_t s = 0; s < shots.counts.size(); ++s) {
        auto &t = per_tree[s & (pow2(fa) - 1)];
        t.counts[s >> fa] += shots.counts[s];
        t.shots += shots.counts[s];
    }
    std::vector<LeafEstimates> out;
    for (std::size_t a = 0; a < tree_count; ++a) {
        require(per_tree[a].shots >= 1, "forest_leaf_estimates: tree " + std::to_string(a + 1) + " received no shots");
        out.push_back(estimate(per_tree[a], depth, m));
    }
    return out;
}

/// Same-size sample with replacement.
inline Dataset bootstrap_sample(const Dataset &data, std::uint64_t seed) {
    require(!data.rows.empty(), "bootstrap_sample: empty data");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, data.rows.size() - 1);
    Dataset out{data.name + "/bootstrap", data.provenance, data.k, data.m, {}};
    out.rows.reserve(data.rows.size());
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        out.rows.push_back(data.rows[pick(rng)]);
    }
    return out;
}

struct ForestResult {
    ForestConfig forest;
    std::vector<double> training_bac; ///< per tree, on the full training data
};

/// Bagging: each tree is grown on its own bootstrap sample; weights are
/// proportional to training balanced accuracy (uniform if all vanish).
inline ForestResult induce_forest(const Dataset &train, std::size_t depth, std::size_t tree_count,
                                  const GaHyperparams &theta, const FitnessOptions &options, std::uint64_t seed) {
    require(tree_count >= 2 && (tree_count & (tree_count - 1)) == 0,
            "induce_forest: tree count must be a power of two >= 2");
    const FitnessEvaluator full(train, theta.f_ent, theta.f_bac, options);
    ForestResult out;
    for (std::size_t t = 0; t < tree_count; ++t) {
        const auto sample = bootstrap_sample(train, derive_seed(seed, t, 0));
        FitnessOptions opts = options;
        if (!opts.tie_break) {
            opts.tie_break = full.tie_break();
        }
        const FitnessEvaluator ev(sample, theta.f_ent, theta.f_bac, opts);
        const auto grown = genetic_grow(ev, depth, theta, derive_seed(seed, t, 1));
        out.forest.trees.push_back(grown.best);
        out.training_bac.push_back(full.evaluate(grown.best, derive_seed(seed, t, 2)).balanced_accuracy);
    }
    double total = 0.0;
    for (double b : out.training_bac) {
        total += b;
    }
    for (double b : out.training_bac) {
        out.forest.weights.push_back(total > 0.0 ? b / total : 1.0 / static_cast<double>(tree_count));
    }
    out.forest.validate();
    return out;
}

/// Weighted average of the member predictions at the query's leaves.
inline LabelPrediction forest_predict(const ForestConfig &fc, const std::vector<LeafEstimates> &estimates, const Bits &x,
                                      const Bits &tie_break) {
    fc.validate();
    require(estimates.size() == fc.size(), "forest_predict: one set of leaf estimates per tree required");
    const std::size_t m = estimates.front().m;
    LabelPrediction out;
    out.p1.assign(m, 0.0);
    std::vector<double> var(m, 0.0);
    for (std::size_t t = 0; t < fc.size(); ++t) {
        const auto member = predict_presampled(estimates[t], fc.trees[t], x, tie_break);
        out.leaves.push_back(member.leaves.front());
        for (std::size_t j = 0; j < m; ++j) {
            out.p1[j] += fc.weights[t] * member.p1[j];
            var[j] += fc.weights[t] * fc.weights[t] * member.sigma[j] * member.sigma[j];
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        out.p1[j] = std::clamp(out.p1[j], 0.0, 1.0);
        out.sigma.push_back(std::sqrt(var[j]));
    }
    out.labels = detail::hard_labels(out.p1, tie_break);
    return out;
}

} // namespace qtree
