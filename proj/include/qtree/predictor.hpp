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
 * Label prediction from a tree circuit: presampled leaf estimates, query
 * circuits for uncertain queries, and on-demand sampling that only keeps
 * the leaves a query reaches.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qtree/circuit.hpp"
#include "qtree/common.hpp"
#include "qtree/estimator.hpp"
#include "qtree/prob_engine.hpp"
#include "qtree/statevector.hpp"
#include "qtree/tree_model.hpp"

namespace qtree {

inline constexpr double kQueryNormTolerance = 1e-12;

/// Finite-support distribution over k-bit queries.
class QueryDistribution {
  public:
    QueryDistribution(int k, std::vector<std::pair<Bits, double>> support) : k_(k) {
        require(k >= 1 && k <= 26, "QueryDistribution: k must lie in [1, 26]");
        std::map<Bits, double> merged;
        double total = 0.0;
        for (auto &[x, w] : support) {
            require(x.size() == static_cast<std::size_t>(k), "QueryDistribution: query of wrong width");
            for (auto b : x) {
                require(b <= 1, "QueryDistribution: query bits must be 0 or 1");
            }
            require(w > 0.0 && std::isfinite(w), "QueryDistribution: weights must be positive");
            merged[x] += w;
            total += w;
        }
        require(!merged.empty(), "QueryDistribution: empty support");
        require(std::abs(total - 1.0) <= kQueryNormTolerance,
                "QueryDistribution: weights must sum to 1 (got " + std::to_string(total) + ")");
        support_.assign(merged.begin(), merged.end());
    }

    static QueryDistribution point(const Bits &x) { return QueryDistribution(static_cast<int>(x.size()), {{x, 1.0}}); }

    int k() const { return k_; }
    const std::vector<std::pair<Bits, double>> &support() const { return support_; }

    std::vector<double> dense() const {
        std::vector<double> out(pow2(static_cast<std::size_t>(k_)), 0.0);
        for (const auto &[x, w] : support_) {
            out[bits_to_index(x)] = w;
        }
        return out;
    }

  private:
    int k_;
    std::vector<std::pair<Bits, double>> support_;
};

/// shots == 0 selects exact leaf profiles, otherwise the tree circuit is
/// sampled N times.
inline LeafEstimates presample_tree(const JointDistribution &p, const CompressedConfig &config, std::uint64_t shots,
                                    std::uint64_t seed) {
    require(p.k() == config.k(), "presample_tree: k mismatch between data and configuration");
    if (shots == 0) {
        return exact_estimates(leaf_profiles(p, expand(config)), config.depth());
    }
    return estimate(sample_shots(build_tree_circuit(p, config), shots, seed), config.depth(),
                    static_cast<std::size_t>(p.m()));
}

struct LabelPrediction {
    std::vector<double> p1;    ///< p(y_i = 1)
    std::vector<double> sigma; ///< propagated standard deviation of p1
    Bits labels;
    std::vector<std::size_t> leaves; ///< 0-based leaf indices that contributed
};

namespace detail {

inline Bits hard_labels(const std::vector<double> &p1, const Bits &tie_break) {
    require(tie_break.size() == p1.size(), "tie_break must hold one value per label");
    Bits out;
    for (std::size_t j = 0; j < p1.size(); ++j) {
        out.push_back(argmax_label({1.0 - p1[j], p1[j]}, tie_break[j]));
    }
    return out;
}

/// sum over leaves of reach * label with propagated sigma.
inline LabelPrediction combine(const std::vector<std::size_t> &leaves, const std::vector<double> &reach,
                               const std::vector<double> &reach_sigma, const std::vector<std::vector<double>> &label,
                               const std::vector<std::vector<double>> &label_sigma, std::size_t m,
                               const Bits &tie_break) {
    LabelPrediction out;
    out.leaves = leaves;
    for (std::size_t j = 0; j < m; ++j) {
        double value = 0.0;
        std::vector<double> lab, lab_sigma;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            value += reach[i] * label[i][j];
            lab.push_back(label[i][j]);
            lab_sigma.push_back(label_sigma[i][j]);
        }
        out.p1.push_back(std::clamp(value, 0.0, 1.0));
        out.sigma.push_back(propagate_prediction_std(reach, reach_sigma, lab, lab_sigma));
    }
    out.labels = hard_labels(out.p1, tie_break);
    return out;
}

} // namespace detail

/// Classical traversal to one leaf, then its stored estimates.
inline LabelPrediction predict_presampled(const LeafEstimates &est, const CompressedConfig &config, const Bits &x,
                                          const Bits &tie_break) {
    require(est.leaf_count() == pow2(config.depth() + 1), "predict_presampled: estimates do not match tree depth");
    const auto leaf = detail::traverse_bits(expand(config), x);
    LabelPrediction out;
    out.leaves = {leaf};
    out.p1 = est.label[leaf];
    out.sigma = est.label_sigma[leaf];
    out.labels = est.defined[leaf] ? detail::hard_labels(out.p1, tie_break) : tie_break;
    return out;
}

struct ReachEstimate {
    std::vector<double> reach; ///< over all 2^{d+1} leaves
    std::vector<double> sigma;
    std::uint64_t shots = 0;
};

/// Leaf distribution reached by the query distribution, from the query circuit.
inline ReachEstimate query_reach(const QueryDistribution &pq, const CompressedConfig &config, std::uint64_t shots,
                                 std::uint64_t seed) {
    require(pq.k() == config.k(), "query: k mismatch between query and configuration");
    const auto circuit = build_query_circuit(pq.dense(), config);
    ReachEstimate out;
    out.shots = shots;
    if (shots == 0) {
        out.reach = exact_measurement_distribution(circuit);
        out.sigma.assign(out.reach.size(), 0.0);
        return out;
    }
    const auto result = sample_shots(circuit, shots, seed);
    for (auto n : result.counts) {
        const auto b = binomial_interval(n, shots);
        out.reach.push_back(b.estimate);
        out.sigma.push_back(b.sigma);
    }
    return out;
}

inline LabelPrediction predict_query_distribution(const QueryDistribution &pq, const CompressedConfig &config,
                                                  const LeafEstimates &est, std::uint64_t shots, std::uint64_t seed,
                                                  const Bits &tie_break) {
    require(est.leaf_count() == pow2(config.depth() + 1), "predict_query_distribution: estimates do not match tree");
    const auto r = query_reach(pq, config, shots, seed);
    std::vector<std::size_t> leaves;
    std::vector<double> reach, reach_sigma;
    std::vector<std::vector<double>> label, label_sigma;
    for (std::size_t leaf = 0; leaf < r.reach.size(); ++leaf) {
        if (r.reach[leaf] > 0.0) {
            leaves.push_back(leaf);
            reach.push_back(r.reach[leaf]);
            reach_sigma.push_back(r.sigma[leaf]);
            label.push_back(est.label[leaf]);
            label_sigma.push_back(est.label_sigma[leaf]);
        }
    }
    return detail::combine(leaves, reach, reach_sigma, label, label_sigma, est.m, tie_break);
}

/// Everything on-demand prediction keeps: one entry per reached leaf.
struct OnDemandRecord {
    std::size_t depth = 0;
    std::size_t m = 0;
    std::vector<std::size_t> leaves; ///< Λ, 0-based leaf indices
    std::vector<double> reach;       ///< P_q
    std::vector<double> reach_sigma;
    std::vector<std::vector<double>> label; ///< P_y, p(y_i = 1 | leaf)
    std::vector<std::vector<double>> label_sigma;
    std::vector<std::uint64_t> label_counts; ///< tree-circuit shots that landed in each leaf (0 in exact mode)

    std::size_t size() const { return leaves.size(); }
};

/// Four steps: fix p_q; sample the query circuit to find Λ and P_q; sample
/// the tree circuit N times keeping only outcomes in Λ (the others still use
/// up shots); combine over Λ. shots == 0 uses exact distributions, with the
/// label part read from the classical leaf profiles.
inline std::pair<LabelPrediction, OnDemandRecord> on_demand_predict(const QueryDistribution &pq,
                                                                    const CompressedConfig &config,
                                                                    const JointDistribution &p, std::uint64_t shots,
                                                                    std::uint64_t seed, const Bits &tie_break) {
    require(p.k() == config.k(), "on_demand_predict: k mismatch between data and configuration");
    const std::size_t m = static_cast<std::size_t>(p.m());
    OnDemandRecord rec;
    rec.depth = config.depth();
    rec.m = m;

    const auto r = query_reach(pq, config, shots, derive_seed(seed, 1));
    std::vector<std::int64_t> slot(r.reach.size(), -1);
    for (std::size_t leaf = 0; leaf < r.reach.size(); ++leaf) {
        if (r.reach[leaf] > 0.0) {
            slot[leaf] = static_cast<std::int64_t>(rec.leaves.size());
            rec.leaves.push_back(leaf);
            rec.reach.push_back(r.reach[leaf]);
            rec.reach_sigma.push_back(r.sigma[leaf]);
        }
    }
    require(!rec.leaves.empty(), "on_demand_predict: no leaf reached");
    rec.label.assign(rec.size(), std::vector<double>(m, 0.5));
    rec.label_sigma.assign(rec.size(), std::vector<double>(m, 0.0));
    rec.label_counts.assign(rec.size(), 0);

    if (shots == 0) {
        const auto profiles = leaf_profiles(p, expand(config));
        for (std::size_t i = 0; i < rec.size(); ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                rec.label[i][j] = profiles[rec.leaves[i]].label_marginals[j][1];
            }
        }
    } else {
        const auto result = sample_shots(build_tree_circuit(p, config), shots, derive_seed(seed, 2));
        std::vector<std::vector<std::uint64_t>> ones(rec.size(), std::vector<std::uint64_t>(m, 0));
        for (std::size_t outcome = 0; outcome < result.counts.size(); ++outcome) {
            const auto n = result.counts[outcome];
            const auto s = slot[outcome >> m];
            if (n == 0 || s < 0) {
                continue;
            }
            const auto i = static_cast<std::size_t>(s);
            rec.label_counts[i] += n;
            for (std::size_t j = 0; j < m; ++j) {
                if ((outcome >> (m - 1 - j)) & 1U) {
                    ones[i][j] += n;
                }
            }
        }
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (rec.label_counts[i] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                const auto ri = ratio_interval(ones[i][j], rec.label_counts[i], shots);
                rec.label[i][j] = ri.estimate;
                rec.label_sigma[i][j] = ri.sigma;
            }
        }
    }
    auto prediction = detail::combine(rec.leaves, rec.reach, rec.reach_sigma, rec.label, rec.label_sigma, m, tie_break);
    return {std::move(prediction), std::move(rec)};
}

/// Index into `reach` of the most likely leaf; ties go to the first.
inline std::size_t mitigate_leaf_selection(const std::vector<double> &reach) {
    require(!reach.empty(), "mitigate_leaf_selection: no leaves");
    std::size_t best = 0;
    for (std::size_t i = 1; i < reach.size(); ++i) {
        if (reach[i] > reach[best]) {
            best = i;
        }
    }
    return best;
}

/// Keeps only the dominant leaf of a record, with P_q set to 1.
inline OnDemandRecord mitigate_leaf_selection(const OnDemandRecord &rec) {
    const auto i = mitigate_leaf_selection(rec.reach);
    OnDemandRecord out = rec;
    out.leaves = {rec.leaves[i]};
    out.reach = {1.0};
    out.reach_sigma = {0.0};
    out.label = {rec.label[i]};
    out.label_sigma = {rec.label_sigma[i]};
    out.label_counts = {rec.label_counts[i]};
    return out;
}

inline LabelPrediction predict_from_record(const OnDemandRecord &rec, const Bits &tie_break) {
    return detail::combine(rec.leaves, rec.reach, rec.reach_sigma, rec.label, rec.label_sigma, rec.m, tie_break);
}

} // namespace qtree
