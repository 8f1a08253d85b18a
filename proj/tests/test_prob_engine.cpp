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

#include <gtest/gtest.h>

#include <random>

#include "qtree/prob_engine.hpp"

using namespace qtree;

namespace {

std::vector<Sample> toy_rows() {
    return {{bits_from_string("1100000"), {0}},
            {bits_from_string("0110000"), {0}},
            {bits_from_string("0010000"), {1}},
            {bits_from_string("0000000"), {0}},
            {bits_from_string("1110000"), {1}}};
}

const DecisionConfig kToyTree(7, {{3}, {2, 2}});

JointDistribution random_joint(std::mt19937_64 &rng, int k, int m, double sparsity = 0.5) {
    std::vector<double> probs(pow2(static_cast<std::size_t>(k + m)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0;
    for (auto &v : probs) {
        v = u(rng) < sparsity ? 0.0 : u(rng);
        total += v;
    }
    if (total == 0.0) {
        probs[0] = total = 1.0;
    }
    for (auto &v : probs) {
        v /= total;
    }
    return JointDistribution(k, m, probs);
}

} // namespace

TEST(JointDistribution, Validation) {
    EXPECT_THROW(JointDistribution(1, 0, {0.5, 0.6}), ValidationError);
    EXPECT_THROW(JointDistribution(1, 0, {1.5, -0.5}), ValidationError);
    EXPECT_THROW(JointDistribution(1, 1, {1.0, 0.0}), ValidationError);
    EXPECT_NO_THROW(JointDistribution(1, 1, {0.25, 0.25, 0.25, 0.25}));
}

TEST(JointDistribution, IndexConvention) {
    const JointDistribution p(2, 1, {0, 0, 0, 0, 0, 1, 0, 0});
    EXPECT_EQ(p.index_of({1, 0}, {1}), 5u);
    EXPECT_EQ(p.feature_bit(5, 1), 1);
    EXPECT_EQ(p.feature_bit(5, 2), 0);
    EXPECT_EQ(p.label_bit(5, 1), 1);
}

TEST(FromDataset, ToyHistogram) {
    const auto rows = toy_rows();
    const auto p = distribution_from_dataset(rows);
    EXPECT_EQ(p.support().size(), 5u);
    for (const auto &r : rows) {
        EXPECT_NEAR(p[p.index_of(r.x, r.y)], 0.2, 1e-15);
    }
}

TEST(FromDataset, RepeatedAndTwoPoints) {
    const std::vector<Sample> same{{{1, 0}, {1}}, {{1, 0}, {1}}, {{1, 0}, {1}}};
    const auto p = distribution_from_dataset(same);
    EXPECT_EQ(p[p.index_of({1, 0}, {1})], 1.0);
    const std::vector<Sample> two{{{1, 0}, {1}}, {{0, 0}, {0}}};
    const auto q = distribution_from_dataset(two);
    EXPECT_DOUBLE_EQ(q[q.index_of({1, 0}, {1})], 0.5);
    EXPECT_DOUBLE_EQ(q[q.index_of({0, 0}, {0})], 0.5);
}

TEST(FromDataset, Errors) {
    EXPECT_THROW(distribution_from_dataset(std::vector<Sample>{}), ValidationError);
    const std::vector<Sample> ragged{{{1, 0}, {1}}, {{1}, {0}}};
    EXPECT_THROW(distribution_from_dataset(ragged), ValidationError);
}

TEST(MarginalLabels, Cases) {
    const auto toy = distribution_from_dataset(toy_rows());
    EXPECT_NEAR(marginal_labels(toy)[1], 0.4, 1e-15);
    const JointDistribution point(2, 1, {0, 0, 0, 1, 0, 0, 0, 0});
    EXPECT_EQ(marginal_labels(point)[1], 1.0);
    const JointDistribution uniform(2, 1, std::vector<double>(8, 0.125));
    EXPECT_DOUBLE_EQ(marginal_labels(uniform)[0], 0.5);
    EXPECT_DOUBLE_EQ(marginal_labels(uniform)[1], 0.5);
}

TEST(ConditionSet, FollowsTree) {
    EXPECT_TRUE(leaf_condition_set(kToyTree, BitPath()).empty());
    const auto cs = leaf_condition_set(kToyTree, BitPath::from_string("10"));
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(cs[0].feature, 3);
    EXPECT_EQ(cs[0].value, 1);
    EXPECT_EQ(cs[1].feature, 2);
    EXPECT_EQ(cs[1].value, 0);
    EXPECT_THROW(leaf_condition_set(kToyTree, BitPath::from_string("101")), ValidationError);
}

TEST(ConditionSet, PathMatchesNodeIndex) {
    const DecisionConfig e(4, {{2}, {1, 3}, {3, 4, 1, 4}});
    for (std::size_t nu = 1; nu <= 8; ++nu) {
        const auto path = BitPath::from_index(nu, 3);
        const auto cs = leaf_condition_set(e, path);
        Bits x(4, 0);
        for (const auto &c : cs) {
            x[static_cast<std::size_t>(c.feature - 1)] = c.value;
        }
        EXPECT_EQ(classical_traverse(e, x).leaf_index, nu);
    }
}

TEST(LeafProfiles, ToyTree) {
    const auto profiles = leaf_profiles(distribution_from_dataset(toy_rows()), kToyTree);
    ASSERT_EQ(profiles.size(), 4u);
    EXPECT_NEAR(profiles[3].reach_prob, 0.4, 1e-15);
    EXPECT_NEAR(profiles[3].label_marginals[0][1], 0.5, 1e-15);
    EXPECT_NEAR(profiles[2].reach_prob, 0.2, 1e-15);
    EXPECT_NEAR(profiles[2].label_marginals[0][1], 1.0, 1e-15);
    EXPECT_NEAR(profiles[1].reach_prob, 0.2, 1e-15);
    EXPECT_NEAR(profiles[0].reach_prob, 0.2, 1e-15);
    EXPECT_NEAR(profiles[0].label_marginals[0][1], 0.0, 1e-15);
}

TEST(LeafProfiles, UniformAndPointMass) {
    const JointDistribution uniform(3, 1, std::vector<double>(16, 1.0 / 16));
    for (const auto &pr : leaf_profiles(uniform, DecisionConfig(3, {{2}, {1, 3}}))) {
        EXPECT_DOUBLE_EQ(pr.reach_prob, 0.25);
    }
    std::vector<double> pm(16, 0.0);
    pm[11] = 1.0;
    const auto profiles = leaf_profiles(JointDistribution(3, 1, pm), DecisionConfig(3, {{2}, {1, 3}}));
    int reached = 0;
    for (const auto &pr : profiles) {
        reached += pr.reach_prob == 1.0;
        if (!pr.defined) {
            EXPECT_EQ(pr.label_marginals[0][0], 0.5);
        }
    }
    EXPECT_EQ(reached, 1);
}

TEST(LeafProfiles, Properties) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 4;
        const int m = 1 + trial % 2;
        const auto p = random_joint(rng, k, m);
        const DecisionConfig e(k, {{1 + trial % 4}, {1 + (trial + 1) % 4, 1 + (trial + 2) % 4}});
        if (!validate_decision_config(e)) {
            continue;
        }
        const auto profiles = leaf_profiles(p, e);
        double total = 0.0;
        for (const auto &pr : profiles) {
            total += pr.reach_prob;
            for (const auto &lm : pr.label_marginals) {
                EXPECT_NEAR(lm[0] + lm[1], 1.0, 1e-12);
            }
        }
        EXPECT_NEAR(total, 1.0, 1e-12);

        // Entropy never grows under the split.
        const auto labels = marginal_labels(p);
        for (int j = 1; j <= m; ++j) {
            double p1 = 0.0;
            for (std::size_t y = 0; y < labels.size(); ++y) {
                if ((y >> (m - j)) & 1u) {
                    p1 += labels[y];
                }
            }
            double weighted = 0.0;
            for (const auto &pr : profiles) {
                weighted += pr.reach_prob * binary_entropy(pr.label_marginals[static_cast<std::size_t>(j - 1)]);
            }
            EXPECT_LE(weighted, binary_entropy({1.0 - p1, p1}) + 1e-12);
        }

        // Direct recount over the rows that satisfy each condition set.
        for (std::size_t nu = 0; nu < profiles.size(); ++nu) {
            const auto cs = leaf_condition_set(e, BitPath::from_index(nu + 1, 2));
            double mass = 0.0;
            double ones = 0.0;
            for (std::size_t i = 0; i < p.probs().size(); ++i) {
                bool ok = true;
                for (const auto &c : cs) {
                    ok = ok && p.feature_bit(i, c.feature) == c.value;
                }
                if (ok) {
                    mass += p[i];
                    ones += p.label_bit(i, 1) ? p[i] : 0.0;
                }
            }
            EXPECT_NEAR(profiles[nu].reach_prob, mass, 1e-12);
            if (mass > 0.0) {
                EXPECT_NEAR(profiles[nu].label_marginals[0][1], ones / mass, 1e-12);
            }
        }
    }
}

TEST(Traverse, ToyQueries) {
    EXPECT_EQ(classical_traverse(kToyTree, bits_from_string("1110000")).path.to_string(), "11");
    EXPECT_EQ(classical_traverse(kToyTree, bits_from_string("0000000")).path.to_string(), "00");
}

TEST(Traverse, ConsistentWithConditions) {
    std::mt19937_64 rng(23);
    const DecisionConfig e(5, {{4}, {1, 2}, {2, 5, 3, 1}});
    for (int trial = 0; trial < 100; ++trial) {
        Bits x(5);
        for (auto &b : x) {
            b = static_cast<std::uint8_t>(rng() & 1u);
        }
        const auto t = classical_traverse(e, x);
        for (const auto &c : leaf_condition_set(e, t.path)) {
            EXPECT_EQ(x[static_cast<std::size_t>(c.feature - 1)], c.value);
        }
        EXPECT_EQ(t.leaf_index, node_index(t.path));
    }
}

TEST(ClassicalPredict, ToyRows) {
    const auto p = distribution_from_dataset(toy_rows());
    const auto row3 = classical_predict(p, kToyTree, bits_from_string("0010000"), {0});
    EXPECT_EQ(row3.labels[0], 1);
    EXPECT_NEAR(row3.label_probs[0][1], 1.0, 1e-15);
    EXPECT_EQ(classical_predict(p, kToyTree, bits_from_string("1110000"), {0}).labels[0], 0);
    EXPECT_EQ(classical_predict(p, kToyTree, bits_from_string("1110000"), {1}).labels[0], 1);
}

TEST(ClassicalPredict, PointMassAndUndefinedLeaf) {
    std::vector<double> pm(16, 0.0);
    pm[(5u << 1) | 1u] = 1.0;
    const JointDistribution p(3, 1, pm);
    const DecisionConfig e(3, {{1}, {3, 2}});
    const auto hit = classical_predict(p, e, {1, 0, 1}, {0});
    EXPECT_EQ(hit.labels[0], 1);
    EXPECT_EQ(hit.label_probs[0][1], 1.0);
    const auto miss = classical_predict(p, e, {0, 0, 0}, {1});
    EXPECT_FALSE(miss.defined);
    EXPECT_EQ(miss.label_probs[0][0], 0.5);
    EXPECT_EQ(miss.labels[0], 1);
}

TEST(MajorityLabels, TiesGoToZero) {
    EXPECT_EQ(majority_labels(distribution_from_dataset(toy_rows()))[0], 0);
    const JointDistribution even(1, 1, {0.25, 0.25, 0.25, 0.25});
    EXPECT_EQ(majority_labels(even)[0], 0);
}
