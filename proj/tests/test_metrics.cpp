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

#include "qtree/metrics.hpp"

using namespace qtree;

namespace {

const std::vector<std::uint8_t> kToyTruth{0, 0, 1, 0, 1};

void expect_near(const std::optional<double> &v, double expected, double tol = 0.005) {
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, expected, tol);
}

} // namespace

TEST(Metrics, Perfect) {
    const auto r = compute_metrics(kToyTruth, kToyTruth);
    for (const auto *v : {&r.bac, &r.acc, &r.pre[0], &r.pre[1], &r.rec[0], &r.rec[1], &r.f1[0], &r.f1[1]}) {
        expect_near(*v, 1.0, 0.0);
    }
}

TEST(Metrics, ToyTieToOne) {
    // leaf "11" (rows 1 and 5) predicted 1
    const auto r = compute_metrics(kToyTruth, {1, 0, 1, 0, 1});
    expect_near(r.bac, 0.83);
    expect_near(r.acc, 0.80);
    expect_near(r.pre[0], 1.00);
    expect_near(r.pre[1], 0.67);
    expect_near(r.rec[0], 0.67);
    expect_near(r.rec[1], 1.00);
    expect_near(r.f1[0], 0.80);
    expect_near(r.f1[1], 0.80);
}

TEST(Metrics, ToyTieToZero) {
    const auto r = compute_metrics(kToyTruth, {0, 0, 1, 0, 0});
    expect_near(r.bac, 0.75);
    expect_near(r.acc, 0.80);
    expect_near(r.pre[0], 0.75);
    expect_near(r.pre[1], 1.00);
    expect_near(r.rec[0], 1.00);
    expect_near(r.rec[1], 0.50);
    expect_near(r.f1[0], 0.86);
    // harmonic mean of 1.0 and 0.5
    expect_near(r.f1[1], 2.0 / 3.0, 1e-12);
}

TEST(Metrics, UndefinedEntries) {
    const auto r = compute_metrics({0, 0, 0}, {0, 0, 0});
    EXPECT_FALSE(r.rec[1].has_value());
    EXPECT_FALSE(r.pre[1].has_value());
    EXPECT_FALSE(r.f1[1].has_value());
    EXPECT_FALSE(r.bac.has_value());
    expect_near(r.acc, 1.0, 0.0);
    const auto never = compute_metrics({0, 1, 1}, {0, 0, 0});
    EXPECT_FALSE(never.pre[1].has_value());
    expect_near(never.rec[1], 0.0, 0.0);
    EXPECT_FALSE(never.f1[1].has_value());
    expect_near(never.bac, 0.5, 1e-12);
}

TEST(Metrics, Errors) {
    EXPECT_THROW(compute_metrics({}, {}), ValidationError);
    EXPECT_THROW(compute_metrics({0, 1}, {0}), ValidationError);
    EXPECT_THROW(compute_metrics({0, 2}, {0, 1}), ValidationError);
}

TEST(Metrics, PolaritySymmetryAndRange) {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> t(1 + trial % 17), p(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = coin(rng);
            p[i] = coin(rng);
        }
        const auto r = compute_metrics(t, p);
        std::vector<std::uint8_t> tf(t.size()), pf(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            tf[i] = 1 - t[i];
            pf[i] = 1 - p[i];
        }
        const auto f = compute_metrics(tf, pf);
        ASSERT_EQ(r.bac.has_value(), f.bac.has_value());
        if (r.bac) {
            EXPECT_NEAR(*r.bac, *f.bac, 1e-15);
        }
        EXPECT_NEAR(*r.acc, *f.acc, 1e-15);
        for (int b = 0; b <= 1; ++b) {
            EXPECT_EQ(r.pre[b], f.pre[1 - b]);
            EXPECT_EQ(r.rec[b], f.rec[1 - b]);
            for (const auto *v : {&r.pre[b], &r.rec[b], &r.f1[b]}) {
                if (*v) {
                    EXPECT_GE(**v, 0.0);
                    EXPECT_LE(**v, 1.0);
                }
            }
        }
        const auto c = r.confusion;
        EXPECT_EQ(c.tp(1), c.tn(0));
        EXPECT_EQ(c.fp(1), c.fn(0));
    }
}
