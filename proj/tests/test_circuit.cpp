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

#include "qtree/circuit.hpp"
#include "qtree/statevector.hpp"

using namespace qtree;

namespace {

// Basis-state action of a gate, computed from bit strings rather than masks.
std::size_t permute_basis(const Gate &g, std::size_t n, std::size_t index) {
    Bits b = index_to_bits(index, n);
    for (auto c : g.controls) {
        if (!b[c]) {
            return index;
        }
    }
    switch (g.kind) {
    case GateKind::Not:
    case GateKind::Cnot:
    case GateKind::Mcnot:
        b[g.targets[0]] ^= 1u;
        break;
    case GateKind::Swap:
    case GateKind::Mcswap:
        std::swap(b[g.targets[0]], b[g.targets[1]]);
        break;
    case GateKind::Identity:
        break;
    }
    return bits_to_index(b);
}

std::vector<std::size_t> circuit_permutation(const std::vector<Gate> &gates, std::size_t n) {
    std::vector<std::size_t> perm(pow2(n));
    for (std::size_t i = 0; i < perm.size(); ++i) {
        std::size_t s = i;
        for (const auto &g : gates) {
            s = permute_basis(g, n, s);
        }
        perm[i] = s;
    }
    return perm;
}

CompressedConfig random_compressed(std::mt19937_64 &rng, int k, std::size_t d) {
    std::vector<std::vector<int>> layers(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
        std::uniform_int_distribution<int> pick(static_cast<int>(i) + 1, k);
        for (std::size_t j = 0; j < pow2(i); ++j) {
            layers[i].push_back(pick(rng));
        }
    }
    return CompressedConfig(k, layers);
}

std::vector<Sample> toy_rows() {
    return {{bits_from_string("1100000"), {0}},
            {bits_from_string("0110000"), {0}},
            {bits_from_string("0010000"), {1}},
            {bits_from_string("0000000"), {0}},
            {bits_from_string("1110000"), {1}}};
}

JointDistribution random_joint(std::mt19937_64 &rng, int k, int m) {
    std::vector<double> probs(pow2(static_cast<std::size_t>(k + m)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0;
    for (auto &v : probs) {
        v = u(rng) < 0.4 ? 0.0 : u(rng);
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

TEST(Gate, Normalization) {
    EXPECT_EQ(Gate::swap(1, 1).kind, GateKind::Identity);
    EXPECT_EQ(Gate::mcswap(2, 2, {0}).kind, GateKind::Identity);
    EXPECT_EQ(Gate::mcswap(1, 2, {}).kind, GateKind::Swap);
    EXPECT_EQ(Gate::mcnot(1, {0}).kind, GateKind::Cnot);
    EXPECT_THROW(Gate::mcswap(1, 2, {1}), ValidationError);
    EXPECT_THROW(Gate::mcnot(1, {1, 0}), ValidationError);
    EXPECT_THROW(Gate::cnot(1, 1), ValidationError);
}

TEST(StructureEncoding, SingleRootSwap) {
    const auto gates = build_structure_encoding(CompressedConfig(2, {{2}}), 2);
    ASSERT_EQ(gates.size(), 1u);
    EXPECT_EQ(gates[0], Gate::swap(0, 1));
}

TEST(StructureEncoding, IdentitySwapsEmitNothing) {
    EXPECT_TRUE(build_structure_encoding(CompressedConfig(3, {{1}, {2, 2}}), 3).empty());
    EXPECT_TRUE(structure_gates(CompressedConfig(3, {{1}, {2, 2}}), 3).empty());
}

TEST(StructureEncoding, ToyTreeReducesToOneSwap) {
    const CompressedConfig c(7, {{3}, {2, 2}});
    const auto gates = build_structure_encoding(c, 8);
    ASSERT_EQ(gates.size(), 1u);
    EXPECT_EQ(gates[0], Gate::swap(0, 2));
}

TEST(StructureEncoding, DepthOneGateListByHand) {
    // Node 1 of layer 1 (open control on qubit 0) swaps qubits 1 and 2,
    // node 2 (closed control) swaps qubits 1 and 3.
    const CompressedConfig c(4, {{2}, {3, 4}});
    const std::vector<Gate> expected{Gate::swap(0, 1), Gate::x(0), Gate::mcswap(1, 2, {0}), Gate::x(0),
                                     Gate::mcswap(1, 3, {0})};
    EXPECT_EQ(build_structure_encoding(c, 4), expected);
}

TEST(StructureEncoding, RejectsSmallRegister) {
    EXPECT_THROW(build_structure_encoding(CompressedConfig(4, {{4}}), 3), ValidationError);
}

TEST(StructureEncoding, RoutesEachBasisStateLikeTheTree) {
    // Measuring qubits 0..d after the structure gates must reproduce the
    // decision path read from the expanded tree for every input x.
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = std::uniform_int_distribution<int>(2, 6)(rng);
        const auto d = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(std::min(k - 1, 3)))(rng);
        const auto c = random_compressed(rng, k, d);
        const auto e = expand(c);
        const auto perm = circuit_permutation(build_structure_encoding(c, static_cast<std::size_t>(k)),
                                              static_cast<std::size_t>(k));
        for (std::size_t x = 0; x < pow2(static_cast<std::size_t>(k)); ++x) {
            const auto path = classical_traverse(e, index_to_bits(x, static_cast<std::size_t>(k))).path;
            EXPECT_EQ(perm[x] >> (static_cast<std::size_t>(k) - d - 1), bits_to_index(path.bits()));
        }
    }
}

TEST(Peephole, PreservesOperator) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto c = random_compressed(rng, 5, trial % 4 == 0 ? 3 : 2);
        const auto raw = structure_gates(c, 5);
        const auto cleaned = cancel_not_pairs(raw);
        EXPECT_LE(cleaned.size(), raw.size());
        EXPECT_EQ(circuit_permutation(raw, 5), circuit_permutation(cleaned, 5));
    }
}

TEST(Peephole, CancelsOnlyUntouchedPairs) {
    const std::vector<Gate> gates{Gate::x(0), Gate::x(0), Gate::x(1), Gate::cnot(2, 1), Gate::x(1), Gate::identity()};
    const std::vector<Gate> expected{Gate::x(1), Gate::cnot(2, 1), Gate::x(1)};
    EXPECT_EQ(cancel_not_pairs(gates), expected);
    const std::vector<Gate> unrelated{Gate::x(0), Gate::cnot(2, 1), Gate::x(0)};
    EXPECT_EQ(cancel_not_pairs(unrelated), std::vector<Gate>{Gate::cnot(2, 1)});
}

TEST(DecomposeSwap, PlainSwapIsThreeCnots) {
    const auto parts = decompose_mcswap(Gate::swap(0, 1));
    ASSERT_EQ(parts.size(), 3u);
    for (const auto &g : parts) {
        EXPECT_EQ(g.kind, GateKind::Cnot);
    }
    EXPECT_EQ(circuit_permutation(parts, 2), circuit_permutation({Gate::swap(0, 1)}, 2));
}

TEST(DecomposeSwap, ControlledSwapOnEightStates) {
    const Gate cswap = Gate::mcswap(1, 2, {0});
    EXPECT_EQ(circuit_permutation(decompose_mcswap(cswap), 3), circuit_permutation({cswap}, 3));
}

TEST(DecomposeSwap, ShapeAndExhaustiveUpToThreeControls) {
    for (std::size_t v = 0; v <= 3; ++v) {
        const std::size_t n = v + 2;
        std::vector<Qubit> controls;
        for (std::size_t q = 2; q < n; ++q) {
            controls.push_back(q);
        }
        const Gate g = Gate::mcswap(1, 0, controls);
        const auto parts = decompose_mcswap(g);
        ASSERT_EQ(parts.size(), 3u);
        EXPECT_EQ(parts[0].kind, GateKind::Cnot);
        EXPECT_EQ(parts[2].kind, GateKind::Cnot);
        EXPECT_EQ(parts[1].controls.size(), v + 1);
        EXPECT_EQ(circuit_permutation(parts, n), circuit_permutation({g}, n));
    }
    EXPECT_THROW(decompose_mcswap(Gate::x(0)), ValidationError);
}

TEST(TreeCircuit, ToyLayout) {
    const auto p = distribution_from_dataset(toy_rows());
    const auto circ = build_tree_circuit(p, CompressedConfig(7, {{3}, {2, 2}}));
    EXPECT_EQ(circ.n_qubits, 8u);
    EXPECT_EQ(circ.measured, (std::vector<Qubit>{0, 1, 7}));
    EXPECT_EQ(circ.gates, std::vector<Gate>{Gate::swap(0, 2)});
}

TEST(TreeCircuit, FullDepthMeasuresAllFeatures) {
    const JointDistribution p(3, 1, std::vector<double>(16, 1.0 / 16));
    const auto circ = build_tree_circuit(p, CompressedConfig(3, {{2}, {2, 3}, {3, 3, 3, 3}}));
    EXPECT_EQ(circ.measured, (std::vector<Qubit>{0, 1, 2, 3}));
}

TEST(TreeCircuit, GateCountWithinStructureBound) {
    std::mt19937_64 rng(37);
    for (std::size_t d = 0; d <= 4; ++d) {
        const auto c = random_compressed(rng, 10, d);
        const auto gates = build_structure_encoding(c, 10);
        std::size_t swaps = 0;
        std::size_t nots = 0;
        for (const auto &g : gates) {
            swaps += g.kind == GateKind::Swap || g.kind == GateKind::Mcswap;
            nots += g.kind == GateKind::Not;
        }
        EXPECT_LE(swaps, pow2(d + 1) - 1);
        EXPECT_LE(nots, 2 * d * pow2(d));
    }
}

TEST(QueryCircuit, PointMassUsesNotGates) {
    const CompressedConfig c(7, {{3}, {2, 2}});
    std::vector<double> q(pow2(7), 0.0);
    q[bits_to_index(bits_from_string("1110000"))] = 1.0;
    const auto circ = build_query_circuit(q, c);
    EXPECT_TRUE(circ.state_prep.empty());
    const std::vector<Gate> expected{Gate::x(0), Gate::x(1), Gate::x(2), Gate::swap(0, 2)};
    EXPECT_EQ(circ.gates, expected);
    const auto dist = exact_measurement_distribution(circ);
    EXPECT_DOUBLE_EQ(dist[3], 1.0);
}

TEST(QueryCircuit, UniformStaysUniform) {
    const CompressedConfig c(3, {{3}, {3, 2}, {3, 3, 3, 3}});
    const auto dist = exact_measurement_distribution(build_query_circuit(std::vector<double>(8, 0.125), c));
    for (double v : dist) {
        EXPECT_NEAR(v, 0.125, 1e-15);
    }
}

TEST(QueryCircuit, FeatureMarginalMatchesTreeCircuit) {
    std::mt19937_64 rng(41);
    const auto p = random_joint(rng, 4, 1);
    const CompressedConfig c(4, {{2}, {4, 3}});
    const auto tree = exact_measurement_distribution(build_tree_circuit(p, c));
    const auto query = exact_measurement_distribution(build_query_circuit(p.feature_marginal(), c));
    for (std::size_t leaf = 0; leaf < 4; ++leaf) {
        EXPECT_NEAR(query[leaf], tree[2 * leaf] + tree[2 * leaf + 1], 1e-12);
    }
}

TEST(QueryCircuit, RejectsUnnormalized) {
    EXPECT_THROW(build_query_circuit(std::vector<double>(8, 0.2), CompressedConfig(3, {{1}})), ValidationError);
}

TEST(ForestCircuit, AncillaCountAndErrors) {
    const auto p = distribution_from_dataset(toy_rows());
    const CompressedConfig a(7, {{3}, {2, 2}});
    const CompressedConfig b(7, {{1}, {4, 5}});
    std::vector<CompressedConfig> four{a, b, a, b};
    const auto circ = build_forest_circuit(four, {0.25, 0.25, 0.25, 0.25}, p);
    EXPECT_EQ(circ.n_qubits, 10u);
    EXPECT_EQ(circ.measured, (std::vector<Qubit>{0, 1, 7, 8, 9}));
    std::vector<CompressedConfig> three{a, b, a};
    EXPECT_THROW(build_forest_circuit(three, {0.3, 0.3, 0.4}, p), ValidationError);
    EXPECT_THROW(build_forest_circuit({a}, {1.0}, p), ValidationError);
}

TEST(ForestCircuit, IdenticalTreesGiveHalfPerAncilla) {
    const auto p = distribution_from_dataset(toy_rows());
    const CompressedConfig a(7, {{3}, {2, 2}});
    const auto single = exact_measurement_distribution(build_tree_circuit(p, a));
    const auto forest = exact_measurement_distribution(build_forest_circuit({a, a}, {0.5, 0.5}, p));
    for (std::size_t s = 0; s < single.size(); ++s) {
        EXPECT_NEAR(forest[2 * s], 0.5 * single[s], 1e-15);
        EXPECT_NEAR(forest[2 * s + 1], 0.5 * single[s], 1e-15);
    }
}

TEST(ForestCircuit, FactorizesPerTree) {
    const auto p = distribution_from_dataset(toy_rows());
    const std::vector<CompressedConfig> trees{CompressedConfig(7, {{3}, {2, 2}}), CompressedConfig(7, {{1}, {4, 3}})};
    const std::vector<double> w{0.3, 0.7};
    const auto forest = exact_measurement_distribution(build_forest_circuit(trees, w, p));
    for (std::size_t t = 0; t < 2; ++t) {
        const auto joint = leaf_label_joint(p, expand(trees[t]));
        for (std::size_t s = 0; s < joint.size(); ++s) {
            EXPECT_NEAR(forest[2 * s + t], w[t] * joint[s], 1e-12);
        }
    }
}

TEST(ReducedCircuit, ToyMatchesFull) {
    const auto p = distribution_from_dataset(toy_rows());
    const CompressedConfig c(7, {{3}, {2, 2}});
    const auto reduced = reduce_tree_circuit(p, c);
    EXPECT_EQ(reduced.n_qubits, 3u);
    const auto a = exact_measurement_distribution(build_tree_circuit(p, c));
    const auto b = exact_measurement_distribution(reduced);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        EXPECT_NEAR(a[s], b[s], 1e-15);
    }
}

TEST(ReducedCircuit, RandomConfigsMatchFull) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = std::uniform_int_distribution<int>(2, 5)(rng);
        const int m = std::uniform_int_distribution<int>(1, 2)(rng);
        const auto d = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(std::min(k - 1, 2)))(rng);
        const auto p = random_joint(rng, k, m);
        const auto c = random_compressed(rng, k, d);
        const auto reduced = reduce_tree_circuit(p, c);
        EXPECT_EQ(reduced.n_qubits, d + 1 + static_cast<std::size_t>(m));
        const auto a = exact_measurement_distribution(build_tree_circuit(p, c));
        const auto b = exact_measurement_distribution(reduced);
        for (std::size_t s = 0; s < a.size(); ++s) {
            EXPECT_NEAR(a[s], b[s], 1e-12);
        }
    }
}

TEST(ReducedCircuit, FullDepthOnlyReorders) {
    std::mt19937_64 rng(47);
    const auto p = random_joint(rng, 3, 1);
    const CompressedConfig c(3, {{2}, {3, 2}, {3, 3, 3, 3}});
    const auto reduced = reduce_tree_circuit(p, c);
    EXPECT_EQ(reduced.n_qubits, 4u);
    std::vector<double> a = reduced.state_prep;
    std::vector<double> b = p.probs();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i], b[i], 1e-15);
    }
}

TEST(GateCount, Rules) {
    const auto swap = gate_count_report(std::vector<Gate>{Gate::swap(0, 1)});
    EXPECT_EQ(swap.by_kind.at("SWAP"), 1u);
    EXPECT_EQ(swap.by_kind.size(), 1u);
    EXPECT_EQ(swap.two_qubit_estimate, 3u);
    EXPECT_EQ(gate_count_report(std::vector<Gate>{Gate::mcnot(3, {0, 1, 2})}).two_qubit_estimate, 4u);
    EXPECT_EQ(gate_count_report(std::vector<Gate>{Gate::mcnot(4, {0, 1, 2, 3})}).two_qubit_estimate, 12u);
    EXPECT_EQ(gate_count_report(std::vector<Gate>{Gate::x(0), Gate::cnot(1, 0)}).two_qubit_estimate, 1u);
}

TEST(GateCount, HandCountDepthTwo) {
    // k=5: root SWAP(0,4); layer 1 node 1 identity, node 2 CSWAP(1,3);
    // layer 2 node 3 identity, the other three MCSWAPs with two controls.
    const CompressedConfig c(5, {{5}, {2, 4}, {4, 5, 3, 5}});
    const auto report = gate_count_report(build_structure_encoding(c, 5));
    EXPECT_EQ(report.by_kind.at("SWAP"), 1u);
    EXPECT_EQ(report.by_kind.at("MCSWAP"), 4u);
    // SWAP: 3. CSWAP: 2 + Toffoli 5 = 7. Each 2-control MCSWAP: 2 + (8*3-20) = 6.
    std::size_t nots = 0;
    for (const auto &g : build_structure_encoding(c, 5)) {
        nots += g.kind == GateKind::Not;
    }
    EXPECT_EQ(report.by_kind.count("NOT") ? report.by_kind.at("NOT") : 0u, nots);
    EXPECT_EQ(report.two_qubit_estimate, 3u + 7u + 3u * 6u);
}
