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
 * Gate-list circuit representation and the Q-tree circuit builders.
 *
 * Qubits are 0-based: feature x_i lives on qubit i-1, label y_j on qubit
 * k+j-1 and ancilla a_u on qubit k+m+u-1. Open controls never appear as a
 * gate attribute; they are written out as NOT pairs around the gate.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtree/common.hpp"
#include "qtree/prob_engine.hpp"
#include "qtree/tree_model.hpp"

namespace qtree {

using Qubit = std::size_t;

enum class GateKind { Not, Cnot, Mcnot, Swap, Mcswap, Identity };

inline const char *gate_kind_name(GateKind kind) {
    switch (kind) {
    case GateKind::Not:
        return "NOT";
    case GateKind::Cnot:
        return "CNOT";
    case GateKind::Mcnot:
        return "MCNOT";
    case GateKind::Swap:
        return "SWAP";
    case GateKind::Mcswap:
        return "MCSWAP";
    case GateKind::Identity:
        return "IDENTITY";
    }
    return "?";
}

inline GateKind gate_kind_from_name(const std::string &name) {
    for (auto kind : {GateKind::Not, GateKind::Cnot, GateKind::Mcnot, GateKind::Swap, GateKind::Mcswap,
                      GateKind::Identity}) {
        if (name == gate_kind_name(kind)) {
            return kind;
        }
    }
    throw ValidationError("unknown gate kind '" + name + "'");
}

struct Gate {
    GateKind kind = GateKind::Identity;
    std::vector<Qubit> targets;
    std::vector<Qubit> controls; ///< closed controls, sorted ascending

    static Gate identity() { return Gate{}; }

    static Gate x(Qubit q) { return Gate{GateKind::Not, {q}, {}}; }

    static Gate cnot(Qubit target, Qubit control) {
        require(target != control, "CNOT target and control must differ");
        return Gate{GateKind::Cnot, {target}, {control}};
    }

    /// NOT on `target` controlled by every qubit in `controls`; one control
    /// yields a CNOT.
    static Gate mcnot(Qubit target, std::vector<Qubit> controls) {
        normalize_controls(controls);
        require(!controls.empty(), "MCNOT needs at least one control");
        require(std::find(controls.begin(), controls.end(), target) == controls.end(),
                "MCNOT target may not be a control");
        if (controls.size() == 1) {
            return cnot(target, controls.front());
        }
        return Gate{GateKind::Mcnot, {target}, std::move(controls)};
    }

    static Gate swap(Qubit a, Qubit b) { return mcswap(a, b, {}); }

    /// Controlled SWAP; equal targets normalize to IDENTITY, no controls to SWAP.
    static Gate mcswap(Qubit a, Qubit b, std::vector<Qubit> controls) {
        if (a == b) {
            return identity();
        }
        normalize_controls(controls);
        for (auto c : controls) {
            require(c != a && c != b, "MCSWAP targets and controls must be disjoint");
        }
        return Gate{controls.empty() ? GateKind::Swap : GateKind::Mcswap, {a, b}, std::move(controls)};
    }

    std::vector<Qubit> qubits() const {
        auto all = targets;
        all.insert(all.end(), controls.begin(), controls.end());
        return all;
    }

    bool touches(Qubit q) const {
        return std::find(targets.begin(), targets.end(), q) != targets.end() ||
               std::find(controls.begin(), controls.end(), q) != controls.end();
    }

    friend bool operator==(const Gate &, const Gate &) = default;

  private:
    static void normalize_controls(std::vector<Qubit> &controls) {
        std::sort(controls.begin(), controls.end());
        controls.erase(std::unique(controls.begin(), controls.end()), controls.end());
    }
};

struct Circuit {
    std::size_t n_qubits = 0;
    std::vector<Gate> gates;
    /// Distribution over all 2^n basis states loaded as amplitudes sqrt(p);
    /// empty means the circuit starts from |0...0>.
    std::vector<double> state_prep;
    /// Measured qubits in bit-string order.
    std::vector<Qubit> measured;

    void validate() const {
        for (const auto &g : gates) {
            for (auto q : g.qubits()) {
                require(q < n_qubits, "gate index out of range");
            }
        }
        for (auto q : measured) {
            require(q < n_qubits, "measured qubit out of range");
        }
        auto sorted = measured;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "measured qubits must be unique");
        require(state_prep.empty() || state_prep.size() == pow2(n_qubits), "state preparation has wrong size");
    }
};

/// Removes IDENTITY gates and cancels each NOT against the most recent
/// earlier NOT on the same qubit when no gate in between touches that qubit.
inline std::vector<Gate> cancel_not_pairs(const std::vector<Gate> &gates) {
    std::vector<std::optional<Gate>> out;
    out.reserve(gates.size());
    // Last surviving NOT per qubit, as an index into `out`.
    std::map<Qubit, std::size_t> open_not;
    for (const auto &g : gates) {
        if (g.kind == GateKind::Identity) {
            continue;
        }
        if (g.kind == GateKind::Not) {
            const Qubit q = g.targets.front();
            auto it = open_not.find(q);
            if (it != open_not.end()) {
                out[it->second].reset();
                open_not.erase(it);
                continue;
            }
            open_not[q] = out.size();
            out.emplace_back(g);
            continue;
        }
        for (auto q : g.qubits()) {
            open_not.erase(q);
        }
        out.emplace_back(g);
    }
    std::vector<Gate> result;
    for (auto &g : out) {
        if (g) {
            result.push_back(std::move(*g));
        }
    }
    return result;
}

namespace detail {

/// NOT gates on qubits base+u-1 (u = 1..v) where kappa(j, v, u) = 0, i.e. the
/// open controls that select node j of a v-bit register.
inline void append_open_control_nots(std::vector<Gate> &gates, std::size_t j, std::size_t v, Qubit base) {
    for (std::size_t u = 1; u <= v; ++u) {
        if (kappa(j, v, u) == 0) {
            gates.push_back(Gate::x(base + u - 1));
        }
    }
}

} // namespace detail

/// Layer-by-layer structure encoding for `config`. Every node contributes
/// NOT-decorated controlled swaps; `ancilla_controls` are extra closed
/// controls added to every swap (used by the forest circuit). The raw gate
/// list is returned; use cancel_not_pairs() for the peephole pass.
inline std::vector<Gate> structure_gates(const CompressedConfig &config, std::size_t n_qubits,
                                         const std::vector<Qubit> &ancilla_controls = {}) {
    require(static_cast<std::size_t>(config.k()) <= n_qubits, "structure encoding needs k <= n_qubits");
    std::vector<Gate> gates;
    for (std::size_t i = 0; i <= config.depth(); ++i) {
        for (std::size_t j = 1; j <= pow2(i); ++j) {
            const int c = config.layers()[i][j - 1];
            if (c == static_cast<int>(i) + 1) {
                continue; // identity swap: the node contributes nothing
            }
            std::vector<Qubit> controls = ancilla_controls;
            for (std::size_t u = 0; u < i; ++u) {
                controls.push_back(u);
            }
            detail::append_open_control_nots(gates, j, i, 0);
            gates.push_back(Gate::mcswap(i, static_cast<Qubit>(c - 1), controls));
            detail::append_open_control_nots(gates, j, i, 0);
        }
    }
    return gates;
}

inline std::vector<Gate> build_structure_encoding(const CompressedConfig &config, std::size_t n_qubits) {
    return cancel_not_pairs(structure_gates(config, n_qubits));
}

/// Rewrites a SWAP/MCSWAP on (q1, q2) with controls Q as
/// CNOT(q2 <- q1) . MCNOT(q1 <- Q u {q2}) . CNOT(q2 <- q1).
inline std::vector<Gate> decompose_mcswap(const Gate &gate) {
    require(gate.kind == GateKind::Swap || gate.kind == GateKind::Mcswap, "decompose_mcswap: gate is not a swap");
    require(gate.targets.size() == 2 && gate.targets[0] != gate.targets[1],
            "decompose_mcswap: swap targets must differ");
    const Qubit q1 = gate.targets[0];
    const Qubit q2 = gate.targets[1];
    auto controls = gate.controls;
    controls.push_back(q2);
    return {Gate::cnot(q2, q1), Gate::mcnot(q1, controls), Gate::cnot(q2, q1)};
}

namespace detail {

inline std::vector<Qubit> tree_measured_qubits(std::size_t depth, std::size_t k, std::size_t m) {
    std::vector<Qubit> measured;
    for (std::size_t q = 0; q <= depth; ++q) {
        measured.push_back(q);
    }
    for (std::size_t j = 0; j < m; ++j) {
        measured.push_back(k + j);
    }
    return measured;
}

} // namespace detail

/// Q-tree circuit: qsample of p on k+m qubits, structure encoding on the
/// feature register, measurement of qubits 0..d and the label register.
inline Circuit build_tree_circuit(const JointDistribution &p, const CompressedConfig &config) {
    require(p.k() == config.k(), "build_tree_circuit: k mismatch between data and configuration");
    require(config.depth() + 1 <= static_cast<std::size_t>(p.k()), "build_tree_circuit: d+1 > k");
    Circuit circuit;
    circuit.n_qubits = p.width();
    circuit.state_prep = p.probs();
    circuit.gates = build_structure_encoding(config, circuit.n_qubits);
    circuit.measured = detail::tree_measured_qubits(config.depth(), static_cast<std::size_t>(p.k()),
                                                    static_cast<std::size_t>(p.m()));
    return circuit;
}

/// Query circuit on k qubits. A point-mass query is prepared with NOT gates
/// instead of amplitude loading.
inline Circuit build_query_circuit(const std::vector<double> &query_dist, const CompressedConfig &config) {
    const std::size_t k = static_cast<std::size_t>(config.k());
    require(query_dist.size() == pow2(k), "build_query_circuit: query distribution must cover 2^k states");
    double total = 0.0;
    std::size_t nonzero = 0;
    std::size_t point = 0;
    for (std::size_t i = 0; i < query_dist.size(); ++i) {
        require(query_dist[i] >= 0.0, "build_query_circuit: negative query weight");
        total += query_dist[i];
        if (query_dist[i] > 0.0) {
            ++nonzero;
            point = i;
        }
    }
    require(std::abs(total - 1.0) <= 1e-12, "build_query_circuit: query distribution must be normalized");
    Circuit circuit;
    circuit.n_qubits = k;
    if (nonzero == 1) {
        const auto bits = index_to_bits(point, k);
        for (std::size_t q = 0; q < k; ++q) {
            if (bits[q]) {
                circuit.gates.push_back(Gate::x(q));
            }
        }
    } else {
        circuit.state_prep = query_dist;
    }
    const auto structure = build_structure_encoding(config, k);
    circuit.gates.insert(circuit.gates.end(), structure.begin(), structure.end());
    circuit.measured = detail::tree_measured_qubits(config.depth(), k, 0);
    return circuit;
}

inline std::size_t ancilla_count(std::size_t tree_count) {
    std::size_t bits = 0;
    while (pow2(bits) < tree_count) {
        ++bits;
    }
    return bits;
}

/// Q-forest circuit over k+m+f' qubits. Tree t (1-based) is active when the
/// ancilla register reads t-1 (a_1 most significant).
inline Circuit build_forest_circuit(const std::vector<CompressedConfig> &trees, const std::vector<double> &tree_weights,
                                    const JointDistribution &p) {
    const std::size_t f = trees.size();
    require(f >= 2 && (f & (f - 1)) == 0, "build_forest_circuit: tree count must be a power of two >= 2");
    require(tree_weights.size() == f, "build_forest_circuit: one weight per tree required");
    double total = 0.0;
    for (double w : tree_weights) {
        require(w >= 0.0, "build_forest_circuit: negative tree weight");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "build_forest_circuit: tree weights must be normalized");
    const std::size_t depth = trees.front().depth();
    for (const auto &t : trees) {
        require(t.depth() == depth, "build_forest_circuit: all trees must share the same depth");
        require(t.k() == p.k(), "build_forest_circuit: k mismatch");
    }
    const std::size_t f_anc = ancilla_count(f);
    const std::size_t k = static_cast<std::size_t>(p.k());
    const std::size_t m = static_cast<std::size_t>(p.m());

    Circuit circuit;
    circuit.n_qubits = k + m + f_anc;
    circuit.state_prep.assign(pow2(circuit.n_qubits), 0.0);
    for (auto i : p.support()) {
        for (std::size_t a = 0; a < f; ++a) {
            circuit.state_prep[(i << f_anc) | a] = p[i] * tree_weights[a];
        }
    }
    std::vector<Qubit> ancillas;
    for (std::size_t u = 0; u < f_anc; ++u) {
        ancillas.push_back(k + m + u);
    }
    std::vector<Gate> raw;
    for (std::size_t t = 1; t <= f; ++t) {
        for (const auto &g : structure_gates(trees[t - 1], circuit.n_qubits, ancillas)) {
            // Each swap is wrapped in the ancilla selector NOTs of its tree.
            if (g.kind == GateKind::Not) {
                raw.push_back(g);
                continue;
            }
            detail::append_open_control_nots(raw, t, f_anc, k + m);
            raw.push_back(g);
            detail::append_open_control_nots(raw, t, f_anc, k + m);
        }
    }
    circuit.gates = cancel_not_pairs(raw);
    circuit.measured = detail::tree_measured_qubits(depth, k, m);
    circuit.measured.insert(circuit.measured.end(), ancillas.begin(), ancillas.end());
    return circuit;
}

/// Equivalent tree circuit on d+1+m qubits. The data are marginalized onto
/// the features that end up on the measured qubits, with the root feature
/// moved to qubit 0 so the root swap disappears. When a deeper swap pulls in
/// a feature from outside the measured register, the remaining structure is
/// folded into the state preparation instead.
inline Circuit reduce_tree_circuit(const JointDistribution &p, const CompressedConfig &config) {
    require(p.k() == config.k(), "reduce_tree_circuit: k mismatch between data and configuration");
    const std::size_t d = config.depth();
    require(d + 1 <= static_cast<std::size_t>(p.k()), "reduce_tree_circuit: d+1 > k");
    const std::size_t m = static_cast<std::size_t>(p.m());
    const std::size_t n = d + 1 + m;

    bool local = true;
    for (std::size_t i = 1; i <= d; ++i) {
        for (int c : config.layers()[i]) {
            local = local && c <= static_cast<int>(d) + 1;
        }
    }

    Circuit circuit;
    circuit.n_qubits = n;
    circuit.state_prep.assign(pow2(n), 0.0);
    circuit.measured.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        circuit.measured[q] = q;
    }

    if (!local) {
        const auto joint = leaf_label_joint(p, expand(config));
        circuit.state_prep = joint;
        return circuit;
    }

    // Feature held by each register position after the root swap.
    auto J = detail::identity_index_vector(p.k());
    detail::swap_positions(J, 1, config.layers()[0][0]);
    for (auto i : p.support()) {
        std::size_t reduced = 0;
        for (std::size_t q = 0; q <= d; ++q) {
            reduced = (reduced << 1) | p.feature_bit(i, J[q]);
        }
        reduced = (reduced << m) | p.label_part(i);
        circuit.state_prep[reduced] += p[i];
    }
    auto layers = config.layers();
    layers[0][0] = 1;
    const CompressedConfig rest(static_cast<int>(d) + 1, std::move(layers));
    circuit.gates = build_structure_encoding(rest, n);
    return circuit;
}

struct GateCountReport {
    std::map<std::string, std::size_t> by_kind;
    /// Two-qubit-gate estimate after decomposing swaps into CNOT/MCNOT and
    /// MCNOT with v > 2 controls into 8v - 20 controlled rotations.
    std::size_t two_qubit_estimate = 0;
};

inline std::size_t mcnot_two_qubit_cost(std::size_t controls) {
    if (controls <= 1) {
        return 1;
    }
    if (controls == 2) {
        return 5;
    }
    return 8 * controls - 20;
}

inline GateCountReport gate_count_report(const std::vector<Gate> &gates) {
    GateCountReport report;
    for (const auto &g : gates) {
        report.by_kind[gate_kind_name(g.kind)]++;
        switch (g.kind) {
        case GateKind::Not:
        case GateKind::Identity:
            break;
        case GateKind::Cnot:
            report.two_qubit_estimate += 1;
            break;
        case GateKind::Mcnot:
            report.two_qubit_estimate += mcnot_two_qubit_cost(g.controls.size());
            break;
        case GateKind::Swap:
        case GateKind::Mcswap:
            report.two_qubit_estimate += 2 + mcnot_two_qubit_cost(g.controls.size() + 1);
            break;
        }
    }
    return report;
}

inline GateCountReport gate_count_report(const Circuit &circuit) { return gate_count_report(circuit.gates); }

} // namespace qtree
