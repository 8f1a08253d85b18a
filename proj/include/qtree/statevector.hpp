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
 * Dense state-vector simulator for the gate set of circuit.hpp.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtree/circuit.hpp"
#include "qtree/common.hpp"

namespace qtree {

class StateVector {
  public:
    using Amplitude = std::complex<double>;

    explicit StateVector(std::size_t n) : n_(n), amplitudes_(pow2(n), Amplitude{0.0, 0.0}) {
        require(n >= 1 && n <= 26, "StateVector: qubit count must be in [1, 26]");
        amplitudes_[0] = 1.0;
    }

    StateVector(std::size_t n, std::vector<Amplitude> amplitudes) : n_(n), amplitudes_(std::move(amplitudes)) {
        require(n >= 1 && n <= 26, "StateVector: qubit count must be in [1, 26]");
        require(amplitudes_.size() == pow2(n), "StateVector: amplitude count must be 2^n");
        require(std::abs(norm() - 1.0) <= 1e-10, "StateVector: state is not normalized");
    }

    std::size_t n_qubits() const { return n_; }
    const std::vector<Amplitude> &amplitudes() const { return amplitudes_; }
    Amplitude operator[](std::size_t index) const { return amplitudes_[index]; }

    double norm() const {
        double s = 0.0;
        for (const auto &a : amplitudes_) {
            s += std::norm(a);
        }
        return s;
    }

    /// Bit mask of qubit q in a basis index (qubit 0 is the most significant bit).
    std::size_t mask(Qubit q) const { return std::size_t{1} << (n_ - 1 - q); }

    void apply(const Gate &gate) {
        for (auto q : gate.qubits()) {
            require(q < n_, "apply: gate qubit index out of range");
        }
        std::size_t control_mask = 0;
        for (auto c : gate.controls) {
            control_mask |= mask(c);
        }
        switch (gate.kind) {
        case GateKind::Identity:
            return;
        case GateKind::Not:
        case GateKind::Cnot:
        case GateKind::Mcnot: {
            const std::size_t t = mask(gate.targets.front());
            for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
                if ((i & t) == 0 && (i & control_mask) == control_mask) {
                    std::swap(amplitudes_[i], amplitudes_[i | t]);
                }
            }
            return;
        }
        case GateKind::Swap:
        case GateKind::Mcswap: {
            const std::size_t a = mask(gate.targets[0]);
            const std::size_t b = mask(gate.targets[1]);
            if (a == b) {
                return;
            }
            for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
                // Visit each |..1..0..> / |..0..1..> pair once, from the a=1 side.
                if ((i & a) && !(i & b) && (i & control_mask) == control_mask) {
                    std::swap(amplitudes_[i], amplitudes_[(i ^ a) | b]);
                }
            }
            return;
        }
        }
    }

    void apply_all(const std::vector<Gate> &gates) {
        for (const auto &g : gates) {
            apply(g);
        }
    }

  private:
    std::size_t n_;
    std::vector<Amplitude> amplitudes_;
};

/// Amplitude sqrt(p(b)) at every basis index b.
inline StateVector init_qsample(const std::vector<double> &p) {
    require(!p.empty() && (p.size() & (p.size() - 1)) == 0, "init_qsample: distribution size must be a power of two");
    std::size_t n = 0;
    while (pow2(n) < p.size()) {
        ++n;
    }
    double total = 0.0;
    for (double v : p) {
        require(v >= 0.0, "init_qsample: negative probability");
        total += v;
    }
    require(std::abs(total - 1.0) <= 1e-10, "init_qsample: distribution is not normalized");
    std::vector<StateVector::Amplitude> amps(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        amps[i] = std::sqrt(p[i]);
    }
    return StateVector(n, std::move(amps));
}

inline StateVector apply_circuit(StateVector state, const std::vector<Gate> &gates) {
    state.apply_all(gates);
    return state;
}

/// Runs a full circuit: state preparation (or |0...0>) followed by its gates.
inline StateVector simulate(const Circuit &circuit) {
    circuit.validate();
    StateVector state = circuit.state_prep.empty() ? StateVector(circuit.n_qubits) : init_qsample(circuit.state_prep);
    state.apply_all(circuit.gates);
    return state;
}

/// Marginal over `measured`; outcome index packs the measured bits in the
/// given order, first qubit most significant.
inline std::vector<double> exact_measurement_distribution(const StateVector &state, const std::vector<Qubit> &measured) {
    require(!measured.empty(), "exact_measurement_distribution: no measured qubits");
    for (auto q : measured) {
        require(q < state.n_qubits(), "exact_measurement_distribution: qubit out of range");
    }
    std::vector<double> out(pow2(measured.size()), 0.0);
    const auto &amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double w = std::norm(amps[i]);
        if (w == 0.0) {
            continue;
        }
        std::size_t outcome = 0;
        for (auto q : measured) {
            outcome = (outcome << 1) | ((i & state.mask(q)) ? 1u : 0u);
        }
        out[outcome] += w;
    }
    return out;
}

inline std::vector<double> exact_measurement_distribution(const Circuit &circuit) {
    return exact_measurement_distribution(simulate(circuit), circuit.measured);
}

/// Shot counts over all 2^width outcomes of the measured register.
struct ShotResult {
    std::size_t width = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    std::uint64_t count(const std::string &bitstring) const {
        require(bitstring.size() == width, "ShotResult: bit string has wrong length");
        return counts[bits_to_index(bits_from_string(bitstring))];
    }

    /// Expanded multiset of outcome strings in ascending index order.
    std::vector<std::string> bitstrings() const {
        std::vector<std::string> out;
        out.reserve(shots);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (std::uint64_t c = 0; c < counts[i]; ++c) {
                out.push_back(index_to_string(i, width));
            }
        }
        return out;
    }
};

/// N independent draws from `dist`, realized as a multinomial by sequential
/// conditional binomials.
inline ShotResult sample_from_distribution(const std::vector<double> &dist, std::uint64_t shots, std::uint64_t seed) {
    require(shots >= 1, "sample_shots: N must be at least 1");
    require(!dist.empty() && (dist.size() & (dist.size() - 1)) == 0, "sample_shots: outcome count must be 2^width");
    ShotResult result;
    while (pow2(result.width) < dist.size()) {
        ++result.width;
    }
    result.counts.assign(dist.size(), 0);
    result.shots = shots;
    result.seed = seed;
    std::mt19937_64 rng(seed);
    std::uint64_t remaining = shots;
    double remaining_mass = 0.0;
    for (double v : dist) {
        remaining_mass += v;
    }
    for (std::size_t i = 0; i < dist.size() && remaining > 0; ++i) {
        if (dist[i] <= 0.0) {
            continue;
        }
        const double q = std::clamp(dist[i] / remaining_mass, 0.0, 1.0);
        std::uint64_t c = remaining;
        if (q < 1.0) {
            std::binomial_distribution<std::uint64_t> draw(remaining, q);
            c = draw(rng);
        }
        result.counts[i] = c;
        remaining -= c;
        remaining_mass -= dist[i];
    }
    // Floating-point leftovers go to the last outcome with mass.
    if (remaining > 0) {
        for (std::size_t i = dist.size(); i-- > 0;) {
            if (dist[i] > 0.0) {
                result.counts[i] += remaining;
                break;
            }
        }
    }
    return result;
}

inline ShotResult sample_shots(const StateVector &state, const std::vector<Qubit> &measured, std::uint64_t shots,
                               std::uint64_t seed) {
    return sample_from_distribution(exact_measurement_distribution(state, measured), shots, seed);
}

inline ShotResult sample_shots(const Circuit &circuit, std::uint64_t shots, std::uint64_t seed) {
    return sample_shots(simulate(circuit), circuit.measured, shots, seed);
}

/// CSV shot log "bitstring,count" with zero-count outcomes omitted.
inline std::string shots_to_csv(const ShotResult &shots) {
    std::ostringstream out;
    out << "bitstring,count\n";
    for (std::size_t i = 0; i < shots.counts.size(); ++i) {
        if (shots.counts[i] > 0) {
            out << index_to_string(i, shots.width) << ',' << shots.counts[i] << '\n';
        }
    }
    return out.str();
}

inline ShotResult shots_from_csv(std::istream &in) {
    ShotResult result;
    std::string line;
    std::size_t line_no = 0;
    bool sized = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (line_no == 1 && line.rfind("bitstring", 0) == 0)) {
            continue;
        }
        const auto comma = line.find(',');
        require(comma != std::string::npos, "shot log line " + std::to_string(line_no) + ": expected bitstring,count");
        const std::string bits = line.substr(0, comma);
        std::uint64_t count = 0;
        try {
            std::size_t used = 0;
            count = std::stoull(line.substr(comma + 1), &used);
            require(used == line.size() - comma - 1, "trailing characters");
        } catch (const std::exception &) {
            throw ValidationError("shot log line " + std::to_string(line_no) + ": invalid count");
        }
        Bits parsed;
        try {
            parsed = bits_from_string(bits);
        } catch (const ValidationError &) {
            throw ValidationError("shot log line " + std::to_string(line_no) + ": invalid bit string '" + bits + "'");
        }
        if (!sized) {
            require(!parsed.empty() && parsed.size() <= 30, "shot log line " + std::to_string(line_no) + ": bad width");
            result.width = parsed.size();
            result.counts.assign(pow2(result.width), 0);
            sized = true;
        }
        require(parsed.size() == result.width,
                "shot log line " + std::to_string(line_no) + ": bit strings must share one length");
        result.counts[bits_to_index(parsed)] += count;
        result.shots += count;
    }
    require(sized, "shot log is empty");
    return result;
}

} // namespace qtree
