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
 * JSON and CSV forms of configurations, circuits, forests, distributions,
 * estimates, predictions and metrics.
 */
#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtree/circuit.hpp"
#include "qtree/common.hpp"
#include "qtree/estimator.hpp"
#include "qtree/forest.hpp"
#include "qtree/metrics.hpp"
#include "qtree/predictor.hpp"
#include "qtree/prob_engine.hpp"
#include "qtree/tree_model.hpp"

namespace qtree {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T> T json_get(const Json &j, const char *key, const std::string &what) {
    require(j.is_object() && j.contains(key), what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(what + ": field '" + key + "' has the wrong type");
    }
}

inline Json optional_number(const std::optional<double> &v) { return v ? Json(*v) : Json("undefined"); }

} // namespace detail

inline Json to_json(const CompressedConfig &c) {
    return Json{{"k", c.k()}, {"d", c.depth()}, {"layers", c.layers()}};
}

inline CompressedConfig config_from_json(const Json &j) {
    const auto k = detail::json_get<int>(j, "k", "config");
    const auto layers = detail::json_get<std::vector<std::vector<int>>>(j, "layers", "config");
    if (j.contains("d")) {
        require(j.at("d").get<std::size_t>() + 1 == layers.size(), "config: 'd' disagrees with the number of layers");
    }
    return CompressedConfig(k, layers);
}

inline Json to_json(const Gate &g) {
    return Json{{"kind", gate_kind_name(g.kind)}, {"targets", g.targets}, {"controls", g.controls}};
}

inline Gate gate_from_json(const Json &j) {
    Gate g;
    g.kind = gate_kind_from_name(detail::json_get<std::string>(j, "kind", "gate"));
    g.targets = detail::json_get<std::vector<Qubit>>(j, "targets", "gate");
    g.controls = j.contains("controls") ? j.at("controls").get<std::vector<Qubit>>() : std::vector<Qubit>{};
    std::sort(g.controls.begin(), g.controls.end());
    return g;
}

/// Sparse {"bitstring": probability} map of the non-zero entries.
inline Json sparse_distribution(const std::vector<double> &probs, std::size_t width) {
    Json out = Json::object();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] != 0.0) {
            out[index_to_string(i, width)] = probs[i];
        }
    }
    return out;
}

inline std::vector<double> dense_distribution(const Json &j, std::size_t width) {
    require(j.is_object(), "distribution: expected an object of bitstring: probability");
    std::vector<double> out(pow2(width), 0.0);
    for (const auto &[key, value] : j.items()) {
        require(key.size() == width, "distribution: key '" + key + "' should have " + std::to_string(width) + " bits");
        require(value.is_number(), "distribution: value for '" + key + "' is not a number");
        out[bits_to_index(bits_from_string(key))] = value.get<double>();
    }
    return out;
}

inline Json to_json(const Circuit &c) {
    Json gates = Json::array();
    for (const auto &g : c.gates) {
        gates.push_back(to_json(g));
    }
    return Json{{"n", c.n_qubits},
                {"prep", c.state_prep.empty() ? Json(nullptr) : sparse_distribution(c.state_prep, c.n_qubits)},
                {"gates", gates},
                {"measure", c.measured}};
}

inline Circuit circuit_from_json(const Json &j) {
    Circuit c;
    c.n_qubits = detail::json_get<std::size_t>(j, "n", "circuit");
    require(c.n_qubits >= 1 && c.n_qubits <= 26, "circuit: n must lie in [1, 26]");
    if (j.contains("prep") && !j.at("prep").is_null()) {
        c.state_prep = dense_distribution(j.at("prep"), c.n_qubits);
    }
    for (const auto &g : detail::json_get<Json>(j, "gates", "circuit")) {
        c.gates.push_back(gate_from_json(g));
    }
    c.measured = detail::json_get<std::vector<Qubit>>(j, "measure", "circuit");
    c.validate();
    return c;
}

inline Json to_json(const JointDistribution &p) {
    return Json{{"k", p.k()}, {"m", p.m()}, {"probs", sparse_distribution(p.probs(), p.width())}};
}

inline JointDistribution distribution_from_json(const Json &j) {
    const auto k = detail::json_get<int>(j, "k", "distribution");
    const auto m = detail::json_get<int>(j, "m", "distribution");
    return JointDistribution(k, m, dense_distribution(detail::json_get<Json>(j, "probs", "distribution"),
                                                      static_cast<std::size_t>(k + m)));
}

inline Json to_json(const ForestConfig &fc, int m) {
    Json trees = Json::array();
    for (const auto &t : fc.trees) {
        trees.push_back(to_json(t));
    }
    return Json{{"trees", trees}, {"weights", fc.weights}, {"d", fc.depth()}, {"k", fc.k()}, {"m", m}};
}

inline ForestConfig forest_from_json(const Json &j) {
    ForestConfig fc;
    for (const auto &t : detail::json_get<Json>(j, "trees", "forest")) {
        fc.trees.push_back(config_from_json(t));
    }
    fc.weights = detail::json_get<std::vector<double>>(j, "weights", "forest");
    fc.validate();
    if (j.contains("d")) {
        require(j.at("d").get<std::size_t>() == fc.depth(), "forest: 'd' disagrees with the trees");
    }
    return fc;
}

inline Json to_json(const MetricsReport &r) {
    Json out{{"bac", detail::optional_number(r.bac)}, {"acc", detail::optional_number(r.acc)}};
    for (int b = 0; b <= 1; ++b) {
        const auto s = std::to_string(b);
        out["pre_" + s] = detail::optional_number(r.pre[b]);
        out["rec_" + s] = detail::optional_number(r.rec[b]);
        out["f1_" + s] = detail::optional_number(r.f1[b]);
    }
    out["confusion"] = Json{{"true0_pred0", r.confusion.counts[0][0]},
                            {"true0_pred1", r.confusion.counts[0][1]},
                            {"true1_pred0", r.confusion.counts[1][0]},
                            {"true1_pred1", r.confusion.counts[1][1]}};
    return out;
}

inline Json to_json(const LabelPrediction &pred, std::size_t depth) {
    Json leaves = Json::array();
    for (auto leaf : pred.leaves) {
        leaves.push_back(index_to_string(leaf, depth + 1));
    }
    Json labels = Json::array();
    for (std::size_t j = 0; j < pred.p1.size(); ++j) {
        labels.push_back(Json{{"p", pred.p1[j]}, {"sigma", pred.sigma[j]}});
    }
    return Json{{"leaves", leaves}, {"labels", labels}, {"predicted", pred.labels}};
}

inline Json to_json(const OnDemandRecord &rec) {
    Json leaves = Json::array();
    for (std::size_t i = 0; i < rec.size(); ++i) {
        leaves.push_back(Json{{"leaf", index_to_string(rec.leaves[i], rec.depth + 1)},
                              {"p_q", rec.reach[i]},
                              {"p_q_sigma", rec.reach_sigma[i]},
                              {"p_y", rec.label[i]},
                              {"p_y_sigma", rec.label_sigma[i]},
                              {"tree_shots", rec.label_counts[i]}});
    }
    return Json{{"lambda_size", rec.size()}, {"leaves", leaves}};
}

/// One row per leaf: estimates next to the exact values when supplied.
inline std::string leaf_estimates_csv(const LeafEstimates &est, const LeafEstimates *exact = nullptr) {
    std::ostringstream out;
    out.precision(12);
    out << "leaf,count,p_hat,sigma" << (exact ? ",p_exact" : "");
    for (std::size_t j = 1; j <= est.m; ++j) {
        out << ",y" << j << "_p_hat,y" << j << "_sigma" << (exact ? ",y" + std::to_string(j) + "_p_exact" : "");
    }
    out << '\n';
    for (std::size_t leaf = 0; leaf < est.leaf_count(); ++leaf) {
        out << index_to_string(leaf, est.depth + 1) << ',' << est.reach_counts[leaf] << ',' << est.reach[leaf] << ','
            << est.reach_sigma[leaf];
        if (exact) {
            out << ',' << exact->reach[leaf];
        }
        for (std::size_t j = 0; j < est.m; ++j) {
            out << ',';
            if (est.defined[leaf]) {
                out << est.label[leaf][j] << ',' << est.label_sigma[leaf][j];
            } else {
                out << "undefined,undefined";
            }
            if (exact) {
                out << ',';
                if (exact->defined[leaf]) {
                    out << exact->label[leaf][j];
                } else {
                    out << "undefined";
                }
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace qtree
