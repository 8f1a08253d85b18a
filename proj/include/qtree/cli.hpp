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
 * Command-line front end. run_cli() is callable in-process; exit codes are
 * 0 on success, 1 for invalid input and 2 for runtime failures.
 */
#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtree/circuit.hpp"
#include "qtree/dataset.hpp"
#include "qtree/estimator.hpp"
#include "qtree/forest.hpp"
#include "qtree/induction.hpp"
#include "qtree/metrics.hpp"
#include "qtree/predictor.hpp"
#include "qtree/serialization.hpp"
#include "qtree/statevector.hpp"

namespace qtree::cli {

inline constexpr const char *kDefaultTheta = "16,20,3,.3,.5,.15,1,1";

namespace detail {

/// Accepts "1000000", "1e6" or "10^6".
inline std::uint64_t parse_count(const std::string &text, const std::string &what) {
    std::string t = text;
    const auto caret = t.find('^');
    double v = 0.0;
    try {
        std::size_t used = 0;
        if (caret != std::string::npos) {
            const double base = std::stod(t.substr(0, caret));
            const double exponent = std::stod(t.substr(caret + 1), &used);
            require(used == t.size() - caret - 1, "trailing characters");
            v = std::pow(base, exponent);
        } else {
            v = std::stod(t, &used);
            require(used == t.size(), "trailing characters");
        }
    } catch (const std::exception &) {
        throw ValidationError(what + ": '" + text + "' is not a number");
    }
    require(v >= 0.0 && v == std::floor(v) && v < 1.8e19, what + ": '" + text + "' is not a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Json read_json(const std::string &path) {
    const auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(path + ": invalid JSON (" + e.what() + ")");
    }
}

inline void emit(const std::string &text, const std::string &path, std::ostream &out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    f << text;
    if (!f) {
        throw std::runtime_error("write failed for '" + path + "'");
    }
}

inline Bits parse_bits(const std::string &text, std::size_t width, const std::string &what) {
    require(text.size() == width, what + ": expected " + std::to_string(width) + " bits, got '" + text + "'");
    for (char c : text) {
        require(c == '0' || c == '1', what + ": '" + text + "' is not a bit string");
    }
    return bits_from_string(text);
}

/// "bits" or "bits:weight,bits:weight,..."; unweighted lists are uniform.
inline QueryDistribution parse_query(const std::string &text, int k) {
    std::vector<std::pair<Bits, double>> support;
    std::stringstream in(text);
    std::string item;
    bool weighted = false;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        double w = 1.0;
        if (colon != std::string::npos) {
            weighted = true;
            try {
                w = std::stod(item.substr(colon + 1));
            } catch (const std::exception &) {
                throw ValidationError("query: weight in '" + item + "' is not a number");
            }
            item = item.substr(0, colon);
        }
        support.push_back({parse_bits(item, static_cast<std::size_t>(k), "query"), w});
    }
    require(!support.empty(), "query: empty");
    if (!weighted) {
        for (auto &s : support) {
            s.second = 1.0 / static_cast<double>(support.size());
        }
    }
    return QueryDistribution(k, support);
}

struct DataArgs {
    std::string data;
    double train_fraction = 1.0;
    std::uint64_t split_seed = 0;
};

inline Split load_split(const DataArgs &a) {
    require(!a.data.empty(), "--data is required");
    auto data = load_dataset(a.data);
    data.validate();
    if (a.train_fraction >= 1.0) {
        return Split{data, data};
    }
    return stratified_split(data, a.train_fraction, a.split_seed);
}

struct ModelArgs {
    std::string model;
    DataArgs data;
    bool fraction_given = false;
    bool split_seed_given = false;
    bool data_given = false;
};

struct LoadedModel {
    CompressedConfig config;
    Split split;
    Bits tie_break;
};

/// The model file fills in data and split settings that were not given.
inline LoadedModel load_model(ModelArgs a, const std::string &tie_break) {
    require(!a.model.empty(), "--model is required");
    const auto j = read_json(a.model);
    const Json cfg = j.contains("config") ? j.at("config") : j;
    if (!a.data_given && j.contains("data")) {
        a.data.data = j.at("data").get<std::string>();
    }
    if (!a.fraction_given && j.contains("train_fraction")) {
        a.data.train_fraction = j.at("train_fraction").get<double>();
    }
    if (!a.split_seed_given && j.contains("split_seed")) {
        a.data.split_seed = j.at("split_seed").get<std::uint64_t>();
    }
    LoadedModel out{config_from_json(cfg), load_split(a.data), {}};
    require(out.config.k() == out.split.train.k, "model k does not match the data");
    if (!tie_break.empty() && tie_break != "majority") {
        out.tie_break = parse_bits(tie_break, static_cast<std::size_t>(out.split.train.m), "--tie-break");
    } else if (tie_break.empty() && j.contains("tie_break")) {
        out.tie_break = j.at("tie_break").get<Bits>();
    } else {
        out.tie_break = majority_labels(out.split.train.joint());
    }
    return out;
}

inline Json dataset_summary(const Dataset &d) {
    return Json{{"name", d.name}, {"rows", d.size()}, {"k", d.k}, {"m", d.m}};
}

} // namespace detail

inline int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

namespace detail {

/// Turns {"command": "...", "key": value, ...} into an argument vector.
inline std::vector<std::string> step_to_args(const Json &step) {
    require(step.is_object() && step.contains("command"), "run: every step needs a 'command'");
    std::vector<std::string> args{step.at("command").get<std::string>()};
    for (const auto &[key, value] : step.items()) {
        if (key == "command") {
            continue;
        }
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                args.push_back("--" + key);
            }
            continue;
        }
        const auto push = [&](const Json &v) {
            args.push_back("--" + key);
            args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        };
        if (value.is_array()) {
            for (const auto &v : value) {
                push(v);
            }
        } else {
            push(value);
        }
    }
    return args;
}

} // namespace detail

inline int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Quantum decision tree laboratory", "qtree"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    detail::DataArgs data;
    std::string out_path, theta_text = kDefaultTheta, mode_text = "exact", shots_text, tie_break;
    std::uint64_t seed = 0;
    std::size_t depth = 0;
    detail::ModelArgs model;
    std::vector<std::string> queries;
    std::string trace_path, shots_out, circuit_out, input_path, eval_out, config_path;
    std::string eval_on = "test";
    bool reduced = false, mitigate = false, eval = false;
    std::size_t tree_count = 2, count = 25;

    const auto add_data = [&](CLI::App *sub) {
        sub->add_option("--data", data.data, "'toy', a tic-tac-toe .data file or a binary CSV");
        sub->add_option("--train-fraction", data.train_fraction, "Stratified training fraction (1 = use all rows)")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--split-seed", data.split_seed, "Seed of the stratified split");
    };
    const auto add_model = [&](CLI::App *sub) {
        sub->add_option("--model", model.model, "Model JSON written by 'induce'")->required();
        add_data(sub);
        sub->add_option("--tie-break", tie_break, "Label used on ties: bits, or 'majority'");
    };
    const auto add_sampling = [&](CLI::App *sub, const char *default_shots) {
        sub->add_option("--N", shots_text, std::string("Shots, 0 = exact distributions (default ") + default_shots + ")");
        sub->add_option("--seed", seed, "Random seed");
    };
    const auto add_induction = [&](CLI::App *sub) {
        add_data(sub);
        sub->add_option("--d", depth, "Index of the last decision layer")->required();
        sub->add_option("--theta", theta_text, "P,G,t,p_c,p_m,p_a,f_ent,f_bac");
        sub->add_option("--mode", mode_text, "exact or sampled");
    };

    auto *convert = app.add_subcommand("convert-data", "Write a data set as binary CSV");
    add_data(convert);
    convert->add_option("--out", out_path, "Output CSV");

    auto *induce = app.add_subcommand("induce", "Grow a tree with the genetic algorithm");
    add_induction(induce);
    induce->add_option("--N", shots_text, "Shots per fitness evaluation in sampled mode");
    induce->add_option("--seed", seed, "Random seed");
    induce->add_option("--out", out_path, "Model JSON");
    induce->add_option("--trace", trace_path, "Per-generation fitness CSV");

    auto *sample = app.add_subcommand("sample", "Sample a tree circuit and estimate leaf probabilities");
    add_model(sample);
    add_sampling(sample, "1e6");
    sample->add_option("--out", out_path, "Per-leaf estimates CSV");
    sample->add_option("--shots-out", shots_out, "Raw shot counts CSV");
    sample->add_option("--circuit-out", circuit_out, "Circuit JSON with gate counts");
    sample->add_flag("--reduced", reduced, "Use the reduced d+1+m qubit circuit");

    auto *predict = app.add_subcommand("predict", "Presampled prediction for point queries or a whole split");
    add_model(predict);
    add_sampling(predict, "0");
    predict->add_option("--query", queries, "Feature bit string (repeatable)");
    predict->add_flag("--eval", eval, "Predict every row of the evaluation split");
    predict->add_option("--eval-on", eval_on, "train or test")->check(CLI::IsMember({"train", "test"}));
    predict->add_option("--predictions-out", eval_out, "Per-row predictions CSV for --eval");
    predict->add_option("--out", out_path, "Output JSON");

    auto *query = app.add_subcommand("query", "Prediction for a query distribution via the query circuit");
    add_model(query);
    add_sampling(query, "0");
    query->add_option("--query", queries, "bits or bits:weight,bits:weight,...")->required();
    query->add_option("--out", out_path, "Output JSON");

    auto *on_demand = app.add_subcommand("on-demand", "On-demand prediction keeping only the reached leaves");
    add_model(on_demand);
    add_sampling(on_demand, "0");
    on_demand->add_option("--query", queries, "bits or bits:weight,bits:weight,...")->required();
    on_demand->add_flag("--mitigate", mitigate, "Keep only the most likely reached leaf");
    on_demand->add_option("--out", out_path, "Output JSON");

    auto *forest = app.add_subcommand("forest", "Bagged ensemble of trees");
    add_induction(forest);
    forest->add_option("--f", tree_count, "Number of trees (power of two)");
    forest->add_option("--N", shots_text, "Shots per fitness evaluation in sampled mode");
    forest->add_option("--seed", seed, "Random seed");
    forest->add_option("--query", queries, "Feature bit string to predict (repeatable)");
    forest->add_option("--out", out_path, "Forest JSON");

    auto *noise = app.add_subcommand("noise-fit", "Fit truncated-normal noise to repeated estimates");
    noise->add_option("--input", input_path, "CSV: bitstring,p_exact,p_hat[,label_exact,label_hat]")->required();
    noise->add_option("--out", out_path, "Output CSV");

    auto *metrics = app.add_subcommand("metrics", "Classification metrics from a predictions CSV");
    metrics->add_option("--input", input_path, "CSV with y<j>_true,y<j>_pred columns")->required();
    metrics->add_option("--out", out_path, "Output JSON");

    auto *baseline = app.add_subcommand("baseline", "Evaluate uniformly drawn configurations");
    add_induction(baseline);
    baseline->add_option("--count", count, "Number of random configurations");
    baseline->add_option("--N", shots_text, "Shots per evaluation in sampled mode");
    baseline->add_option("--seed", seed, "Random seed");
    baseline->add_option("--out", out_path, "Output JSON");

    auto *run = app.add_subcommand("run", "Execute the steps of a JSON experiment file");
    run->add_option("--config", config_path, "{\"steps\": [{\"command\": ..., \"flag\": value}, ...]}")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    if (shots_text.empty()) {
        const bool exact_default = predict->parsed() || query->parsed() || on_demand->parsed();
        shots_text = exact_default ? "0" : "1e6";
    }

    try {
        for (auto *sub : {sample, predict, query, on_demand}) {
            if (sub->parsed()) {
                model.data = data;
                model.data_given = sub->count("--data") > 0;
                model.fraction_given = sub->count("--train-fraction") > 0;
                model.split_seed_given = sub->count("--split-seed") > 0;
            }
        }

        if (convert->parsed()) {
            const auto d = detail::load_split(data).train;
            detail::emit(dataset_to_csv(d), out_path, out);
            if (!out_path.empty()) {
                out << detail::dataset_summary(d).dump() << "\n";
            }
        } else if (induce->parsed() || forest->parsed() || baseline->parsed()) {
            const auto theta = GaHyperparams::parse(theta_text);
            FitnessOptions options;
            options.mode = parse_mode(mode_text);
            options.shots = detail::parse_count(shots_text, "--N");
            const auto split = detail::load_split(data);
            require(depth + 1 <= static_cast<std::size_t>(split.train.k), "--d: need d+1 <= k");
            const FitnessEvaluator evaluator(split.train, theta.f_ent, theta.f_bac, options);
            Json result{{"data", data.data},
                        {"train_fraction", data.train_fraction},
                        {"split_seed", data.split_seed},
                        {"train", detail::dataset_summary(split.train)},
                        {"theta", theta.to_string()},
                        {"mode", mode_text},
                        {"N", options.mode == FitnessMode::Sampled ? Json(options.shots) : Json(nullptr)},
                        {"seed", seed},
                        {"tie_break", evaluator.tie_break()}};
            if (induce->parsed()) {
                const auto grown = genetic_grow(evaluator, depth, theta, seed);
                const auto exact = FitnessEvaluator(split.train, theta.f_ent, theta.f_bac,
                                                    {FitnessMode::Exact, 0, evaluator.tie_break()})
                                       .evaluate(grown.best);
                result["type"] = "tree";
                result["config"] = to_json(grown.best);
                result["decision_layers"] = expand(grown.best).layers();
                result["fitness"] = grown.best_fitness;
                result["exact_fitness"] = exact.fitness;
                result["train_bac"] = exact.balanced_accuracy;
                result["evaluations"] = grown.evaluations;
                if (!trace_path.empty()) {
                    detail::emit(trace_to_csv(grown.trace), trace_path, out);
                }
            } else if (forest->parsed()) {
                const auto grown = induce_forest(split.train, depth, tree_count, theta, options, seed);
                result["type"] = "forest";
                result["forest"] = to_json(grown.forest, split.train.m);
                result["train_bac"] = grown.training_bac;
                if (!queries.empty()) {
                    const auto p = split.train.joint();
                    std::vector<LeafEstimates> est;
                    for (const auto &t : grown.forest.trees) {
                        est.push_back(presample_tree(p, t, 0, 0));
                    }
                    Json preds = Json::array();
                    for (const auto &q : queries) {
                        const auto x = detail::parse_bits(q, static_cast<std::size_t>(split.train.k), "--query");
                        auto pj = to_json(forest_predict(grown.forest, est, x, evaluator.tie_break()), depth);
                        pj["query"] = q;
                        preds.push_back(pj);
                    }
                    result["predictions"] = preds;
                }
            } else {
                const auto b = random_baseline(evaluator, depth, count, seed);
                result["type"] = "baseline";
                result["count"] = count;
                result["mean_bac"] = b.mean_bac;
                result["std_bac"] = b.std_bac;
                result["mean_fitness"] = b.mean_fitness;
                Json draws = Json::array();
                for (std::size_t i = 0; i < b.configs.size(); ++i) {
                    draws.push_back(Json{{"config", to_json(b.configs[i])},
                                         {"fitness", b.fitness[i]},
                                         {"bac", b.balanced_accuracy[i]}});
                }
                result["draws"] = draws;
            }
            detail::emit(result.dump(2) + "\n", out_path, out);
        } else if (sample->parsed()) {
            const auto m = detail::load_model(model, tie_break);
            const auto shots = detail::parse_count(shots_text, "--N");
            require(shots >= 1, "sample: --N must be at least 1");
            const auto p = m.split.train.joint();
            const auto circuit = reduced ? reduce_tree_circuit(p, m.config) : build_tree_circuit(p, m.config);
            const auto result = sample_shots(circuit, shots, seed);
            const auto est = estimate(result, m.config.depth(), static_cast<std::size_t>(p.m()));
            const auto exact = presample_tree(p, m.config, 0, 0);
            detail::emit(leaf_estimates_csv(est, &exact), out_path, out);
            if (!shots_out.empty()) {
                detail::emit(shots_to_csv(result), shots_out, out);
            }
            if (!circuit_out.empty()) {
                auto cj = to_json(circuit);
                const auto report = gate_count_report(circuit);
                cj["gate_counts"] = Json{{"by_kind", report.by_kind}, {"two_qubit_estimate", report.two_qubit_estimate}};
                detail::emit(cj.dump(2) + "\n", circuit_out, out);
            }
            for (const auto &w : est.warnings) {
                err << "warning: " << w << "\n";
            }
        } else if (predict->parsed()) {
            const auto m = detail::load_model(model, tie_break);
            const auto shots = detail::parse_count(shots_text, "--N");
            const auto p = m.split.train.joint();
            const auto est = presample_tree(p, m.config, shots, seed);
            Json result = Json::object();
            Json preds = Json::array();
            for (const auto &q : queries) {
                const auto x = detail::parse_bits(q, static_cast<std::size_t>(p.k()), "--query");
                Json pj{{"query", q}};
                pj.update(to_json(predict_presampled(est, m.config, x, m.tie_break), m.config.depth()));
                preds.push_back(pj);
            }
            result["predictions"] = preds;
            if (eval) {
                const Dataset &target = eval_on == "train" ? m.split.train : m.split.test;
                std::vector<std::vector<std::uint8_t>> truth(static_cast<std::size_t>(target.m)),
                    predicted(static_cast<std::size_t>(target.m));
                std::ostringstream csv;
                csv << "row";
                for (int j = 1; j <= target.m; ++j) {
                    csv << ",y" << j << "_true,y" << j << "_pred";
                }
                csv << '\n';
                for (std::size_t r = 0; r < target.rows.size(); ++r) {
                    const auto pr = predict_presampled(est, m.config, target.rows[r].x, m.tie_break);
                    csv << r + 1;
                    for (std::size_t j = 0; j < truth.size(); ++j) {
                        truth[j].push_back(target.rows[r].y[j]);
                        predicted[j].push_back(pr.labels[j]);
                        csv << ',' << int(target.rows[r].y[j]) << ',' << int(pr.labels[j]);
                    }
                    csv << '\n';
                }
                Json mj = Json::object();
                for (std::size_t j = 0; j < truth.size(); ++j) {
                    mj["y" + std::to_string(j + 1)] = to_json(compute_metrics(truth[j], predicted[j]));
                }
                result["eval_on"] = eval_on;
                result["rows"] = target.rows.size();
                result["metrics"] = mj;
                if (!eval_out.empty()) {
                    detail::emit(csv.str(), eval_out, out);
                }
            }
            require(!queries.empty() || eval, "predict: give --query or --eval");
            detail::emit(result.dump(2) + "\n", out_path, out);
        } else if (query->parsed() || on_demand->parsed()) {
            const auto m = detail::load_model(model, tie_break);
            const auto shots = detail::parse_count(shots_text, "--N");
            const auto p = m.split.train.joint();
            Json preds = Json::array();
            for (std::size_t i = 0; i < queries.size(); ++i) {
                const auto pq = detail::parse_query(queries[i], p.k());
                const auto qseed = derive_seed(seed, i);
                Json pj{{"query", queries[i]}, {"N", shots}};
                if (query->parsed()) {
                    const auto est = presample_tree(p, m.config, shots, derive_seed(qseed, 0));
                    pj.update(to_json(predict_query_distribution(pq, m.config, est, shots, derive_seed(qseed, 1), m.tie_break),
                                      m.config.depth()));
                } else {
                    auto [pred, rec] = on_demand_predict(pq, m.config, p, shots, qseed, m.tie_break);
                    if (mitigate) {
                        rec = mitigate_leaf_selection(rec);
                        pred = predict_from_record(rec, m.tie_break);
                    }
                    pj.update(to_json(pred, m.config.depth()));
                    pj["record"] = to_json(rec);
                }
                preds.push_back(pj);
            }
            detail::emit(Json{{"predictions", preds}}.dump(2) + "\n", out_path, out);
        } else if (noise->parsed()) {
            std::istringstream in(detail::read_file(input_path));
            std::string line;
            std::getline(in, line);
            const auto header = qtree::detail::split_commas(qtree::detail::strip_cr(line));
            require(header.size() == 3 || header.size() == 5, input_path + ":1: expected 3 or 5 columns");
            std::map<std::string, NoiseSeries> series;
            std::vector<std::string> order;
            std::size_t line_no = 1;
            while (std::getline(in, line)) {
                ++line_no;
                line = qtree::detail::strip_cr(line);
                if (line.empty()) {
                    continue;
                }
                const auto cells = qtree::detail::split_commas(line);
                const auto where = input_path + ":" + std::to_string(line_no);
                require(cells.size() == header.size(), where + ": expected " + std::to_string(header.size()) + " columns");
                std::vector<double> v;
                for (std::size_t c = 1; c < cells.size(); ++c) {
                    try {
                        v.push_back(std::stod(cells[c]));
                    } catch (const std::exception &) {
                        throw ValidationError(where + ": '" + cells[c] + "' is not a number");
                    }
                }
                auto [it, fresh] = series.try_emplace(cells[0]);
                if (fresh) {
                    order.push_back(cells[0]);
                    it->second.bitstring = cells[0];
                    it->second.p_exact = v[0];
                    if (v.size() == 4) {
                        it->second.label_exact = v[2];
                    }
                }
                it->second.estimates.push_back(v[1]);
                if (v.size() == 4) {
                    it->second.label_estimates.push_back(v[3]);
                }
            }
            std::vector<NoiseSeries> ordered;
            for (const auto &b : order) {
                ordered.push_back(series.at(b));
            }
            detail::emit(noise_fit_csv(fit_truncated_normal_noise(ordered)), out_path, out);
        } else if (metrics->parsed()) {
            std::istringstream in(detail::read_file(input_path));
            std::string line;
            std::getline(in, line);
            const auto header = qtree::detail::split_commas(qtree::detail::strip_cr(line));
            std::map<std::string, std::pair<int, int>> columns;
            for (std::size_t c = 0; c < header.size(); ++c) {
                const auto &h = header[c];
                for (const std::string suffix : {"_true", "_pred"}) {
                    if (h.size() > suffix.size() && h.compare(h.size() - suffix.size(), suffix.size(), suffix) == 0) {
                        auto &slot = columns.try_emplace(h.substr(0, h.size() - suffix.size()), -1, -1).first->second;
                        (suffix == "_true" ? slot.first : slot.second) = static_cast<int>(c);
                    }
                }
            }
            require(!columns.empty(), input_path + ":1: no <label>_true/<label>_pred column pairs");
            std::map<std::string, std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> values;
            std::size_t line_no = 1;
            while (std::getline(in, line)) {
                ++line_no;
                line = qtree::detail::strip_cr(line);
                if (line.empty()) {
                    continue;
                }
                const auto cells = qtree::detail::split_commas(line);
                const auto where = input_path + ":" + std::to_string(line_no);
                require(cells.size() == header.size(), where + ": wrong number of columns");
                for (const auto &[name, cols] : columns) {
                    require(cols.first >= 0 && cols.second >= 0, input_path + ":1: '" + name + "' lacks a _true or _pred column");
                    for (int c : {cols.first, cols.second}) {
                        const auto &cell = cells[static_cast<std::size_t>(c)];
                        require(cell == "0" || cell == "1", where + ": label '" + cell + "' is not 0 or 1");
                    }
                    values[name].first.push_back(cells[static_cast<std::size_t>(cols.first)] == "1");
                    values[name].second.push_back(cells[static_cast<std::size_t>(cols.second)] == "1");
                }
            }
            Json result = Json::object();
            for (const auto &[name, v] : values) {
                result[name] = to_json(compute_metrics(v.first, v.second));
            }
            require(!values.empty(), input_path + ": no rows");
            detail::emit(result.dump(2) + "\n", out_path, out);
        } else if (run->parsed()) {
            const auto config = detail::read_json(config_path);
            const Json steps = config.contains("steps") ? config.at("steps") : Json::array({config});
            require(steps.is_array() && !steps.empty(), "run: 'steps' must be a non-empty array");
            for (std::size_t i = 0; i < steps.size(); ++i) {
                const auto step_args = detail::step_to_args(steps[i]);
                require(step_args.front() != "run", "run: nested 'run' steps are not allowed");
                const int code = run_cli(step_args, out, err);
                if (code != 0) {
                    err << "run: step " << i + 1 << " (" << step_args.front() << ") failed with exit code " << code << "\n";
                    return code;
                }
            }
        }
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace qtree::cli
