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
 * Genetic induction of compressed decision configurations with an exact
 * (classical) or sampled (simulated measurement) fitness.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qtree/circuit.hpp"
#include "qtree/common.hpp"
#include "qtree/dataset.hpp"
#include "qtree/estimator.hpp"
#include "qtree/prob_engine.hpp"
#include "qtree/statevector.hpp"
#include "qtree/tree_model.hpp"

namespace qtree {

struct GaHyperparams {
    std::size_t population = 16;
    std::size_t generations = 20;
    std::size_t tournament = 3;
    double p_crossover = 0.3;
    double p_mutation = 0.5;
    double p_attribute = 0.15;
    double f_ent = 1.0;
    double f_bac = 1.0;

    void validate() const {
        require(population >= 1, "theta: population size P must be at least 1");
        require(tournament >= 1 && tournament <= population, "theta: tournament size t must lie in [1, P]");
        for (double p : {p_crossover, p_mutation, p_attribute}) {
            require(p >= 0.0 && p <= 1.0, "theta: probabilities must lie in [0, 1]");
        }
        require(f_ent >= 0.0 && f_bac >= 0.0, "theta: fitness weights must be non-negative");
    }

    /// "P,G,t,p_c,p_m,p_a,f_ent,f_bac", e.g. "16,20,3,.3,.5,.15,1,1".
    static GaHyperparams parse(const std::string &text) {
        std::vector<std::string> cells;
        std::stringstream in(text);
        std::string cell;
        while (std::getline(in, cell, ',')) {
            cells.push_back(cell);
        }
        require(cells.size() == 8, "theta: expected 8 comma-separated values, got " + std::to_string(cells.size()));
        auto number = [&](std::size_t i) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[i], &used);
                require(used == cells[i].size(), "trailing characters");
                return v;
            } catch (const std::exception &) {
                throw ValidationError("theta: value " + std::to_string(i + 1) + " ('" + cells[i] + "') is not a number");
            }
        };
        auto count = [&](std::size_t i) {
            const double v = number(i);
            require(v >= 0.0 && v == std::floor(v), "theta: value " + std::to_string(i + 1) + " must be a non-negative integer");
            return static_cast<std::size_t>(v);
        };
        GaHyperparams h{count(0), count(1), count(2), number(3), number(4), number(5), number(6), number(7)};
        h.validate();
        return h;
    }

    std::string to_string() const {
        std::ostringstream out;
        out << population << ',' << generations << ',' << tournament << ',' << p_crossover << ',' << p_mutation << ','
            << p_attribute << ',' << f_ent << ',' << f_bac;
        return out.str();
    }
};

enum class FitnessMode { Exact, Sampled };

inline FitnessMode parse_mode(const std::string &text) {
    if (text == "exact") {
        return FitnessMode::Exact;
    }
    if (text == "sampled") {
        return FitnessMode::Sampled;
    }
    throw ValidationError("mode must be 'exact' or 'sampled', got '" + text + "'");
}

struct FitnessOptions {
    FitnessMode mode = FitnessMode::Exact;
    std::uint64_t shots = 1000000;
    /// Label used on exact ties and undefined leaves; defaults to the
    /// majority training label.
    std::optional<Bits> tie_break;
};

/// -(1/m) sum_nu p(C_nu) sum_i S[p(y_i | C_nu)].
inline double fitness_entropy(const LeafEstimates &est) {
    require(est.m >= 1, "fitness_entropy: no labels");
    double total = 0.0;
    for (std::size_t leaf = 0; leaf < est.leaf_count(); ++leaf) {
        double s = 0.0;
        for (double p1 : est.label[leaf]) {
            s += binary_entropy({1.0 - p1, p1});
        }
        total += est.reach[leaf] * s;
    }
    return -total / static_cast<double>(est.m);
}

inline double fitness_entropy(const std::vector<LeafProfile> &profiles) {
    require(!profiles.empty(), "fitness_entropy: no leaves");
    return fitness_entropy(exact_estimates(profiles, static_cast<std::size_t>(std::log2(profiles.size())) - 1));
}

/// Hard labels for a feature vector from stored per-leaf estimates.
inline Bits predict_labels(const DecisionConfig &tree, const LeafEstimates &est, const Bits &x, const Bits &tie_break) {
    const auto leaf = detail::traverse_bits(tree, x);
    Bits out(est.m);
    for (std::size_t j = 0; j < est.m; ++j) {
        const double p1 = est.label[leaf][j];
        out[j] = est.defined[leaf] ? argmax_label({1.0 - p1, p1}, tie_break[j]) : tie_break[j];
    }
    return out;
}

/// Mean over labels of the mean per-class recall; label classes absent
/// from `rows` are left out of that label's average.
inline double fitness_balanced_accuracy(const DecisionConfig &tree, const LeafEstimates &est,
                                        const std::vector<Sample> &rows, const Bits &tie_break) {
    require(!rows.empty(), "fitness_balanced_accuracy: empty data");
    require(tie_break.size() == est.m, "fitness_balanced_accuracy: tie_break must hold one value per label");
    std::vector<std::array<std::uint64_t, 2>> hits(est.m, {0, 0});
    std::vector<std::array<std::uint64_t, 2>> totals(est.m, {0, 0});
    for (const auto &r : rows) {
        const auto pred = predict_labels(tree, est, r.x, tie_break);
        for (std::size_t j = 0; j < est.m; ++j) {
            totals[j][r.y[j]]++;
            hits[j][r.y[j]] += pred[j] == r.y[j];
        }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < est.m; ++j) {
        double recall_sum = 0.0;
        int classes = 0;
        for (int b = 0; b <= 1; ++b) {
            if (totals[j][b] > 0) {
                recall_sum += static_cast<double>(hits[j][b]) / static_cast<double>(totals[j][b]);
                ++classes;
            }
        }
        sum += recall_sum / classes;
    }
    return sum / static_cast<double>(est.m);
}

struct TreeEvaluation {
    LeafEstimates estimates;
    double entropy = 0.0;
    double balanced_accuracy = 0.0;
    double fitness = 0.0;
};

/// Evaluates configurations against one training set; the joint
/// distribution and tie-break are computed once.
class FitnessEvaluator {
  public:
    FitnessEvaluator(const Dataset &train, double f_ent, double f_bac, FitnessOptions options)
        : rows_(train.rows), joint_(train.joint()), f_ent_(f_ent), f_bac_(f_bac), options_(std::move(options)) {
        train.validate();
        require(f_ent >= 0.0 && f_bac >= 0.0, "fitness weights must be non-negative");
        require(options_.mode == FitnessMode::Exact || options_.shots >= 1, "sampled fitness needs N >= 1");
        tie_break_ = options_.tie_break ? *options_.tie_break : majority_labels(joint_);
        require(tie_break_.size() == static_cast<std::size_t>(train.m), "tie_break must hold one value per label");
    }

    const JointDistribution &joint() const { return joint_; }
    const Bits &tie_break() const { return tie_break_; }
    const FitnessOptions &options() const { return options_; }
    int k() const { return joint_.k(); }

    LeafEstimates leaf_estimates(const CompressedConfig &config, std::uint64_t seed) const {
        if (options_.mode == FitnessMode::Exact) {
            return exact_estimates(leaf_profiles(joint_, expand(config)), config.depth());
        }
        const auto shots = sample_shots(build_tree_circuit(joint_, config), options_.shots, seed);
        return estimate(shots, config.depth(), static_cast<std::size_t>(joint_.m()));
    }

    TreeEvaluation evaluate(const CompressedConfig &config, std::uint64_t seed = 0) const {
        TreeEvaluation out;
        out.estimates = leaf_estimates(config, seed);
        out.entropy = fitness_entropy(out.estimates);
        out.balanced_accuracy = fitness_balanced_accuracy(expand(config), out.estimates, rows_, tie_break_);
        out.fitness = f_ent_ * out.entropy + f_bac_ * out.balanced_accuracy;
        return out;
    }

  private:
    std::vector<Sample> rows_;
    JointDistribution joint_;
    double f_ent_;
    double f_bac_;
    FitnessOptions options_;
    Bits tie_break_;
};

inline Chromosome random_chromosome(int k, std::size_t depth, std::mt19937_64 &rng) {
    require(depth + 1 <= static_cast<std::size_t>(k), "random_chromosome: need d+1 <= k");
    std::vector<int> genes(Chromosome::length(depth));
    for (std::size_t g = 0; g < genes.size(); ++g) {
        std::uniform_int_distribution<int> pick(static_cast<int>(Chromosome::layer_of(g)) + 1, k);
        genes[g] = pick(rng);
    }
    return Chromosome(k, depth, std::move(genes));
}

/// `count` tournaments of `t` draws with replacement; each keeps the fittest
/// draw, ties going to the lowest population index.
inline std::vector<std::size_t> tournament_select(const std::vector<double> &fitness, std::size_t t, std::size_t count,
                                                  std::mt19937_64 &rng) {
    require(!fitness.empty(), "tournament_select: empty population");
    require(t >= 1 && t <= fitness.size(), "tournament_select: t must lie in [1, P]");
    std::uniform_int_distribution<std::size_t> pick(0, fitness.size() - 1);
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        std::size_t winner = pick(rng);
        for (std::size_t draw = 1; draw < t; ++draw) {
            const std::size_t i = pick(rng);
            if (fitness[i] > fitness[winner] || (fitness[i] == fitness[winner] && i < winner)) {
                winner = i;
            }
        }
        out.push_back(winner);
    }
    return out;
}

/// Exchanges the tails behind a cut drawn from {1, ..., L-1} (both segments
/// non-empty) with probability p_c. Returns whether the pair was modified.
inline bool single_point_crossover(Chromosome &a, Chromosome &b, double p_crossover, std::mt19937_64 &rng) {
    require(a.size() == b.size() && a.k() == b.k(), "single_point_crossover: chromosomes differ in shape");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (!(coin(rng) < p_crossover) || a.size() < 2) {
        return false;
    }
    const auto cut = std::uniform_int_distribution<std::size_t>(1, a.size() - 1)(rng);
    auto ga = a.genes();
    auto gb = b.genes();
    std::swap_ranges(ga.begin() + static_cast<std::ptrdiff_t>(cut), ga.end(), gb.begin() + static_cast<std::ptrdiff_t>(cut));
    a = Chromosome(a.k(), a.depth(), std::move(ga));
    b = Chromosome(b.k(), b.depth(), std::move(gb));
    return true;
}

/// With probability p_m, redraws every attribute independently with
/// probability p_a from its full range. Returns whether any draw happened.
inline bool uniform_mutation(Chromosome &a, double p_mutation, double p_attribute, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (!(coin(rng) < p_mutation)) {
        return false;
    }
    auto genes = a.genes();
    bool touched = false;
    for (std::size_t g = 0; g < genes.size(); ++g) {
        if (coin(rng) < p_attribute) {
            genes[g] = std::uniform_int_distribution<int>(a.lower_bound(g), a.upper_bound(g))(rng);
            touched = true;
        }
    }
    a = Chromosome(a.k(), a.depth(), std::move(genes));
    return touched;
}

struct Individual {
    Chromosome chromosome;
    double fitness = 0.0;
};

struct GenerationStats {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t evaluations = 0;
    std::vector<int> best_genes;
};

struct GaResult {
    CompressedConfig best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> trace;
    std::vector<std::vector<Individual>> populations; ///< population after each generation (index 0 = initial)
    std::size_t evaluations = 0;
};

namespace detail {

inline std::size_t best_index(const std::vector<Individual> &pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness > pop[best].fitness) {
            best = i;
        }
    }
    return best;
}

inline GenerationStats generation_stats(std::size_t g, const std::vector<Individual> &pop, std::size_t evaluations) {
    GenerationStats s;
    s.generation = g;
    const auto b = best_index(pop);
    s.best_fitness = pop[b].fitness;
    s.best_genes = pop[b].chromosome.genes();
    for (const auto &ind : pop) {
        s.mean_fitness += ind.fitness;
    }
    s.mean_fitness /= static_cast<double>(pop.size());
    s.evaluations = evaluations;
    return s;
}

/// Replaces each fitness by the mean over identical chromosomes.
inline void average_identical(std::vector<Individual> &pop) {
    std::map<std::vector<int>, std::pair<double, std::size_t>> groups;
    for (const auto &ind : pop) {
        auto &g = groups[ind.chromosome.genes()];
        g.first += ind.fitness;
        g.second += 1;
    }
    for (auto &ind : pop) {
        const auto &g = groups[ind.chromosome.genes()];
        ind.fitness = g.first / static_cast<double>(g.second);
    }
}

} // namespace detail

/// Elitist GA: tournament selection of P-1 individuals, single-point
/// crossover on consecutive pairs, uniform mutation, then the previous
/// generation's best is reinserted; the best individual ever seen is
/// returned. Only new or modified chromosomes are
/// re-evaluated; evaluation seeds depend on (seed, generation, index).
inline GaResult genetic_grow(const FitnessEvaluator &evaluator, std::size_t depth, const GaHyperparams &theta,
                             std::uint64_t seed, bool keep_populations = false) {
    theta.validate();
    const int k = evaluator.k();
    require(depth + 1 <= static_cast<std::size_t>(k), "genetic_grow: need d+1 <= k");
    std::mt19937_64 rng(seed);
    std::size_t evaluations = 0;
    auto evaluate = [&](const Chromosome &c, std::size_t generation, std::size_t index) {
        ++evaluations;
        return evaluator.evaluate(decode_chromosome(c), derive_seed(seed, generation, index)).fitness;
    };

    GaResult result{decode_chromosome(random_chromosome(k, depth, rng)), 0.0, {}, {}, 0};
    if (theta.population == 1) {
        result.best_fitness = evaluate(encode_chromosome(result.best), 0, 0);
        result.evaluations = evaluations;
        result.trace.push_back({0, result.best_fitness, result.best_fitness, evaluations, encode_chromosome(result.best).genes()});
        return result;
    }

    std::vector<Individual> pop;
    for (std::size_t i = 0; i < theta.population; ++i) {
        auto c = random_chromosome(k, depth, rng);
        const double f = evaluate(c, 0, i);
        pop.push_back({std::move(c), f});
    }
    if (evaluator.options().mode == FitnessMode::Sampled) {
        detail::average_identical(pop);
    }
    result.trace.push_back(detail::generation_stats(0, pop, evaluations));
    if (keep_populations) {
        result.populations.push_back(pop);
    }
    Individual best_ever = pop[detail::best_index(pop)];

    for (std::size_t g = 1; g <= theta.generations; ++g) {
        const Individual elite = pop[detail::best_index(pop)];
        std::vector<double> fitness;
        for (const auto &ind : pop) {
            fitness.push_back(ind.fitness);
        }
        std::vector<Individual> next;
        for (auto i : tournament_select(fitness, theta.tournament, theta.population - 1, rng)) {
            next.push_back(pop[i]);
        }
        std::vector<bool> changed(next.size(), false);
        for (std::size_t u = 0; u + 1 < next.size(); u += 2) {
            if (single_point_crossover(next[u].chromosome, next[u + 1].chromosome, theta.p_crossover, rng)) {
                changed[u] = changed[u + 1] = true;
            }
        }
        for (std::size_t u = 0; u < next.size(); ++u) {
            if (uniform_mutation(next[u].chromosome, theta.p_mutation, theta.p_attribute, rng)) {
                changed[u] = true;
            }
        }
        for (std::size_t u = 0; u < next.size(); ++u) {
            if (changed[u]) {
                next[u].fitness = evaluate(next[u].chromosome, g, u);
            }
        }
        next.push_back(elite);
        pop = std::move(next);
        if (evaluator.options().mode == FitnessMode::Sampled) {
            detail::average_identical(pop);
        }
        result.trace.push_back(detail::generation_stats(g, pop, evaluations));
        if (keep_populations) {
            result.populations.push_back(pop);
        }
        const auto b = detail::best_index(pop);
        if (pop[b].fitness > best_ever.fitness) {
            best_ever = pop[b];
        }
    }
    result.best = decode_chromosome(best_ever.chromosome);
    result.best_fitness = best_ever.fitness;
    result.evaluations = evaluations;
    return result;
}

inline GaResult genetic_grow(const Dataset &train, std::size_t depth, const GaHyperparams &theta,
                             const FitnessOptions &options, std::uint64_t seed) {
    const FitnessEvaluator evaluator(train, theta.f_ent, theta.f_bac, options);
    return genetic_grow(evaluator, depth, theta, seed);
}

inline std::string trace_to_csv(const std::vector<GenerationStats> &trace) {
    std::ostringstream out;
    out.precision(10);
    out << "generation,best_fitness,mean_fitness,evaluations,best_chromosome\n";
    for (const auto &s : trace) {
        out << s.generation << ',' << s.best_fitness << ',' << s.mean_fitness << ',' << s.evaluations << ',';
        for (std::size_t i = 0; i < s.best_genes.size(); ++i) {
            out << (i ? " " : "") << s.best_genes[i];
        }
        out << '\n';
    }
    return out.str();
}

struct BaselineResult {
    std::vector<CompressedConfig> configs;
    std::vector<double> fitness;
    std::vector<double> balanced_accuracy;
    double mean_bac = 0.0;
    double std_bac = 0.0;
    double mean_fitness = 0.0;
};

/// `count` configurations drawn uniformly from the solution domain and
/// evaluated like induced trees.
inline BaselineResult random_baseline(const FitnessEvaluator &evaluator, std::size_t depth, std::size_t count,
                                      std::uint64_t seed) {
    require(count >= 1, "random_baseline: count must be at least 1");
    std::mt19937_64 rng(seed);
    BaselineResult out;
    for (std::size_t i = 0; i < count; ++i) {
        out.configs.push_back(decode_chromosome(random_chromosome(evaluator.k(), depth, rng)));
        const auto ev = evaluator.evaluate(out.configs.back(), derive_seed(seed, 0, i));
        out.fitness.push_back(ev.fitness);
        out.balanced_accuracy.push_back(ev.balanced_accuracy);
        out.mean_bac += ev.balanced_accuracy;
        out.mean_fitness += ev.fitness;
    }
    const double n = static_cast<double>(count);
    out.mean_bac /= n;
    out.mean_fitness /= n;
    for (double b : out.balanced_accuracy) {
        out.std_bac += (b - out.mean_bac) * (b - out.mean_bac);
    }
    out.std_bac = count > 1 ? std::sqrt(out.std_bac / (n - 1.0)) : 0.0;
    return out;
}

} // namespace qtree
