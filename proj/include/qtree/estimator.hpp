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
 * Shot-count estimators with binomial / ratio-of-binomials uncertainties,
 * error propagation for averaged predictions, and truncated-normal noise fits.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "qtree/common.hpp"
#include "qtree/prob_engine.hpp"
#include "qtree/statevector.hpp"

namespace qtree {

/// Raw tallies of a tree-circuit shot log, one entry per leaf nu = 1..2^{d+1}.
struct LeafCounts {
    std::size_t depth = 0;
    std::size_t m = 0;
    std::uint64_t shots = 0;
    std::vector<std::uint64_t> reach;              ///< n(C_nu)
    std::vector<std::vector<std::uint64_t>> ones;  ///< n_i^1 per leaf and label
    std::vector<std::vector<std::uint64_t>> zeros; ///< n_i^0 per leaf and label
};

/// Bins a shot log whose strings read x̄_1..x̄_{d+1} ȳ_1..ȳ_m.
inline LeafCounts tally_counts(const ShotResult &shots, std::size_t depth, std::size_t m) {
    require(shots.width == depth + 1 + m, "tally_counts: bit strings must have length d+1+m");
    require(shots.counts.size() == pow2(shots.width), "tally_counts: malformed shot table");
    LeafCounts out;
    out.depth = depth;
    out.m = m;
    const std::size_t leaves = pow2(depth + 1);
    out.reach.assign(leaves, 0);
    out.ones.assign(leaves, std::vector<std::uint64_t>(m, 0));
    out.zeros.assign(leaves, std::vector<std::uint64_t>(m, 0));
    for (std::size_t s = 0; s < shots.counts.size(); ++s) {
        const auto c = shots.counts[s];
        if (c == 0) {
            continue;
        }
        const std::size_t leaf = s >> m;
        out.reach[leaf] += c;
        out.shots += c;
        for (std::size_t j = 0; j < m; ++j) {
            if ((s >> (m - 1 - j)) & 1u) {
                out.ones[leaf][j] += c;
            } else {
                out.zeros[leaf][j] += c;
            }
        }
    }
    return out;
}

struct Interval {
    double estimate = 0.0;
    double sigma = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::optional<std::string> warning;
};

/// Two-sided standard-normal quantile z_{alpha/2}.
inline double normal_quantile_two_sided(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

/// Wald interval p̂ ± z sqrt(p̂(1-p̂)/N), clipped to [0, 1].
inline Interval binomial_interval(std::uint64_t n, std::uint64_t shots, double alpha = 0.05) {
    require(shots >= 1 && n <= shots, "binomial_interval: need 0 <= n <= N and N >= 1");
    const double z = normal_quantile_two_sided(alpha);
    Interval out;
    out.estimate = static_cast<double>(n) / static_cast<double>(shots);
    out.sigma = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(shots));
    out.lo = std::max(0.0, out.estimate - z * out.sigma);
    out.hi = std::min(1.0, out.estimate + z * out.sigma);
    return out;
}

/// E[1/m] for m ~ Binomial(N, q) conditioned on m >= 1.
inline double zeta_expectation(std::uint64_t shots, double q) {
    require(shots >= 1, "zeta_expectation: N must be at least 1");
    require(q > 0.0 && q <= 1.0, "zeta_expectation: q must lie in (0, 1]");
    const double n = static_cast<double>(shots);
    if (q == 1.0) {
        return 1.0 / n;
    }
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    const double log_b0 = std::log(-std::expm1(n * log_1mq));
    const double log_nfact = std::lgamma(n + 1.0);
    // Terms beyond 40 standard deviations of the mode are below 1e-300.
    const double centre = n * q;
    const double spread = 40.0 * std::sqrt(n * q * (1.0 - q)) + 50.0;
    const auto first = static_cast<std::uint64_t>(std::max(1.0, std::floor(centre - spread)));
    const auto last = static_cast<std::uint64_t>(std::min(n, std::ceil(centre + spread)));
    double sum = 0.0;
    for (std::uint64_t mi = first; mi <= last; ++mi) {
        const double m = static_cast<double>(mi);
        const double log_term = log_nfact - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) + m * log_q +
                                (n - m) * log_1mq - log_b0;
        sum += std::exp(log_term) / m;
    }
    return sum;
}

/// Below this shot count the plug-in q = m/N is flagged as unreliable.
inline constexpr std::uint64_t kSmallSampleWarning = 30;

/// Interval for p̂' = k/m where m itself is a binomial count out of N shots.
inline Interval ratio_interval(std::uint64_t k, std::uint64_t m, std::uint64_t shots, double alpha = 0.05) {
    require(m >= 1, "ratio_interval: m must be at least 1");
    require(m <= shots && k <= m, "ratio_interval: need 0 <= k <= m <= N");
    const double z = normal_quantile_two_sided(alpha);
    Interval out;
    out.estimate = static_cast<double>(k) / static_cast<double>(m);
    const double zeta = zeta_expectation(shots, static_cast<double>(m) / static_cast<double>(shots));
    out.sigma = std::sqrt(out.estimate * (1.0 - out.estimate) * zeta);
    out.lo = std::max(0.0, out.estimate - z * out.sigma);
    out.hi = std::min(1.0, out.estimate + z * out.sigma);
    if (shots < kSmallSampleWarning) {
        out.warning = "N = " + std::to_string(shots) + " < " + std::to_string(kSmallSampleWarning) +
                      ": plug-in q = m/N is a rough approximation";
    }
    return out;
}

/// Per-leaf probability estimates; label quantities refer to p(y_i = 1 | C_nu).
struct LeafEstimates {
    std::size_t depth = 0;
    std::size_t m = 0;
    std::uint64_t shots = 0; ///< 0 marks exact (unsampled) estimates
    std::vector<std::uint64_t> reach_counts;
    std::vector<double> reach;
    std::vector<double> reach_sigma;
    std::vector<std::vector<double>> label;
    std::vector<std::vector<double>> label_sigma;
    std::vector<bool> defined;
    std::vector<std::string> warnings;

    std::size_t leaf_count() const { return reach.size(); }

    LeafProfile profile(std::size_t leaf) const {
        LeafProfile out;
        out.reach_prob = reach[leaf];
        out.defined = defined[leaf];
        for (double p1 : label[leaf]) {
            out.label_marginals.push_back({1.0 - p1, p1});
        }
        return out;
    }
};

/// Plug-in ratios of the counts; zero-count leaves get the agnostic 1/2.
inline LeafEstimates estimate(const LeafCounts &counts) {
    require(counts.shots >= 1, "estimate: no shots");
    LeafEstimates out;
    out.depth = counts.depth;
    out.m = counts.m;
    out.shots = counts.shots;
    out.reach_counts = counts.reach;
    const std::size_t leaves = counts.reach.size();
    std::uint64_t total = 0;
    for (auto n : counts.reach) {
        total += n;
    }
    require(total == counts.shots, "estimate: leaf counts must add up to N");
    out.defined.assign(leaves, false);
    out.label.assign(leaves, std::vector<double>(counts.m, 0.5));
    out.label_sigma.assign(leaves, std::vector<double>(counts.m, 0.0));
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        const auto b = binomial_interval(counts.reach[leaf], counts.shots);
        out.reach.push_back(b.estimate);
        out.reach_sigma.push_back(b.sigma);
        const auto n = counts.reach[leaf];
        if (n == 0) {
            continue;
        }
        out.defined[leaf] = true;
        for (std::size_t j = 0; j < counts.m; ++j) {
            require(counts.ones[leaf][j] + counts.zeros[leaf][j] == n, "estimate: label counts inconsistent with leaf");
            const auto r = ratio_interval(counts.ones[leaf][j], n, counts.shots);
            out.label[leaf][j] = r.estimate;
            out.label_sigma[leaf][j] = r.sigma;
        }
    }
    if (counts.shots < kSmallSampleWarning) {
        out.warnings.push_back("N = " + std::to_string(counts.shots) + " is below " +
                               std::to_string(kSmallSampleWarning) + "; uncertainties are rough");
    }
    return out;
}

inline LeafEstimates estimate(const ShotResult &shots, std::size_t depth, std::size_t m) {
    return estimate(tally_counts(shots, depth, m));
}

/// Exact-mode estimates (all sigmas zero) from classical leaf profiles.
inline LeafEstimates exact_estimates(const std::vector<LeafProfile> &profiles, std::size_t depth) {
    require(profiles.size() == pow2(depth + 1), "exact_estimates: one profile per leaf required");
    LeafEstimates out;
    out.depth = depth;
    out.m = profiles.front().label_marginals.size();
    for (const auto &p : profiles) {
        out.reach_counts.push_back(0);
        out.reach.push_back(p.reach_prob);
        out.reach_sigma.push_back(0.0);
        std::vector<double> lab;
        for (const auto &lm : p.label_marginals) {
            lab.push_back(lm[1]);
        }
        out.label.push_back(lab);
        out.label_sigma.emplace_back(lab.size(), 0.0);
        out.defined.push_back(p.defined);
    }
    return out;
}

/// sigma of sum_nu p̂_reach(nu) p̂_label(nu), assuming independent factors.
inline double propagate_prediction_std(const std::vector<double> &reach, const std::vector<double> &reach_sigma,
                                       const std::vector<double> &label, const std::vector<double> &label_sigma) {
    require(reach.size() == reach_sigma.size() && reach.size() == label.size() && reach.size() == label_sigma.size(),
            "propagate_prediction_std: leaf sets must match");
    double var = 0.0;
    for (std::size_t i = 0; i < reach.size(); ++i) {
        var += label[i] * label[i] * reach_sigma[i] * reach_sigma[i] + reach[i] * reach[i] * label_sigma[i] * label_sigma[i];
    }
    return std::sqrt(var);
}

struct TruncatedNormalFit {
    double mu = 0.0;
    double sigma = 0.0;
    double log_likelihood = 0.0;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Log-likelihood of samples under N(mu, sigma^2) truncated to (0, 1).
inline double truncated_normal_loglik(const std::vector<double> &xs, double mu, double sigma) {
    const double mass = normal_cdf((1.0 - mu) / sigma) - normal_cdf(-mu / sigma);
    if (!(mass > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    double ll = 0.0;
    for (double x : xs) {
        const double z = (x - mu) / sigma;
        ll -= 0.5 * z * z;
    }
    const double n = static_cast<double>(xs.size());
    return ll - n * (std::log(sigma) + 0.5 * std::log(2.0 * M_PI) + std::log(mass));
}

inline double negative_loglik(const gsl_vector *v, void *params) {
    const auto &xs = *static_cast<const std::vector<double> *>(params);
    const double ll = truncated_normal_loglik(xs, gsl_vector_get(v, 0), std::exp(gsl_vector_get(v, 1)));
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
}

} // namespace detail

/// Maximum-likelihood (mu, sigma) of a normal truncated to (0, 1), found by
/// Nelder-Mead over (mu, log sigma).
inline TruncatedNormalFit fit_truncated_normal(const std::vector<double> &samples) {
    require(samples.size() >= 2, "fit_truncated_normal: at least two samples required");
    for (double x : samples) {
        require(x >= 0.0 && x <= 1.0, "fit_truncated_normal: samples must lie in [0, 1]");
    }
    double mean = 0.0;
    for (double x : samples) {
        mean += x;
    }
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(samples.size());
    if (var == 0.0) {
        return TruncatedNormalFit{mean, 0.0, 0.0};
    }
    const double sd = std::sqrt(var);

    gsl_multimin_function fn;
    fn.n = 2;
    fn.f = &detail::negative_loglik;
    fn.params = const_cast<std::vector<double> *>(&samples);
    gsl_vector *start = gsl_vector_alloc(2);
    gsl_vector *step = gsl_vector_alloc(2);
    gsl_vector_set(start, 0, mean);
    gsl_vector_set(start, 1, std::log(sd));
    gsl_vector_set(step, 0, 0.5 * sd);
    gsl_vector_set(step, 1, 0.5);
    gsl_multimin_fminimizer *solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(solver, &fn, start, step);
    for (int iter = 0; iter < 2000; ++iter) {
        if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-10) == GSL_SUCCESS) {
            break;
        }
    }
    TruncatedNormalFit out;
    out.mu = gsl_vector_get(solver->x, 0);
    out.sigma = std::exp(gsl_vector_get(solver->x, 1));
    out.log_likelihood = -solver->fval;
    gsl_multimin_fminimizer_free(solver);
    gsl_vector_free(step);
    gsl_vector_free(start);
    return out;
}

/// Repeated estimates for one measured bit string (or leaf). The label
/// series is optional and describes p(y | C) estimates of the same leaf.
struct NoiseSeries {
    std::string bitstring;
    double p_exact = 0.0;
    std::vector<double> estimates;
    std::optional<double> label_exact;
    std::vector<double> label_estimates;
};

struct NoiseFit {
    std::string bitstring;
    double p_exact = 0.0;
    double p_hat = 0.0; ///< mean of the repeated estimates
    double sigma = 0.0; ///< sample standard deviation of the repeated estimates
    double mu_eps = 0.0;
    double sigma_eps = 0.0;
    std::optional<double> mu_eps_label;
    std::optional<double> sigma_eps_label;
};

inline NoiseFit fit_truncated_normal_noise(const NoiseSeries &series) {
    NoiseFit out;
    out.bitstring = series.bitstring;
    out.p_exact = series.p_exact;
    const auto fit = fit_truncated_normal(series.estimates);
    double mean = 0.0;
    for (double x : series.estimates) {
        mean += x;
    }
    mean /= static_cast<double>(series.estimates.size());
    double var = 0.0;
    for (double x : series.estimates) {
        var += (x - mean) * (x - mean);
    }
    out.p_hat = mean;
    out.sigma = std::sqrt(var / static_cast<double>(series.estimates.size() - 1));
    out.mu_eps = fit.mu - series.p_exact;
    out.sigma_eps = fit.sigma;
    if (series.label_exact) {
        const auto lfit = fit_truncated_normal(series.label_estimates);
        out.mu_eps_label = lfit.mu - *series.label_exact;
        out.sigma_eps_label = lfit.sigma;
    }
    return out;
}

inline std::vector<NoiseFit> fit_truncated_normal_noise(const std::vector<NoiseSeries> &series) {
    std::vector<NoiseFit> out;
    out.reserve(series.size());
    for (const auto &s : series) {
        out.push_back(fit_truncated_normal_noise(s));
    }
    return out;
}

inline std::string noise_fit_csv(const std::vector<NoiseFit> &rows) {
    std::ostringstream out;
    out.precision(10);
    out << "bitstring,p_exact,p_hat,sigma,mu_eps,sigma_eps,mu_eps_label,sigma_eps_label\n";
    for (const auto &r : rows) {
        out << r.bitstring << ',' << r.p_exact << ',' << r.p_hat << ',' << r.sigma << ',' << r.mu_eps << ','
            << r.sigma_eps << ',';
        if (r.mu_eps_label) {
            out << *r.mu_eps_label << ',' << *r.sigma_eps_label;
        } else {
            out << ',';
        }
        out << '\n';
    }
    return out.str();
}

} // namespace qtree
