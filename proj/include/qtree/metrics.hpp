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
 * Binary classification metrics; entries that divide by zero stay empty.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtree/common.hpp"

namespace qtree {

struct ConfusionCounts {
    /// counts[truth][prediction]
    std::array<std::array<std::uint64_t, 2>, 2> counts{};

    std::uint64_t tp(int b) const { return counts[b][b]; }
    std::uint64_t fn(int b) const { return counts[b][1 - b]; }
    std::uint64_t fp(int b) const { return counts[1 - b][b]; }
    std::uint64_t tn(int b) const { return counts[1 - b][1 - b]; }
    std::uint64_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
};

struct MetricsReport {
    std::optional<double> bac;
    std::optional<double> acc;
    std::array<std::optional<double>, 2> pre;
    std::array<std::optional<double>, 2> rec;
    std::array<std::optional<double>, 2> f1;
    ConfusionCounts confusion;
};

namespace detail {

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace detail

inline ConfusionCounts confusion_counts(const std::vector<std::uint8_t> &y_true, const std::vector<std::uint8_t> &y_pred) {
    require(!y_true.empty(), "compute_metrics: empty inputs");
    require(y_true.size() == y_pred.size(), "compute_metrics: label vectors differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        require(y_true[i] <= 1 && y_pred[i] <= 1, "compute_metrics: labels must be 0 or 1");
        c.counts[y_true[i]][y_pred[i]]++;
    }
    return c;
}

inline MetricsReport compute_metrics(const std::vector<std::uint8_t> &y_true, const std::vector<std::uint8_t> &y_pred) {
    MetricsReport r;
    r.confusion = confusion_counts(y_true, y_pred);
    const auto &c = r.confusion;
    for (int b = 0; b <= 1; ++b) {
        r.pre[b] = detail::ratio(c.tp(b), c.tp(b) + c.fp(b));
        r.rec[b] = detail::ratio(c.tp(b), c.tp(b) + c.fn(b));
        if (r.pre[b] && r.rec[b] && *r.pre[b] + *r.rec[b] > 0.0) {
            r.f1[b] = 2.0 * *r.pre[b] * *r.rec[b] / (*r.pre[b] + *r.rec[b]);
        }
    }
    if (r.rec[0] && r.rec[1]) {
        r.bac = 0.5 * (*r.rec[0] + *r.rec[1]);
    }
    r.acc = detail::ratio(c.tp(0) + c.tn(0), c.total());
    return r;
}

} // namespace qtree
