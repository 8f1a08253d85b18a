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
 * Datasets: the tic-tac-toe endgame corpus, the seven-feature toy set,
 * binary CSV files and stratified train/test splitting.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtree/common.hpp"
#include "qtree/prob_engine.hpp"

namespace qtree {

/// Dense simulation needs 2^(k+m) amplitudes; wider datasets are refused.
inline constexpr int kMaxFeatureBits = 20;

struct Dataset {
    std::string name;
    std::string provenance;
    int k = 0;
    int m = 0;
    std::vector<Sample> rows;

    std::size_t size() const { return rows.size(); }

    void validate() const {
        require(k >= 1 && k <= kMaxFeatureBits, "dataset: k must lie in [1, " + std::to_string(kMaxFeatureBits) + "]");
        require(m >= 1, "dataset: at least one label bit required");
        for (std::size_t r = 0; r < rows.size(); ++r) {
            require(rows[r].x.size() == static_cast<std::size_t>(k) && rows[r].y.size() == static_cast<std::size_t>(m),
                    "dataset: row " + std::to_string(r + 1) + " has inconsistent width");
        }
    }

    JointDistribution joint() const { return distribution_from_dataset(rows); }
};

inline constexpr int kBoardFields = 9;
inline constexpr int kBoardBits = 15;

/// Base-3 value of the nine ternary fields (first field most significant),
/// written as 15 bits with x_1 most significant.
inline Bits encode_board(const std::array<int, kBoardFields> &fields) {
    std::uint64_t value = 0;
    for (int f : fields) {
        require(f >= 0 && f <= 2, "encode_board: field values must be 0, 1 or 2");
        value = value * 3 + static_cast<std::uint64_t>(f);
    }
    return index_to_bits(value, kBoardBits);
}

inline std::array<int, kBoardFields> decode_board(const Bits &bits) {
    require(bits.size() == kBoardBits, "decode_board: expected 15 bits");
    auto value = bits_to_index(bits);
    require(value < 19683, "decode_board: value exceeds 3^9 - 1");
    std::array<int, kBoardFields> fields{};
    for (int i = kBoardFields - 1; i >= 0; --i) {
        fields[static_cast<std::size_t>(i)] = static_cast<int>(value % 3);
        value /= 3;
    }
    return fields;
}

namespace detail {

inline std::vector<std::string> split_commas(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) {
            cell.pop_back();
        }
        const auto start = cell.find_first_not_of(" \t");
        out.push_back(start == std::string::npos ? std::string() : cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

} // namespace detail

/// Parses the UCI attribute format "x,o,b,...,positive|negative" (x moves
/// first; x -> 0, o -> 1, b -> 2; positive means x won).
inline Dataset parse_tictactoe(std::istream &in, const std::string &source = "<stream>") {
    Dataset data;
    data.name = "tic-tac-toe";
    data.provenance = source;
    data.k = kBoardBits;
    data.m = 1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const auto cells = detail::split_commas(line);
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        require(cells.size() == kBoardFields + 1,
                where + "expected 10 comma-separated values, got " + std::to_string(cells.size()));
        std::array<int, kBoardFields> fields{};
        for (int i = 0; i < kBoardFields; ++i) {
            const auto &c = cells[static_cast<std::size_t>(i)];
            if (c == "x") {
                fields[static_cast<std::size_t>(i)] = 0;
            } else if (c == "o") {
                fields[static_cast<std::size_t>(i)] = 1;
            } else if (c == "b") {
                fields[static_cast<std::size_t>(i)] = 2;
            } else {
                throw ValidationError(where + "field " + std::to_string(i + 1) + " must be x, o or b, got '" + c + "'");
            }
        }
        const auto &label = cells.back();
        require(label == "positive" || label == "negative", where + "label must be positive or negative, got '" + label + "'");
        data.rows.push_back({encode_board(fields), {static_cast<std::uint8_t>(label == "positive")}});
    }
    require(!data.rows.empty(), source + ": no rows");
    return data;
}

inline Dataset load_tictactoe(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return parse_tictactoe(in, path);
}

/// Five 7-bit rows whose label is the parity of the features.
inline Dataset load_toy() {
    Dataset data;
    data.name = "toy";
    data.provenance = "five-row parity set";
    data.k = 7;
    data.m = 1;
    for (const char *row : {"1100000", "0110000", "0010000", "0000000", "1110000"}) {
        auto x = bits_from_string(row);
        std::uint8_t parity = 0;
        for (auto b : x) {
            parity ^= b;
        }
        data.rows.push_back({std::move(x), {parity}});
    }
    return data;
}

/// Binary CSV with header x1,...,xk,y1,...,ym and 0/1 cells.
inline Dataset parse_binary_csv(std::istream &in, const std::string &source = "<stream>") {
    Dataset data;
    data.name = source;
    data.provenance = source;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        auto cells = detail::split_commas(line);
        if (header.empty()) {
            header = cells;
            for (const auto &h : header) {
                if (h.size() >= 2 && h[0] == 'x') {
                    require(data.m == 0, where + "feature columns must precede label columns");
                    ++data.k;
                } else if (h.size() >= 2 && h[0] == 'y') {
                    ++data.m;
                } else {
                    throw ValidationError(where + "header cells must be x<i> or y<j>, got '" + h + "'");
                }
            }
            require(data.k >= 1 && data.m >= 1, where + "header needs feature and label columns");
            continue;
        }
        require(cells.size() == header.size(), where + "expected " + std::to_string(header.size()) + " cells");
        Sample s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            require(cells[c] == "0" || cells[c] == "1", where + "cell " + std::to_string(c + 1) + " must be 0 or 1");
            (c < static_cast<std::size_t>(data.k) ? s.x : s.y).push_back(static_cast<std::uint8_t>(cells[c][0] - '0'));
        }
        data.rows.push_back(std::move(s));
    }
    require(!header.empty(), source + ": missing header");
    require(!data.rows.empty(), source + ": no rows");
    data.validate();
    return data;
}

inline std::string dataset_to_csv(const Dataset &data) {
    std::ostringstream out;
    for (int i = 1; i <= data.k; ++i) {
        out << (i > 1 ? "," : "") << 'x' << i;
    }
    for (int j = 1; j <= data.m; ++j) {
        out << ",y" << j;
    }
    out << '\n';
    for (const auto &r : data.rows) {
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            out << (i ? "," : "") << int(r.x[i]);
        }
        for (auto b : r.y) {
            out << ',' << int(b);
        }
        out << '\n';
    }
    return out.str();
}

/// "toy", a UCI tic-tac-toe .data file, or a binary CSV.
inline Dataset load_dataset(const std::string &spec) {
    if (spec == "toy") {
        return load_toy();
    }
    std::ifstream in(spec);
    if (!in) {
        throw std::runtime_error("cannot open " + spec);
    }
    if (spec.size() >= 5 && spec.substr(spec.size() - 5) == ".data") {
        return parse_tictactoe(in, spec);
    }
    return parse_binary_csv(in, spec);
}

struct Split {
    Dataset train;
    Dataset test;
};

/// Per label class, a seeded shuffle sends round(fraction * size) rows to
/// train and the rest to test; row order within each part follows the input.
inline Split stratified_split(const Dataset &data, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, "stratified_split: fraction must lie in (0, 1)");
    std::map<Bits, std::vector<std::size_t>> classes;
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        classes[data.rows[r].y].push_back(r);
    }
    std::vector<bool> to_train(data.rows.size(), false);
    std::mt19937_64 rng(seed);
    for (auto &[label, idx] : classes) {
        require(idx.size() >= 2, "stratified_split: label class " + bits_to_string(label) + " has fewer than 2 rows");
        std::shuffle(idx.begin(), idx.end(), rng);
        auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
        for (std::size_t i = 0; i < take; ++i) {
            to_train[idx[i]] = true;
        }
    }
    Split out;
    out.train = Dataset{data.name + "/train", data.provenance, data.k, data.m, {}};
    out.test = Dataset{data.name + "/test", data.provenance, data.k, data.m, {}};
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        (to_train[r] ? out.train : out.test).rows.push_back(data.rows[r]);
    }
    return out;
}

} // namespace qtree
