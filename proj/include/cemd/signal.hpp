#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cemd {

// One grid position. Ordering is (col, row) so that iterating a Support
// walks the grid column by column.
struct GridIndex {
    int row = 0;
    int col = 0;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
    friend auto operator<=>(const GridIndex& a, const GridIndex& b) {
        if (auto c = a.col <=> b.col; c != 0) return c;
        return a.row <=> b.row;
    }
};

// Real h x w signal grid, stored column-major: entry (r, c) lives at
// c * h + r. Entries must stay finite; NaN/inf are rejected on entry.
class SignalMatrix {
public:
    SignalMatrix(int h, int w) : h_(h), w_(w), values_(check_dims(h, w), 0.0) {}

    SignalMatrix(int h, int w, std::vector<double> values)
        : h_(h), w_(w), values_(std::move(values)) {
        if (values_.size() != static_cast<std::size_t>(check_dims(h, w)))
            throw std::invalid_argument("SignalMatrix: values length must be h*w");
        for (double v : values_) check_finite(v);
    }

    // Row-major literal, convenient for fixtures: {{1,3},{0,-1},{2,1}} is a
    // 3x2 grid.
    static SignalMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const int h = static_cast<int>(rows.size());
        if (h == 0) throw std::invalid_argument("SignalMatrix: empty literal");
        const int w = static_cast<int>(rows.begin()->size());
        SignalMatrix x(h, w);
        int r = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != w)
                throw std::invalid_argument("SignalMatrix: ragged literal");
            int c = 0;
            for (double v : row) x.set(r, c++, v);
            ++r;
        }
        return x;
    }

    int rows() const { return h_; }
    int cols() const { return w_; }
    int size() const { return h_ * w_; }

    double operator()(int r, int c) const { return values_[flat_index(r, c)]; }
    double flat(int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }

    void set(int r, int c, double v) {
        check_finite(v);
        values_[flat_index(r, c)] = v;
    }

    int flat_index(int r, int c) const {
        if (r < 0 || r >= h_ || c < 0 || c >= w_)
            throw std::out_of_range("SignalMatrix: index out of range");
        return c * h_ + r;
    }

    friend bool operator==(const SignalMatrix&, const SignalMatrix&) = default;

private:
    static int check_dims(int h, int w) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("SignalMatrix: dimensions must be positive");
        return h * w;
    }
    static void check_finite(double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("SignalMatrix: entries must be finite");
    }

    int h_;
    int w_;
    std::vector<double> values_;
};

// A set of grid positions, deduplicated and kept sorted by (col, row).
class Support {
public:
    Support() = default;

    explicit Support(std::vector<GridIndex> entries) : entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end());
        entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
    }

    static Support of(std::initializer_list<std::pair<int, int>> row_col_pairs) {
        std::vector<GridIndex> v;
        v.reserve(row_col_pairs.size());
        for (auto [r, c] : row_col_pairs) v.push_back({r, c});
        return Support(std::move(v));
    }

    int size() const { return static_cast<int>(entries_.size()); }
    bool empty() const { return entries_.empty(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    const std::vector<GridIndex>& entries() const { return entries_; }

    bool contains(int row, int col) const {
        return std::binary_search(entries_.begin(), entries_.end(), GridIndex{row, col});
    }

    // Sorted row indices of column c.
    std::vector<int> col_rows(int c) const {
        std::vector<int> rows;
        for (const auto& e : entries_)
            if (e.col == c) rows.push_back(e.row);
        return rows;
    }

    int max_col_sparsity(int w) const {
        std::vector<int> counts(static_cast<std::size_t>(w), 0);
        for (const auto& e : entries_) ++counts[static_cast<std::size_t>(e.col)];
        return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    }

    Support unite(const Support& other) const {
        std::vector<GridIndex> v = entries_;
        v.insert(v.end(), other.entries_.begin(), other.entries_.end());
        return Support(std::move(v));
    }

    bool is_subset_of(const Support& other) const {
        return std::includes(other.entries_.begin(), other.entries_.end(),
                             entries_.begin(), entries_.end());
    }

    friend bool operator==(const Support&, const Support&) = default;

private:
    std::vector<GridIndex> entries_;
};

inline Support support_of(const SignalMatrix& x) {
    std::vector<GridIndex> v;
    for (int c = 0; c < x.cols(); ++c)
        for (int r = 0; r < x.rows(); ++r)
            if (x(r, c) != 0.0) v.push_back({r, c});
    return Support(std::move(v));
}

// x restricted to omega: equal to x on omega, zero elsewhere.
inline SignalMatrix restrict(const SignalMatrix& x, const Support& omega) {
    SignalMatrix out(x.rows(), x.cols());
    for (const auto& e : omega) {
        if (e.row < 0 || e.row >= x.rows() || e.col < 0 || e.col >= x.cols())
            throw std::invalid_argument("restrict: support index out of range");
        out.set(e.row, e.col, x(e.row, e.col));
    }
    return out;
}

// x with the entries on omega zeroed out (restriction to the complement).
inline SignalMatrix restrict_off(const SignalMatrix& x, const Support& omega) {
    SignalMatrix out = x;
    for (const auto& e : omega) {
        if (e.row < 0 || e.row >= x.rows() || e.col < 0 || e.col >= x.cols())
            throw std::invalid_argument("restrict_off: support index out of range");
        out.set(e.row, e.col, 0.0);
    }
    return out;
}

inline void check_norm_index(int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("norm index p must be 1 or 2");
}

inline double lp_norm(const SignalMatrix& x, int p) {
    check_norm_index(p);
    double acc = 0.0;
    if (p == 1) {
        for (double v : x.values()) acc += std::abs(v);
        return acc;
    }
    for (double v : x.values()) acc += v * v;
    return std::sqrt(acc);
}

// Sum of |x_ij|^p; the quantity most of the approximation guarantees are
// stated in.
inline double lp_mass(const SignalMatrix& x, int p) {
    check_norm_index(p);
    double acc = 0.0;
    for (double v : x.values()) acc += (p == 1) ? std::abs(v) : v * v;
    return acc;
}

inline double lp_mass_on(const SignalMatrix& x, const Support& omega, int p) {
    check_norm_index(p);
    double acc = 0.0;
    for (const auto& e : omega) {
        const double v = x(e.row, e.col);
        acc += (p == 1) ? std::abs(v) : v * v;
    }
    return acc;
}

inline SignalMatrix add(const SignalMatrix& a, const SignalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("add: dimension mismatch");
    SignalMatrix out(a.rows(), a.cols());
    for (int c = 0; c < a.cols(); ++c)
        for (int r = 0; r < a.rows(); ++r) out.set(r, c, a(r, c) + b(r, c));
    return out;
}

inline SignalMatrix subtract(const SignalMatrix& a, const SignalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("subtract: dimension mismatch");
    SignalMatrix out(a.rows(), a.cols());
    for (int c = 0; c < a.cols(); ++c)
        for (int r = 0; r < a.rows(); ++r) out.set(r, c, a(r, c) - b(r, c));
    return out;
}

// Text form used by the CLI fixtures: "col:row[,row...];col:..." with
// columns and rows in ascending order. Empty support formats to "".
inline std::string format_support(const Support& omega) {
    std::ostringstream out;
    bool first_col = true;
    int i = 0;
    const auto& es = omega.entries();
    while (i < static_cast<int>(es.size())) {
        const int col = es[static_cast<std::size_t>(i)].col;
        if (!first_col) out << ';';
        first_col = false;
        out << col << ':';
        bool first_row = true;
        while (i < static_cast<int>(es.size()) && es[static_cast<std::size_t>(i)].col == col) {
            if (!first_row) out << ',';
            first_row = false;
            out << es[static_cast<std::size_t>(i)].row;
            ++i;
        }
    }
    return out.str();
}

inline Support parse_support(const std::string& text) {
    std::vector<GridIndex> v;
    std::istringstream in(text);
    std::string group;
    while (std::getline(in, group, ';')) {
        if (group.empty()) continue;
        const auto colon = group.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("parse_support: expected col:rows group, got '" + group + "'");
        const int col = std::stoi(group.substr(0, colon));
        std::istringstream rows_in(group.substr(colon + 1));
        std::string row_text;
        while (std::getline(rows_in, row_text, ',')) {
            if (row_text.empty()) continue;
            v.push_back({std::stoi(row_text), col});
        }
    }
    return Support(std::move(v));
}

}  // namespace cemd
