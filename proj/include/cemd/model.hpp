#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cemd/signal.hpp"

namespace cemd {

// Parameters of the constrained-EMD model on an h x w grid: total sparsity
// k (divisible by w, so each column carries s = k/w entries) and support-EMD
// budget B. B above k*h never binds and is clamped to that value.
struct CemdParams {
    int h = 1;
    int w = 1;
    int k = 1;
    int B = 0;

    CemdParams(int h_, int w_, int k_, int B_) : h(h_), w(w_), k(k_), B(B_) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("CemdParams: grid dimensions must be positive");
        if (k <= 0) throw std::invalid_argument("CemdParams: k must be positive");
        if (k % w != 0) throw std::invalid_argument("CemdParams: w must divide k");
        const int s = k / w;
        if (s > h) throw std::invalid_argument("CemdParams: column sparsity k/w exceeds h");
        if (B < 0) throw std::invalid_argument("CemdParams: B must be nonnegative");
        if (B > k * h) B = k * h;
    }

    int col_sparsity() const { return k / w; }

    friend bool operator==(const CemdParams&, const CemdParams&) = default;
};

// EMD between two equal-size integer sets: the min-cost perfect matching,
// which on a line is achieved by matching in sorted order.
inline int emd(std::vector<int> a, std::vector<int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("emd: sets must have equal cardinality");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    int total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total;
}

namespace detail {

// All s-element subsets of {0..h-1} in lexicographic order.
inline std::vector<std::vector<int>> row_subsets(int h, int s) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) cur[static_cast<std::size_t>(i)] = i;
    if (s == 0) {
        out.push_back({});
        return out;
    }
    if (s > h) return out;
    while (true) {
        out.push_back(cur);
        int i = s - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == h - s + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < s; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline double binomial(int n, int r) {
    if (r < 0 || r > n) return 0.0;
    double v = 1.0;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

inline int sorted_match_cost(const std::vector<int>& a, const std::vector<int>& b) {
    int total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total;
}

}  // namespace detail

struct CompletionResult {
    int emd = 0;
    Support completed;
};

// Minimum support-EMD over all completions of omega to exactly
// target_s-sparse columns, together with one optimal completion. Columns are
// padded with unused rows; padding carries no amplitude but participates in
// the matching. Dynamic program over per-column candidate row sets.
inline CompletionResult complete_support_emd(const Support& omega, int target_s, int h, int w) {
    for (const auto& e : omega)
        if (e.row < 0 || e.row >= h || e.col < 0 || e.col >= w)
            throw std::invalid_argument("complete_support_emd: support index out of range");
    if (target_s > h) throw std::invalid_argument("complete_support_emd: target sparsity exceeds h");

    // Candidate row sets per column: every superset of the fixed rows of
    // exactly target_s rows (sorted).
    std::vector<std::vector<std::vector<int>>> cand(static_cast<std::size_t>(w));
    for (int c = 0; c < w; ++c) {
        std::vector<int> fixed = omega.col_rows(c);
        if (static_cast<int>(fixed.size()) > target_s)
            throw std::invalid_argument("complete_support_emd: column denser than target sparsity");
        std::vector<int> free_rows;
        for (int r = 0; r < h; ++r)
            if (!std::binary_search(fixed.begin(), fixed.end(), r)) free_rows.push_back(r);
        const int need = target_s - static_cast<int>(fixed.size());
        for (const auto& pick : detail::row_subsets(static_cast<int>(free_rows.size()), need)) {
            std::vector<int> rows = fixed;
            for (int idx : pick) rows.push_back(free_rows[static_cast<std::size_t>(idx)]);
            std::sort(rows.begin(), rows.end());
            cand[static_cast<std::size_t>(c)].push_back(std::move(rows));
        }
    }

    constexpr int kInf = std::numeric_limits<int>::max() / 4;
    std::vector<int> cost(cand[0].size(), 0);
    std::vector<std::vector<int>> choice(static_cast<std::size_t>(w));
    for (int c = 1; c < w; ++c) {
        const auto& prev = cand[static_cast<std::size_t>(c - 1)];
        const auto& cur = cand[static_cast<std::size_t>(c)];
        std::vector<int> next_cost(cur.size(), kInf);
        std::vector<int> back(cur.size(), -1);
        for (std::size_t j = 0; j < cur.size(); ++j) {
            for (std::size_t i = 0; i < prev.size(); ++i) {
                if (cost[i] >= kInf) continue;
                const int v = cost[i] + detail::sorted_match_cost(prev[i], cur[j]);
                if (v < next_cost[j]) {
                    next_cost[j] = v;
                    back[j] = static_cast<int>(i);
                }
            }
        }
        choice[static_cast<std::size_t>(c)] = std::move(back);
        cost = std::move(next_cost);
    }

    std::size_t best = 0;
    for (std::size_t j = 1; j < cost.size(); ++j)
        if (cost[j] < cost[best]) best = j;

    std::vector<std::size_t> picks(static_cast<std::size_t>(w));
    picks[static_cast<std::size_t>(w - 1)] = best;
    for (int c = w - 1; c >= 1; --c)
        picks[static_cast<std::size_t>(c - 1)] =
            static_cast<std::size_t>(choice[static_cast<std::size_t>(c)][picks[static_cast<std::size_t>(c)]]);

    std::vector<GridIndex> entries;
    for (int c = 0; c < w; ++c)
        for (int r : cand[static_cast<std::size_t>(c)][picks[static_cast<std::size_t>(c)]])
            entries.push_back({r, c});
    return {cost[best], Support(std::move(entries))};
}

// Support-EMD per the model definition: for exactly-sbar-sparse columns the
// sum of adjacent sorted matchings, otherwise the minimum over completions
// to sbar-sparse columns where sbar is the densest column of omega.
inline int support_emd(const Support& omega, const CemdParams& params) {
    if (omega.empty()) return 0;
    const int sbar = omega.max_col_sparsity(params.w);
    bool exact = true;
    for (int c = 0; c < params.w && exact; ++c)
        if (static_cast<int>(omega.col_rows(c).size()) != sbar) exact = false;
    if (exact) {
        int total = 0;
        std::vector<int> prev = omega.col_rows(0);
        for (int c = 1; c < params.w; ++c) {
            std::vector<int> cur = omega.col_rows(c);
            total += detail::sorted_match_cost(prev, cur);
            prev = std::move(cur);
        }
        return total;
    }
    return complete_support_emd(omega, sbar, params.h, params.w).emd;
}

// Membership in the subset closure of the model: no column denser than k/w
// and support-EMD within budget.
inline bool is_member(const Support& omega, const CemdParams& params) {
    for (const auto& e : omega)
        if (e.row < 0 || e.row >= params.h || e.col < 0 || e.col >= params.w) return false;
    if (omega.max_col_sparsity(params.w) > params.col_sparsity()) return false;
    return support_emd(omega, params) <= params.B;
}

namespace detail {

inline double predicted_enumeration_count(const CemdParams& params) {
    return std::pow(binomial(params.h, params.col_sparsity()), params.w);
}

inline void check_enumeration_limit(const CemdParams& params, std::uint64_t limit) {
    const double predicted = predicted_enumeration_count(params);
    if (predicted > static_cast<double>(limit))
        throw std::length_error(
            "enumerate_supports: predicted count C(h,s)^w = " + std::to_string(predicted) +
            " exceeds limit " + std::to_string(limit));
}

}  // namespace detail

constexpr std::uint64_t kDefaultEnumerationLimit = 1000000;

// Visits every support with exactly s entries per column and support-EMD at
// most B, each exactly once, in lexicographic order of per-column row sets.
// Prefix EMD is monotone, so subtrees over budget are pruned.
template <typename Fn>
void for_each_support(const CemdParams& params, Fn&& fn,
                      std::uint64_t limit = kDefaultEnumerationLimit) {
    detail::check_enumeration_limit(params, limit);
    const auto subsets = detail::row_subsets(params.h, params.col_sparsity());
    std::vector<std::size_t> picks(static_cast<std::size_t>(params.w), 0);

    const std::function<void(int, int)> rec = [&](int c, int used) {
        if (c == params.w) {
            std::vector<GridIndex> entries;
            entries.reserve(static_cast<std::size_t>(params.k));
            for (int cc = 0; cc < params.w; ++cc)
                for (int r : subsets[picks[static_cast<std::size_t>(cc)]]) entries.push_back({r, cc});
            fn(Support(std::move(entries)));
            return;
        }
        for (std::size_t j = 0; j < subsets.size(); ++j) {
            int step = 0;
            if (c > 0)
                step = detail::sorted_match_cost(subsets[picks[static_cast<std::size_t>(c - 1)]], subsets[j]);
            if (used + step > params.B) continue;
            picks[static_cast<std::size_t>(c)] = j;
            rec(c + 1, used + step);
        }
    };
    rec(0, 0);
}

inline std::vector<Support> enumerate_supports(const CemdParams& params,
                                               std::uint64_t limit = kDefaultEnumerationLimit) {
    std::vector<Support> out;
    for_each_support(params, [&](Support s) { out.push_back(std::move(s)); }, limit);
    return out;
}

// Exhaustive model projections; the reference oracles every approximation
// in this library is tested against. Ties go to the first support in
// enumeration order.
inline Support exact_head_project(const SignalMatrix& x, const CemdParams& params, int p,
                                  std::uint64_t limit = kDefaultEnumerationLimit) {
    check_norm_index(p);
    Support best;
    double best_mass = -1.0;
    for_each_support(params, [&](const Support& omega) {
        const double m = lp_mass_on(x, omega, p);
        if (m > best_mass) {
            best_mass = m;
            best = omega;
        }
    }, limit);
    return best;
}

inline Support exact_tail_project(const SignalMatrix& x, const CemdParams& params, int p,
                                  std::uint64_t limit = kDefaultEnumerationLimit) {
    check_norm_index(p);
    // argmin ||x - x_Omega||_p == argmax captured mass.
    Support best;
    double best_mass = -1.0;
    for_each_support(params, [&](const Support& omega) {
        const double m = lp_mass_on(x, omega, p);
        if (m > best_mass) {
            best_mass = m;
            best = omega;
        }
    }, limit);
    return best;
}

// Model addition: unions of supports from the two models live in the sum.
// Column sparsity saturates at h, so k is capped at the grid size.
inline CemdParams model_sum(const CemdParams& a, const CemdParams& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("model_sum: grid dimensions differ");
    return CemdParams(a.h, a.w, std::min(a.k + b.k, a.h * a.w), a.B + b.B);
}

// Explicit pre-asymptotic upper bound on log |M_{k,B}| (natural log):
// s log(h/s) + k log((B+k)/k) + (s+k). An estimate, not a certificate.
inline double log_model_size_bound(const CemdParams& params) {
    const double s = params.col_sparsity();
    const double k = params.k;
    const double B = params.B;
    return s * std::log(params.h / s) + k * std::log((B + k) / k) + (s + k);
}

// Sub-Gaussian sampling estimate: m = ceil((c/delta^2) (k log(1/delta) +
// log-model-size + t)) over the summed scope model. Empirical guidance only.
inline int measurement_bound(const CemdParams& params, double delta, double t,
                             const CemdParams& growth, double c = 1.0) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("measurement_bound: delta must be in (0,1)");
    const CemdParams scope = model_sum(params, growth);
    const double bound = scope.k * std::log(1.0 / delta) + log_model_size_bound(scope) + t;
    return static_cast<int>(std::ceil(c / (delta * delta) * bound));
}

}  // namespace cemd
