#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cemd/model.hpp"
#include "cemd/oracles.hpp"
#include "cemd/signal.hpp"

namespace cemd {

// A path picks one row per column.
struct Path {
    std::vector<int> rows;

    Support to_support() const {
        std::vector<GridIndex> v;
        v.reserve(rows.size());
        for (int c = 0; c < static_cast<int>(rows.size()); ++c)
            v.push_back({rows[static_cast<std::size_t>(c)], c});
        return Support(std::move(v));
    }
};

inline double path_weight(const SignalMatrix& x, const Path& path, int p) {
    check_norm_index(p);
    double acc = 0.0;
    for (int c = 0; c < static_cast<int>(path.rows.size()); ++c) {
        const double v = x(path.rows[static_cast<std::size_t>(c)], c);
        acc += (p == 1) ? std::abs(v) : v * v;
    }
    return acc;
}

inline int path_emd(const Path& path) {
    int total = 0;
    for (std::size_t c = 1; c < path.rows.size(); ++c)
        total += std::abs(path.rows[c] - path.rows[c - 1]);
    return total;
}

namespace detail {

// DP state value: maximize weight, then (for the greedy rounds) prefer
// paths that avoid cells already claimed by earlier paths, then prefer
// smaller EMD, then smaller rows. Lexicographic and additive, so the DP has
// optimal substructure in this order.
struct PathCell {
    double weight = -1.0;
    int reused = 0;
    int prev_row = -1;
    int prev_budget = -1;
};

inline bool better(double w_new, int reused_new, double w_old, int reused_old) {
    if (w_new != w_old) return w_new > w_old;
    return reused_new < reused_old;
}

inline Path max_weight_path_impl(const SignalMatrix& x, int budget, int p,
                                 const std::vector<std::uint8_t>* used) {
    check_norm_index(p);
    if (budget < 0) throw std::invalid_argument("max_weight_path: budget must be nonnegative");
    const int h = x.rows();
    const int w = x.cols();

    auto cell_weight = [&](int r, int c) {
        const double v = x(r, c);
        return (p == 1) ? std::abs(v) : v * v;
    };
    auto cell_reused = [&](int r, int c) -> int {
        return used && (*used)[static_cast<std::size_t>(c * h + r)] ? 1 : 0;
    };

    // dp[c][r][b]: best path ending at (r, c) with EMD spent exactly b.
    const int nb = budget + 1;
    std::vector<PathCell> dp(static_cast<std::size_t>(w) * h * nb);
    auto at = [&](int c, int r, int b) -> PathCell& {
        return dp[(static_cast<std::size_t>(c) * h + r) * nb + b];
    };

    for (int r = 0; r < h; ++r) {
        PathCell& s = at(0, r, 0);
        s.weight = cell_weight(r, 0);
        s.reused = cell_reused(r, 0);
    }
    for (int c = 1; c < w; ++c) {
        for (int r = 0; r < h; ++r) {
            const double wc = cell_weight(r, c);
            const int uc = cell_reused(r, c);
            for (int b = 0; b <= budget; ++b) {
                PathCell& s = at(c, r, b);
                for (int pr = 0; pr < h; ++pr) {
                    const int move = std::abs(r - pr);
                    if (move > b) continue;
                    const PathCell& prev = at(c - 1, pr, b - move);
                    if (prev.weight < 0.0) continue;
                    const double cand_w = prev.weight + wc;
                    const int cand_u = prev.reused + uc;
                    if (s.weight < 0.0 || better(cand_w, cand_u, s.weight, s.reused)) {
                        s.weight = cand_w;
                        s.reused = cand_u;
                        s.prev_row = pr;
                        s.prev_budget = b - move;
                    }
                }
            }
        }
    }

    // Final selection: best weight, then fewest reused cells, then smallest
    // budget, then smallest row. Scanning b then r ascending with a strict
    // improvement test realizes exactly that order.
    int best_r = 0, best_b = 0;
    double best_w = -1.0;
    int best_u = 0;
    for (int b = 0; b <= budget; ++b) {
        for (int r = 0; r < h; ++r) {
            const PathCell& s = at(w - 1, r, b);
            if (s.weight < 0.0) continue;
            if (best_w < 0.0 || better(s.weight, s.reused, best_w, best_u)) {
                best_w = s.weight;
                best_u = s.reused;
                best_r = r;
                best_b = b;
            }
        }
    }

    Path path;
    path.rows.assign(static_cast<std::size_t>(w), 0);
    int r = best_r, b = best_b;
    for (int c = w - 1; c >= 0; --c) {
        path.rows[static_cast<std::size_t>(c)] = r;
        if (c > 0) {
            const PathCell& s = at(c, r, b);
            const int pr = s.prev_row;
            const int pb = s.prev_budget;
            r = pr;
            b = pb;
        }
    }
    return path;
}

}  // namespace detail

// Exact maximum-weight path under an EMD budget, by dynamic programming
// over (column, row, spent budget) states.
inline Path max_weight_path(const SignalMatrix& x, int budget, int p) {
    return detail::max_weight_path_impl(x, budget, p, nullptr);
}

inline int harmonic_ceil(int s) {
    double hs = 0.0;
    for (int i = 1; i <= s; ++i) hs += 1.0 / i;
    return static_cast<int>(std::ceil(hs - 1e-12));
}

// Greedy head approximation: s max-weight path searches on the running
// residual, path i under budget floor(B/i). Selected cells are zeroed
// between rounds. The returned support has exactly s entries per column;
// when rounds collide on a cell (possible once the residual degenerates),
// the union is completed to s-sparse columns by the cheapest padding, which
// keeps the EMD bound of the union of paths.
inline Support head_approx(const SignalMatrix& x, const CemdParams& params, int p) {
    check_norm_index(p);
    const int h = params.h;
    const int w = params.w;
    if (x.rows() != h || x.cols() != w)
        throw std::invalid_argument("head_approx: signal dimensions do not match params");
    const int s = params.col_sparsity();

    SignalMatrix residual = x;
    std::vector<std::uint8_t> used(static_cast<std::size_t>(h) * w, 0);
    std::vector<GridIndex> picked;
    int paths_emd_total = 0;
    for (int i = 1; i <= s; ++i) {
        const Path path = detail::max_weight_path_impl(residual, params.B / i, p, &used);
        paths_emd_total += path_emd(path);
        for (int c = 0; c < w; ++c) {
            const int r = path.rows[static_cast<std::size_t>(c)];
            residual.set(r, c, 0.0);
            if (!used[static_cast<std::size_t>(c * h + r)]) {
                used[static_cast<std::size_t>(c * h + r)] = 1;
                picked.push_back({r, c});
            }
        }
    }

    Support result(std::move(picked));
    if (result.max_col_sparsity(w) < s || result.size() < s * w)
        result = complete_support_emd(result, s, h, w).completed;

    const int bound = harmonic_ceil(s) * params.B;
    CemdParams out_params(h, w, params.k, bound);
    const int result_emd = support_emd(result, out_params);
    if (result_emd > bound)
        throw std::logic_error("head_approx: output EMD " + std::to_string(result_emd) +
                               " exceeds ceil(H_s)*B = " + std::to_string(bound));
    return result;
}

// HeadApprox packaged as an oracle for the model given by `params`:
// quality (1/4)^(1/p), output budget ceil(H_s)*B.
inline HeadOracle head_approx_oracle(const CemdParams& params, int p) {
    return HeadOracle{
        [params, p](const SignalMatrix& x) { return head_approx(x, params, p); },
        CemdParams(params.h, params.w, params.k, harmonic_ceil(params.col_sparsity()) * params.B),
        OracleQuality(std::pow(0.25, 1.0 / p), 1.0, p)};
}

// One boosting pass: accumulated supports after each of the t rounds.
inline std::vector<Support> boost_head_trace(const HeadOracle& oracle, int t, const SignalMatrix& x) {
    if (t < 1) throw std::invalid_argument("boost_head: t must be >= 1");
    std::vector<Support> acc;
    Support omega;
    for (int i = 0; i < t; ++i) {
        omega = omega.unite(oracle.project(restrict_off(x, omega)));
        acc.push_back(omega);
    }
    return acc;
}

// Head boosting: t rounds of the base oracle on the residual off the
// accumulated support. Quality rises to (1 - (1 - c_H^p)^t)^(1/p) while the
// output model grows to the t-fold sum.
inline HeadOracle boost_head(const HeadOracle& oracle, int t) {
    if (t < 1) throw std::invalid_argument("boost_head: t must be >= 1");
    const int p = oracle.quality.p;
    const double ch = oracle.quality.c_head;
    const double boosted = std::pow(1.0 - std::pow(1.0 - std::pow(ch, p), t), 1.0 / p);
    CemdParams out = oracle.output_model;
    for (int i = 1; i < t; ++i) out = model_sum(out, oracle.output_model);
    HeadOracle base = oracle;
    return HeadOracle{
        [base, t](const SignalMatrix& x) { return boost_head_trace(base, t, x).back(); },
        out, OracleQuality(boosted, 1.0, p)};
}

struct BoostPlan {
    double gamma = 0.0;
    int t = 1;
};

// Boosting planner for the l2 recovery loops: the head quality needed for
// convergence at the given tail quality and RIP constant, and the number of
// boosting rounds that reaches it.
inline BoostPlan boost_iterations(double c_H, double c_T, double delta) {
    if (!(c_H > 0.0 && c_H < 1.0)) throw std::invalid_argument("boost_iterations: need 0 < c_H < 1");
    if (c_T < 1.0) throw std::invalid_argument("boost_iterations: need c_T >= 1");
    if (delta < 0.0 || delta >= 1.0) throw std::invalid_argument("boost_iterations: need 0 <= delta < 1");
    const double inner = 1.0 / (1.0 + c_T) - delta;
    const double gamma = (std::sqrt(1.0 - inner * inner) + delta) / (1.0 - delta);
    if (gamma >= 1.0)
        throw std::invalid_argument("boost_iterations: infeasible, gamma = " + std::to_string(gamma) +
                                    " >= 1 at c_T = " + std::to_string(c_T) +
                                    ", delta = " + std::to_string(delta));
    const int t = static_cast<int>(std::ceil(std::log(1.0 - gamma * gamma) /
                                             std::log(1.0 - c_H * c_H))) + 1;
    return {gamma, t};
}

}  // namespace cemd
