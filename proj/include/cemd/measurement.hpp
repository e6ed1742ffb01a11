#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cemd/model.hpp"
#include "cemd/rng.hpp"
#include "cemd/signal.hpp"

namespace cemd {

inline Eigen::VectorXd to_vector(const SignalMatrix& x) {
    Eigen::VectorXd v(x.size());
    for (int i = 0; i < x.size(); ++i) v(i) = x.flat(i);
    return v;
}

inline SignalMatrix to_signal(const Eigen::VectorXd& v, int h, int w) {
    if (v.size() != static_cast<Eigen::Index>(h) * w)
        throw std::invalid_argument("to_signal: length mismatch");
    SignalMatrix x(h, w);
    for (int c = 0; c < w; ++c)
        for (int r = 0; r < h; ++r) x.set(r, c, v(c * h + r));
    return x;
}

enum class DenseFamily { gaussian, rademacher };

inline std::string family_name(DenseFamily f) {
    return f == DenseFamily::gaussian ? "gaussian" : "rademacher";
}

// Dense sub-Gaussian measurement operator on h x w signals. Entries are
// N(0, 1/m) or +-1/sqrt(m), reproducible from (family, m, h, w, seed).
class DenseOperator {
public:
    static DenseOperator make(DenseFamily family, int m, int h, int w, std::uint64_t seed) {
        if (m <= 0) throw std::invalid_argument("DenseOperator: m must be positive");
        DenseOperator op;
        op.family_ = family;
        op.h_ = h;
        op.w_ = w;
        op.seed_ = seed;
        const int n = h * w;
        op.mat_.resize(m, n);
        Rng rng(split_seed(seed, 0x5eed0b5eULL));
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i)
                op.mat_(i, j) = family == DenseFamily::gaussian
                                    ? rng.gaussian() * scale
                                    : (rng.bernoulli(0.5) ? scale : -scale);
        return op;
    }

    static DenseOperator from_matrix(Eigen::MatrixXd mat, int h, int w) {
        if (mat.cols() != static_cast<Eigen::Index>(h) * w)
            throw std::invalid_argument("DenseOperator: matrix width must equal h*w");
        DenseOperator op;
        op.mat_ = std::move(mat);
        op.h_ = h;
        op.w_ = w;
        return op;
    }

    static DenseOperator identity(int h, int w) {
        return from_matrix(Eigen::MatrixXd::Identity(h * w, h * w), h, w);
    }

    int m() const { return static_cast<int>(mat_.rows()); }
    int n() const { return static_cast<int>(mat_.cols()); }
    int h() const { return h_; }
    int w() const { return w_; }
    DenseFamily family() const { return family_; }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& matrix() const { return mat_; }

    // Regeneration tuple, not an entry dump.
    std::string describe() const {
        return family_name(family_) + ",m=" + std::to_string(m()) + ",h=" + std::to_string(h_) +
               ",w=" + std::to_string(w_) + ",seed=" + std::to_string(seed_);
    }

    Eigen::VectorXd apply(const SignalMatrix& x) const {
        if (x.rows() != h_ || x.cols() != w_)
            throw std::invalid_argument("DenseOperator::apply: dimension mismatch");
        return mat_ * to_vector(x);
    }

    SignalMatrix adjoint_apply(const Eigen::VectorXd& y) const {
        if (y.size() != mat_.rows())
            throw std::invalid_argument("DenseOperator::adjoint_apply: dimension mismatch");
        return to_signal(mat_.transpose() * y, h_, w_);
    }

private:
    Eigen::MatrixXd mat_;
    DenseFamily family_ = DenseFamily::gaussian;
    int h_ = 0;
    int w_ = 0;
    std::uint64_t seed_ = 0;
};

// Least squares on the columns hit by S: minimizes ||y - A_S z||_2 and
// scatters the coefficients back onto S. Rank-deficient systems yield the
// minimum-norm solution via a complete orthogonal decomposition.
inline SignalMatrix restricted_least_squares(const DenseOperator& A, const Support& S,
                                             const Eigen::VectorXd& y) {
    if (S.size() > A.m())
        throw std::invalid_argument("restricted_least_squares: |S| exceeds measurement count");
    if (y.size() != A.m()) throw std::invalid_argument("restricted_least_squares: y length mismatch");
    SignalMatrix out(A.h(), A.w());
    if (S.empty()) return out;

    Eigen::MatrixXd sub(A.m(), S.size());
    int j = 0;
    for (const auto& e : S) {
        if (e.row < 0 || e.row >= A.h() || e.col < 0 || e.col >= A.w())
            throw std::invalid_argument("restricted_least_squares: support index out of range");
        sub.col(j++) = A.matrix().col(e.col * A.h() + e.row);
    }
    const Eigen::VectorXd z = sub.completeOrthogonalDecomposition().solve(y);
    j = 0;
    for (const auto& e : S) out.set(e.row, e.col, z(j++));
    return out;
}

// Sparse binary operator: the adjacency matrix of a random left-d-regular
// bipartite graph. d_deg is forced odd so the median below is the middle
// order statistic.
class ExpanderOperator {
public:
    static ExpanderOperator make(int m, int h, int w, int d_deg, std::uint64_t seed) {
        if (m <= 0) throw std::invalid_argument("ExpanderOperator: m must be positive");
        if (d_deg <= 0 || d_deg % 2 == 0)
            throw std::invalid_argument("ExpanderOperator: d_deg must be odd and positive");
        if (d_deg > m) throw std::invalid_argument("ExpanderOperator: d_deg exceeds m");
        ExpanderOperator op;
        op.m_ = m;
        op.h_ = h;
        op.w_ = w;
        op.d_deg_ = d_deg;
        op.seed_ = seed;
        const int n = h * w;
        op.neighbors_.resize(static_cast<std::size_t>(n));
        Rng rng(split_seed(seed, 0xeadbeefULL));
        for (int j = 0; j < n; ++j) {
            auto& nb = op.neighbors_[static_cast<std::size_t>(j)];
            while (static_cast<int>(nb.size()) < d_deg) {
                const int cand = rng.uniform_int(0, m - 1);
                if (std::find(nb.begin(), nb.end(), cand) == nb.end()) nb.push_back(cand);
            }
            std::sort(nb.begin(), nb.end());
        }
        return op;
    }

    // Disjoint neighborhoods: left node j owns rows [j*d, (j+1)*d). With no
    // collisions the median operator inverts the measurement exactly.
    static ExpanderOperator private_blocks(int h, int w, int d_deg) {
        ExpanderOperator op;
        op.m_ = h * w * d_deg;
        op.h_ = h;
        op.w_ = w;
        op.d_deg_ = d_deg;
        if (d_deg <= 0 || d_deg % 2 == 0)
            throw std::invalid_argument("ExpanderOperator: d_deg must be odd and positive");
        op.neighbors_.resize(static_cast<std::size_t>(h) * w);
        for (int j = 0; j < h * w; ++j)
            for (int i = 0; i < d_deg; ++i)
                op.neighbors_[static_cast<std::size_t>(j)].push_back(j * d_deg + i);
        return op;
    }

    int m() const { return m_; }
    int n() const { return h_ * w_; }
    int h() const { return h_; }
    int w() const { return w_; }
    int d_deg() const { return d_deg_; }
    std::uint64_t seed() const { return seed_; }

    std::string describe() const {
        return "expander,m=" + std::to_string(m_) + ",h=" + std::to_string(h_) +
               ",w=" + std::to_string(w_) + ",d_deg=" + std::to_string(d_deg_) +
               ",seed=" + std::to_string(seed_);
    }
    const std::vector<int>& neighbors(int left) const {
        return neighbors_[static_cast<std::size_t>(left)];
    }

    Eigen::VectorXd apply(const SignalMatrix& x) const {
        if (x.rows() != h_ || x.cols() != w_)
            throw std::invalid_argument("ExpanderOperator::apply: dimension mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < n(); ++j) {
            const double v = x.flat(j);
            if (v == 0.0) continue;
            for (int r : neighbors_[static_cast<std::size_t>(j)]) y(r) += v;
        }
        return y;
    }

    SignalMatrix adjoint_apply(const Eigen::VectorXd& y) const {
        if (y.size() != m_) throw std::invalid_argument("ExpanderOperator::adjoint_apply: mismatch");
        Eigen::VectorXd out(n());
        for (int j = 0; j < n(); ++j) {
            double acc = 0.0;
            for (int r : neighbors_[static_cast<std::size_t>(j)]) acc += y(r);
            out(j) = acc;
        }
        return to_signal(out, h_, w_);
    }

private:
    std::vector<std::vector<int>> neighbors_;
    int m_ = 0;
    int h_ = 0;
    int w_ = 0;
    int d_deg_ = 0;
    std::uint64_t seed_ = 0;
};

// Component-wise median over the expander neighborhood of each signal
// coordinate; the RIP-1 stand-in for the adjoint.
inline SignalMatrix median_operator(const ExpanderOperator& E, const Eigen::VectorXd& u) {
    if (u.size() != E.m()) throw std::invalid_argument("median_operator: dimension mismatch");
    Eigen::VectorXd out(E.n());
    std::vector<double> vals;
    for (int j = 0; j < E.n(); ++j) {
        const auto& nb = E.neighbors(j);
        vals.assign(nb.size(), 0.0);
        for (std::size_t i = 0; i < nb.size(); ++i) vals[i] = u(nb[i]);
        const std::size_t mid = vals.size() / 2;
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
        out(j) = vals[mid];
    }
    return to_signal(out, E.h(), E.w());
}

// Draws a support from the model: a budgeted random walk across columns,
// with a rejection retry when collisions push the EMD over budget.
inline Support sample_model_support(const CemdParams& params, Rng& rng) {
    const int s = params.col_sparsity();
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<int> rows;
        while (static_cast<int>(rows.size()) < s) {
            const int cand = rng.uniform_int(0, params.h - 1);
            if (std::find(rows.begin(), rows.end(), cand) == rows.end()) rows.push_back(cand);
        }
        std::sort(rows.begin(), rows.end());

        std::vector<GridIndex> entries;
        int budget = params.B;
        for (int r : rows) entries.push_back({r, 0});
        std::vector<int> prev = rows;
        for (int c = 1; c < params.w; ++c) {
            std::vector<int> cur;
            for (int r : prev) {
                int next = r;
                if (budget > 0) {
                    const int move = rng.uniform_int(-budget, budget);
                    next = std::clamp(r + move, 0, params.h - 1);
                }
                // Collisions slide to the nearest free row.
                int delta = 0;
                while (std::find(cur.begin(), cur.end(), next) != cur.end()) {
                    ++delta;
                    if (next + delta < params.h &&
                        std::find(cur.begin(), cur.end(), next + delta) == cur.end()) {
                        next += delta;
                        break;
                    }
                    if (next - delta >= 0 &&
                        std::find(cur.begin(), cur.end(), next - delta) == cur.end()) {
                        next -= delta;
                        break;
                    }
                }
                budget -= std::abs(next - r);
                cur.push_back(next);
            }
            std::sort(cur.begin(), cur.end());
            for (int r : cur) entries.push_back({r, c});
            prev = cur;
            if (budget < 0) break;
        }
        if (budget < 0) continue;
        Support support{std::move(entries)};
        if (is_member(support, params)) return support;
    }
    // Constant columns are always in the model.
    std::vector<GridIndex> entries;
    for (int c = 0; c < params.w; ++c)
        for (int r = 0; r < s; ++r) entries.push_back({r, c});
    return Support(std::move(entries));
}

// Random signal on a random in-model support, unit-normalized in the given
// norm.
inline SignalMatrix random_model_signal(const CemdParams& params, Rng& rng, int norm = 2) {
    check_norm_index(norm);
    const Support support = sample_model_support(params, rng);
    SignalMatrix x(params.h, params.w);
    for (const auto& e : support) x.set(e.row, e.col, rng.gaussian());
    const double nn = lp_norm(x, norm);
    if (nn == 0.0) {
        SignalMatrix unit(params.h, params.w);
        unit.set(support.begin()->row, support.begin()->col, 1.0);
        return unit;
    }
    SignalMatrix out(params.h, params.w);
    for (const auto& e : support) out.set(e.row, e.col, x(e.row, e.col) / nn);
    return out;
}

// Empirical distortion witness, never a certificate: the lower bound is the
// worst |ratio - 1| seen over sampled in-model unit vectors.
struct RipEstimate {
    double delta_lower = 0.0;
    int samples = 0;
    CemdParams scope{1, 1, 1, 0};
    int norm = 2;
};

namespace detail {

template <typename ApplyFn>
RipEstimate estimate_rip_impl(ApplyFn&& apply_norm_ratio, const CemdParams& scope, int trials,
                              int norm, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("estimate_model_rip: trials must be >= 1");
    check_norm_index(norm);
    RipEstimate est;
    est.samples = trials;
    est.scope = scope;
    est.norm = norm;
    for (int t = 0; t < trials; ++t) {
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(t)));
        const SignalMatrix x = random_model_signal(scope, rng, norm);
        est.delta_lower = std::max(est.delta_lower, std::abs(apply_norm_ratio(x) - 1.0));
    }
    return est;
}

}  // namespace detail

inline RipEstimate estimate_model_rip(const DenseOperator& A, const CemdParams& scope, int trials,
                                      int norm, std::uint64_t seed) {
    return detail::estimate_rip_impl(
        [&](const SignalMatrix& x) {
            const Eigen::VectorXd y = A.apply(x);
            if (norm == 1) return y.lpNorm<1>() / lp_norm(x, 1);
            return y.squaredNorm() / (lp_norm(x, 2) * lp_norm(x, 2));
        },
        scope, trials, norm, seed);
}

inline RipEstimate estimate_model_rip(const DenseOperator& A, const CemdParams& model,
                                      const CemdParams& growth, int trials, int norm,
                                      std::uint64_t seed) {
    return estimate_model_rip(A, model_sum(model, growth), trials, norm, seed);
}

// Expander RIP-1 witness over the degree-normalized operator A/d.
inline RipEstimate estimate_model_rip(const ExpanderOperator& E, const CemdParams& scope,
                                      int trials, std::uint64_t seed) {
    return detail::estimate_rip_impl(
        [&](const SignalMatrix& x) {
            return E.apply(x).lpNorm<1>() / (E.d_deg() * lp_norm(x, 1));
        },
        scope, trials, 1, seed);
}

}  // namespace cemd
