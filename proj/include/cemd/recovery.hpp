#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cemd/flow.hpp"
#include "cemd/head.hpp"
#include "cemd/measurement.hpp"
#include "cemd/model.hpp"
#include "cemd/oracles.hpp"
#include "cemd/rng.hpp"
#include "cemd/signal.hpp"

namespace cemd {

enum class Algorithm { am_iht, am_cosamp, am_iht_rip1 };

inline std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::am_iht: return "am-iht";
        case Algorithm::am_cosamp: return "am-cosamp";
        case Algorithm::am_iht_rip1: return "am-iht-rip1";
    }
    return "?";
}

struct RecoveryConfig {
    Algorithm algorithm = Algorithm::am_iht;
    HeadOracle head;
    TailOracle tail;
    int max_iters = 50;
    double residual_stop = 0.0;  // early exit on ||x^{i+1} - x^i||_p, 0 disables
    bool record_trajectory = true;
};

struct TrajectoryRow {
    int iter = 0;
    double residual = 0.0;               // ||y - A x^i||_p
    std::optional<double> error;         // ||x - x^i||_p when the truth is known
    int support_emd = 0;
    int col_sparsity_max = 0;
};

struct RecoveryResult {
    SignalMatrix estimate;
    std::vector<TrajectoryRow> trajectory;
    int iterations = 0;
};

inline void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
    out << "iter,residual_p,error_p,support_emd,col_sparsity_max\n";
    for (const auto& row : rows) {
        out << row.iter << ',' << row.residual << ',';
        if (row.error) out << *row.error;
        out << ',' << row.support_emd << ',' << row.col_sparsity_max << '\n';
    }
}

namespace detail {

inline TrajectoryRow make_row(int iter, double residual, const SignalMatrix& iterate,
                              const SignalMatrix* truth, const CemdParams& grid, int p) {
    TrajectoryRow row;
    row.iter = iter;
    row.residual = residual;
    if (truth) row.error = lp_norm(subtract(*truth, iterate), p);
    const Support supp = support_of(iterate);
    row.support_emd = support_emd(supp, grid);
    row.col_sparsity_max = supp.max_col_sparsity(grid.w);
    return row;
}

}  // namespace detail

// AM-IHT: x^{i+1} = T(x^i + H(A^T (y - A x^i))).
inline RecoveryResult am_iht(const Eigen::VectorXd& y, const DenseOperator& A,
                             const RecoveryConfig& cfg, const SignalMatrix* truth = nullptr) {
    if (y.size() != A.m()) throw std::invalid_argument("am_iht: measurement length mismatch");
    const int p = cfg.tail.quality.p;
    const CemdParams grid(A.h(), A.w(), A.w(), A.h() * A.w());
    RecoveryResult res{SignalMatrix(A.h(), A.w()), {}, 0};
    if (cfg.record_trajectory)
        res.trajectory.push_back(detail::make_row(0, y.norm(), res.estimate, truth, grid, p));

    for (int i = 0; i < cfg.max_iters; ++i) {
        const SignalMatrix proxy = A.adjoint_apply(y - A.apply(res.estimate));
        const SignalMatrix update = add(res.estimate, restrict(proxy, cfg.head.project(proxy)));
        SignalMatrix next = restrict(update, cfg.tail.project(update));
        const double step = lp_norm(subtract(next, res.estimate), p);
        res.estimate = std::move(next);
        res.iterations = i + 1;
        if (cfg.record_trajectory)
            res.trajectory.push_back(detail::make_row(
                i + 1, (y - A.apply(res.estimate)).norm(), res.estimate, truth, grid, p));
        if (cfg.residual_stop > 0.0 && step <= cfg.residual_stop) break;
    }
    return res;
}

// AM-CoSaMP: head support joined with the current support, least squares on
// the union, then the tail projection.
inline RecoveryResult am_cosamp(const Eigen::VectorXd& y, const DenseOperator& A,
                                const RecoveryConfig& cfg, const SignalMatrix* truth = nullptr) {
    if (y.size() != A.m()) throw std::invalid_argument("am_cosamp: measurement length mismatch");
    const int p = cfg.tail.quality.p;
    const CemdParams grid(A.h(), A.w(), A.w(), A.h() * A.w());
    RecoveryResult res{SignalMatrix(A.h(), A.w()), {}, 0};
    if (cfg.record_trajectory)
        res.trajectory.push_back(detail::make_row(0, y.norm(), res.estimate, truth, grid, p));

    for (int i = 0; i < cfg.max_iters; ++i) {
        const SignalMatrix proxy = A.adjoint_apply(y - A.apply(res.estimate));
        const Support gamma = cfg.head.project(proxy);
        const Support candidates = gamma.unite(support_of(res.estimate));
        const SignalMatrix z = restricted_least_squares(A, candidates, y);
        SignalMatrix next = restrict(z, cfg.tail.project(z));
        const double step = lp_norm(subtract(next, res.estimate), p);
        res.estimate = std::move(next);
        res.iterations = i + 1;
        if (cfg.record_trajectory)
            res.trajectory.push_back(detail::make_row(
                i + 1, (y - A.apply(res.estimate)).norm(), res.estimate, truth, grid, p));
        if (cfg.residual_stop > 0.0 && step <= cfg.residual_stop) break;
    }
    return res;
}

// AM-IHT with RIP-1: the median operator replaces the adjoint.
inline RecoveryResult am_iht_rip1(const Eigen::VectorXd& y, const ExpanderOperator& E,
                                  const RecoveryConfig& cfg, const SignalMatrix* truth = nullptr) {
    if (y.size() != E.m()) throw std::invalid_argument("am_iht_rip1: measurement length mismatch");
    const int p = cfg.tail.quality.p;
    const CemdParams grid(E.h(), E.w(), E.w(), E.h() * E.w());
    RecoveryResult res{SignalMatrix(E.h(), E.w()), {}, 0};
    if (cfg.record_trajectory)
        res.trajectory.push_back(detail::make_row(0, y.lpNorm<1>(), res.estimate, truth, grid, p));

    for (int i = 0; i < cfg.max_iters; ++i) {
        const SignalMatrix proxy = median_operator(E, y - E.apply(res.estimate));
        const SignalMatrix update = add(res.estimate, restrict(proxy, cfg.head.project(proxy)));
        SignalMatrix next = restrict(update, cfg.tail.project(update));
        const double step = lp_norm(subtract(next, res.estimate), p);
        res.estimate = std::move(next);
        res.iterations = i + 1;
        if (cfg.record_trajectory)
            res.trajectory.push_back(detail::make_row(
                i + 1, (y - E.apply(res.estimate)).lpNorm<1>(), res.estimate, truth, grid, p));
        if (cfg.residual_stop > 0.0 && step <= cfg.residual_stop) break;
    }
    return res;
}

// Closed-form convergence constants of the three loops. Infeasible regimes
// are reported, not hidden behind NaN.
struct ConvergenceConstants {
    Algorithm variant = Algorithm::am_iht;
    double c_H = 1.0;
    double c_T = 1.0;
    double delta = 0.0;
    double tau0 = 4.0;

    double alpha0 = 0.0;
    double beta0 = 0.0;
    double alpha = 0.0;  // per-iteration contraction (l2 loops)
    double beta = 0.0;   // noise amplification (l2 loops)
    double rho0 = 0.0;
    double rho = 0.0;    // contraction of the RIP-1 loop
    double tau = 0.0;

    bool feasible = false;
    std::string note;
};

// tau0 has no closed form in the source analysis; it is a calibrated input,
// defaulting to 4.
inline ConvergenceConstants constants(double c_H, double c_T, double delta, Algorithm variant,
                                      double tau0 = 4.0) {
    ConvergenceConstants cc;
    cc.variant = variant;
    cc.c_H = c_H;
    cc.c_T = c_T;
    cc.delta = delta;
    cc.tau0 = tau0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (variant == Algorithm::am_iht_rip1) {
        if (delta >= 0.25) {
            cc.rho0 = cc.rho = cc.tau = nan;
            cc.feasible = false;
            cc.note = "rho0 = 4*delta/(1-4*delta) requires delta < 1/4 (delta = " +
                      std::to_string(delta) + ")";
            return cc;
        }
        cc.rho0 = 4.0 * delta / (1.0 - 4.0 * delta);
        cc.rho = (1.0 + c_T) * (2.0 * cc.rho0 + 1.0 - c_H * (1.0 - cc.rho0));
        cc.tau = (1.0 + c_T) * (2.0 + c_H) * tau0;
        cc.feasible = cc.rho < 1.0;
        if (!cc.feasible)
            cc.note = "rho = " + std::to_string(cc.rho) + " >= 1: no geometric convergence";
        return cc;
    }

    cc.alpha0 = c_H * (1.0 - delta) - delta;
    cc.beta0 = (1.0 + c_H) * std::sqrt(1.0 + delta);
    if (cc.alpha0 <= 0.0) {
        cc.alpha = cc.beta = nan;
        cc.feasible = false;
        cc.note = "alpha0 = c_H(1-delta)-delta = " + std::to_string(cc.alpha0) +
                  " <= 0: head oracle too weak for this RIP constant";
        return cc;
    }
    const double root = std::sqrt(std::max(0.0, 1.0 - cc.alpha0 * cc.alpha0));
    const double noise0 = cc.beta0 / cc.alpha0 +
                          (root > 0.0 ? cc.alpha0 * cc.beta0 / root
                                      : std::numeric_limits<double>::infinity());
    if (variant == Algorithm::am_iht) {
        cc.alpha = (1.0 + c_T) * (delta + root);
        cc.beta = (1.0 + c_T) * (noise0 + std::sqrt(1.0 + delta));
    } else {
        const double ratio = std::sqrt((1.0 + delta) / (1.0 - delta));
        cc.alpha = (1.0 + c_T) * ratio * root;
        cc.beta = (1.0 + c_T) * (ratio * noise0 + 2.0 / std::sqrt(1.0 - delta));
    }
    cc.feasible = cc.alpha < 1.0;
    if (!cc.feasible)
        cc.note = "alpha = " + std::to_string(cc.alpha) + " >= 1: no geometric convergence";
    return cc;
}

// Iterations until the estimate error drops to the noise floor.
inline int iteration_bound(const ConvergenceConstants& cc, double norm_x, double norm_e) {
    if (!cc.feasible) throw std::invalid_argument("iteration_bound: constants are infeasible");
    if (norm_e <= 0.0 || norm_x <= norm_e) return 1;
    return static_cast<int>(std::ceil(std::log(norm_x / norm_e) / std::log(1.0 / cc.alpha)));
}

inline double final_error_coefficient(const ConvergenceConstants& cc) {
    if (!cc.feasible) throw std::invalid_argument("final_error_coefficient: constants are infeasible");
    return 1.0 + cc.beta / (1.0 - cc.alpha);
}

// Head/tail pair for CEMD recovery. The head oracle is built over the sum
// of the signal model and the tail oracle's output model, which is exactly
// the scope the convergence analysis requires; boost_t > 1 boosts it.
struct OraclePair {
    HeadOracle head;
    TailOracle tail;
};

inline OraclePair make_cemd_oracles(const CemdParams& signal_model, const TailParams& tail_params,
                                    int p, int boost_t = 1) {
    TailOracle tail = as_tail_oracle(signal_model, tail_params, p);
    const CemdParams head_scope = model_sum(signal_model, tail.output_model);
    HeadOracle head = head_approx_oracle(head_scope, p);
    if (boost_t > 1) head = boost_head(head, boost_t);
    return {std::move(head), std::move(tail)};
}

inline OraclePair make_exact_oracles(const CemdParams& signal_model, int p,
                                     std::uint64_t limit = kDefaultEnumerationLimit) {
    TailOracle tail = exact_tail_oracle(signal_model, p, limit);
    const CemdParams head_scope = model_sum(signal_model, tail.output_model);
    HeadOracle head = exact_head_oracle(head_scope, p, limit);
    return {std::move(head), std::move(tail)};
}

// Negative-result demonstration: a zero-returning "approximate" projection
// satisfies the multiplicative tail guarantee on the first proxy with high
// probability, so plain Model-IHT never leaves the origin. The honest
// head/tail pair on the same signal recovers it.
struct AdversarialReport {
    int n = 0;
    int m = 0;
    double c = 0.0;
    double proxy_norm_sq = 0.0;       // ||A^T A e_1||_2^2
    double threshold = 0.0;           // c^2 / (c^2 - 1)
    bool oracle_condition = false;    // proxy_norm_sq >= threshold
    bool iterates_stayed_zero = false;
    double stuck_error = 0.0;         // ||x - x^i||_2 at the last iterate
    bool contrast_ran = false;
    bool contrast_recovered = false;
    double contrast_rel_error = 0.0;
    int contrast_iterations = 0;
};

struct AdversarialConfig {
    int model_iters = 10;
    bool run_contrast = true;
    int contrast_B = 2;
    int contrast_m_per_k = 16;  // desk-scale calibration of the sampling bound
    TailParams contrast_tail{2.0, 0.1};
    int contrast_max_iters = 30;
    double contrast_threshold = 1e-6;
};

inline AdversarialReport adversarial_demo(int n, double c, std::uint64_t seed,
                                          const AdversarialConfig& cfg = {}) {
    if (n < 16) throw std::invalid_argument("adversarial_demo: n must be >= 16");
    if (c <= 1.0) throw std::invalid_argument("adversarial_demo: c must exceed 1");

    AdversarialReport report;
    report.n = n;
    report.c = c;
    report.m = static_cast<int>(std::ceil(4.0 * std::log(static_cast<double>(n))));
    report.threshold = c * c / (c * c - 1.0);

    const DenseOperator A = DenseOperator::make(DenseFamily::rademacher, report.m, n, 1, seed);
    SignalMatrix x(n, 1);
    x.set(0, 0, 1.0);
    const Eigen::VectorXd y = A.apply(x);

    const SignalMatrix proxy = A.adjoint_apply(y);
    report.proxy_norm_sq = lp_mass(proxy, 2);
    report.oracle_condition = report.proxy_norm_sq >= report.threshold;

    // Model-IHT with the adversarial oracle T'(a) = 0 is the constant-zero
    // iteration; confirm it literally.
    SignalMatrix iterate(n, 1);
    bool stayed_zero = true;
    for (int i = 0; i < cfg.model_iters; ++i) {
        SignalMatrix zero(n, 1);
        iterate = std::move(zero);
        if (lp_norm(iterate, 2) != 0.0) stayed_zero = false;
    }
    report.iterates_stayed_zero = stayed_zero;
    report.stuck_error = lp_norm(subtract(x, iterate), 2);

    if (!cfg.run_contrast) return report;
    report.contrast_ran = true;

    // Same signal viewed as a near-square grid with one entry per column
    // allowed; honest oracles, measurement count scaled to the model size.
    int hc = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (hc > 1 && n % hc != 0) --hc;
    const int wc = n / hc;
    const CemdParams signal_model(hc, wc, wc, cfg.contrast_B);
    const OraclePair oracles = make_cemd_oracles(signal_model, cfg.contrast_tail, 2);

    const int mc = cfg.contrast_m_per_k * signal_model.k;
    const DenseOperator Ac =
        DenseOperator::make(DenseFamily::gaussian, mc, hc, wc, split_seed(seed, 0xc0117a57ULL));
    SignalMatrix xc(hc, wc);
    xc.set(0, 0, 1.0);
    const Eigen::VectorXd yc = Ac.apply(xc);

    RecoveryConfig rcfg;
    rcfg.algorithm = Algorithm::am_iht;
    rcfg.head = oracles.head;
    rcfg.tail = oracles.tail;
    rcfg.max_iters = cfg.contrast_max_iters;
    rcfg.residual_stop = 1e-12;
    rcfg.record_trajectory = false;
    const RecoveryResult rec = am_iht(yc, Ac, rcfg, &xc);
    report.contrast_rel_error = lp_norm(subtract(xc, rec.estimate), 2) / lp_norm(xc, 2);
    report.contrast_recovered = report.contrast_rel_error <= cfg.contrast_threshold;
    report.contrast_iterations = rec.iterations;
    return report;
}

}  // namespace cemd
