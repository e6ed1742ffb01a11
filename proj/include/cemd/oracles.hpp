#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "cemd/model.hpp"
#include "cemd/signal.hpp"

namespace cemd {

// Approximation quality of a projection oracle. c_head applies to head
// oracles, c_tail to tail oracles; p is the norm the guarantee is stated in.
struct OracleQuality {
    double c_head = 1.0;
    double c_tail = 1.0;
    int p = 2;

    OracleQuality() = default;
    OracleQuality(double c_head_, double c_tail_, int p_)
        : c_head(c_head_), c_tail(c_tail_), p(p_) {
        if (!(c_head > 0.0 && c_head <= 1.0))
            throw std::invalid_argument("OracleQuality: c_head must be in (0,1]");
        if (!(c_tail >= 1.0)) throw std::invalid_argument("OracleQuality: c_tail must be >= 1");
        check_norm_index(p);
    }
};

// A head-approximation oracle: a projection callable together with the
// declared output model and quality. The project callable must return a
// support in output_model with ||x_Omega'||_p >= c_head * ||x_Omega||_p for
// every Omega in the oracle's input model.
struct HeadOracle {
    std::function<Support(const SignalMatrix&)> project;
    CemdParams output_model{1, 1, 1, 0};
    OracleQuality quality{};
};

// Tail counterpart: ||x - x_Omega'||_p <= c_tail * ||x - x_Omega||_p.
struct TailOracle {
    std::function<Support(const SignalMatrix&)> project;
    CemdParams output_model{1, 1, 1, 0};
    OracleQuality quality{};
};

// Brute-force reference oracles over an enumerable model.
inline HeadOracle exact_head_oracle(const CemdParams& model, int p,
                                    std::uint64_t limit = kDefaultEnumerationLimit) {
    return HeadOracle{
        [model, p, limit](const SignalMatrix& x) { return exact_head_project(x, model, p, limit); },
        model, OracleQuality(1.0, 1.0, p)};
}

inline TailOracle exact_tail_oracle(const CemdParams& model, int p,
                                    std::uint64_t limit = kDefaultEnumerationLimit) {
    return TailOracle{
        [model, p, limit](const SignalMatrix& x) { return exact_tail_project(x, model, p, limit); },
        model, OracleQuality(1.0, 1.0, p)};
}

struct ContractReport {
    bool ok = true;
    bool inequality_ok = true;
    bool output_in_model = true;
    double achieved = 0.0;   // head value resp. tail error of the oracle output
    double optimal = 0.0;    // brute-force optimum over the checked model
    Support witness;         // optimal support; the counterexample on failure
    Support returned;
    std::string note;
};

// Verifies the head inequality against brute-force enumeration of `model`.
// Guarantee comparisons use relative tolerance 1e-9.
inline ContractReport check_head_contract(const HeadOracle& oracle, const SignalMatrix& x,
                                          const CemdParams& model,
                                          std::uint64_t limit = kDefaultEnumerationLimit) {
    const int p = oracle.quality.p;
    ContractReport report;
    report.returned = oracle.project(x);
    report.output_in_model = is_member(report.returned, oracle.output_model);

    double best = -1.0;
    for_each_support(model, [&](const Support& omega) {
        const double m = lp_mass_on(x, omega, p);
        if (m > best) {
            best = m;
            report.witness = omega;
        }
    }, limit);
    report.optimal = std::pow(best, 1.0 / p);
    report.achieved = std::pow(lp_mass_on(x, report.returned, p), 1.0 / p);

    const double required = oracle.quality.c_head * report.optimal;
    report.inequality_ok = report.achieved >= required - 1e-9 * std::max(1.0, required);
    report.ok = report.inequality_ok && report.output_in_model;
    if (!report.inequality_ok)
        report.note = "head value " + std::to_string(report.achieved) + " < c_H * optimal = " +
                      std::to_string(required);
    else if (!report.output_in_model)
        report.note = "returned support outside declared output model";
    return report;
}

inline ContractReport check_tail_contract(const TailOracle& oracle, const SignalMatrix& x,
                                          const CemdParams& model,
                                          std::uint64_t limit = kDefaultEnumerationLimit) {
    const int p = oracle.quality.p;
    ContractReport report;
    report.returned = oracle.project(x);
    report.output_in_model = is_member(report.returned, oracle.output_model);

    const double total = lp_mass(x, p);
    double best_mass = -1.0;
    for_each_support(model, [&](const Support& omega) {
        const double m = lp_mass_on(x, omega, p);
        if (m > best_mass) {
            best_mass = m;
            report.witness = omega;
        }
    }, limit);
    report.optimal = std::pow(std::max(0.0, total - best_mass), 1.0 / p);
    report.achieved = std::pow(std::max(0.0, total - lp_mass_on(x, report.returned, p)), 1.0 / p);

    const double allowed = oracle.quality.c_tail * report.optimal;
    report.inequality_ok = report.achieved <= allowed + 1e-9 * std::max(1.0, allowed);
    report.ok = report.inequality_ok && report.output_in_model;
    if (!report.inequality_ok)
        report.note = "tail error " + std::to_string(report.achieved) + " > c_T * optimal = " +
                      std::to_string(allowed);
    else if (!report.output_in_model)
        report.note = "returned support outside declared output model";
    return report;
}

}  // namespace cemd
