#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cemd/model.hpp"
#include "cemd/oracles.hpp"
#include "cemd/signal.hpp"

namespace cemd {

class FlowNetwork;

struct FlowResult {
    Support support;
    double cost = 0.0;
};

namespace detail {
FlowResult solve_min_cost_flow(FlowNetwork& network);
}

// Lagrangian flow network for tail projection. Grid cell (r, c) becomes an
// in/out node pair joined by a unit-capacity arc of cost -|X_rc|^p, which
// encodes the unit node capacity and node cost of the construction. Arcs of
// cost lambda*|r - r'| connect adjacent columns; the source feeds column 0
// and column w-1 drains into the sink. Supply and demand are s.
class FlowNetwork {
public:
    struct Arc {
        int to;
        int next;
        std::int16_t cap;
        std::int16_t move;  // row distance, signed; movement arcs cost lambda * move
        double cost;
    };

    FlowNetwork(int h, int w, int s, double lambda, int p)
        : h_(h), w_(w), s_(s), lambda_(lambda), p_(p),
          cell_gain_(static_cast<std::size_t>(h) * w, 0.0),
          head_(static_cast<std::size_t>(2 + 2 * h * w), -1) {
        const std::size_t arc_count = 2ull * h + static_cast<std::size_t>(h) * w +
                                      static_cast<std::size_t>(w - 1) * h * h;
        arcs_.reserve(2 * arc_count);
    }

    int source() const { return 0; }
    int sink() const { return 1; }
    int in_node(int r, int c) const { return 2 + 2 * (c * h_ + r); }
    int out_node(int r, int c) const { return 3 + 2 * (c * h_ + r); }
    int node_count() const { return 2 + 2 * h_ * w_; }

    int h() const { return h_; }
    int w() const { return w_; }
    int supply() const { return s_; }
    double lambda() const { return lambda_; }
    int p() const { return p_; }

    // |X_rc|^p; the in->out arc carries cost -cell_gain.
    double cell_gain(int r, int c) const { return cell_gain_[static_cast<std::size_t>(c * h_ + r)]; }
    void set_cell_gain(int r, int c, double g) { cell_gain_[static_cast<std::size_t>(c * h_ + r)] = g; }

    void add_arc(int from, int to, int cap, double cost, int move = 0) {
        push(from, to, cap, cost, move);
        push(to, from, 0, -cost, -move);
    }

    const std::vector<Arc>& arcs() const { return arcs_; }
    int first_arc(int node) const { return head_[static_cast<std::size_t>(node)]; }

    // Arc ids follow insertion order; the in->out arc of cell (r, c) sits in
    // the block after the h source arcs (see build_network).
    int cell_arc(int r, int c) const { return 2 * h_ + 2 * (c * h_ + r); }

    // Restores full capacities and rewrites the movement costs for a new
    // multiplier, so one network can serve a whole probe sequence.
    void reset_for_lambda(double lambda) {
        lambda_ = lambda;
        for (std::size_t a = 0; a < arcs_.size(); ++a) {
            arcs_[a].cap = (a % 2 == 0) ? 1 : 0;
            if (arcs_[a].move != 0) arcs_[a].cost = lambda * arcs_[a].move;
        }
    }

private:
    friend FlowResult detail::solve_min_cost_flow(FlowNetwork&);

    void push(int from, int to, int cap, double cost, int move) {
        arcs_.push_back({to, head_[static_cast<std::size_t>(from)], static_cast<std::int16_t>(cap),
                         static_cast<std::int16_t>(move), cost});
        head_[static_cast<std::size_t>(from)] = static_cast<int>(arcs_.size()) - 1;
    }

    int h_;
    int w_;
    int s_;
    double lambda_;
    int p_;
    std::vector<double> cell_gain_;
    std::vector<int> head_;
    std::vector<Arc> arcs_;
};

inline FlowNetwork build_network(const SignalMatrix& x, const CemdParams& params, double lambda,
                                 int p) {
    if (lambda < 0.0) throw std::invalid_argument("build_network: lambda must be nonnegative");
    check_norm_index(p);
    if (x.rows() != params.h || x.cols() != params.w)
        throw std::invalid_argument("build_network: signal dimensions do not match params");
    const int h = params.h;
    const int w = params.w;
    if (h > 16000) throw std::invalid_argument("build_network: grid height out of range");
    FlowNetwork g(h, w, params.col_sparsity(), lambda, p);

    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) {
            const double v = x(r, c);
            g.set_cell_gain(r, c, (p == 1) ? std::abs(v) : v * v);
        }
    }
    // Arc insertion order fixes the deterministic tie-breaking of the
    // shortest-path searches and the cell_arc() block offset.
    for (int r = 0; r < h; ++r) g.add_arc(g.source(), g.in_node(r, 0), 1, 0.0);
    for (int c = 0; c < w; ++c)
        for (int r = 0; r < h; ++r) g.add_arc(g.in_node(r, c), g.out_node(r, c), 1, -g.cell_gain(r, c));
    for (int c = 0; c + 1 < w; ++c)
        for (int r = 0; r < h; ++r)
            for (int r2 = 0; r2 < h; ++r2)
                g.add_arc(g.out_node(r, c), g.in_node(r2, c + 1), 1, lambda * std::abs(r - r2),
                          std::abs(r - r2));
    for (int r = 0; r < h; ++r) g.add_arc(g.out_node(r, w - 1), g.sink(), 1, 0.0);
    return g;
}

// Sum of adjacent-column sorted matchings; requires equal column sizes.
inline int exact_column_emd(const Support& omega, int w) {
    int total = 0;
    std::vector<int> prev = omega.col_rows(0);
    for (int c = 1; c < w; ++c) {
        std::vector<int> cur = omega.col_rows(c);
        if (cur.size() != prev.size())
            throw std::invalid_argument("exact_column_emd: ragged columns");
        for (std::size_t i = 0; i < cur.size(); ++i) total += std::abs(cur[i] - prev[i]);
        prev = std::move(cur);
    }
    return total;
}

namespace detail {

// Integral min-cost flow of value s via successive shortest augmenting
// paths, consuming the network's capacities. Initial node potentials and
// the first augmenting path come from one relaxation pass in topological
// order (the network is a DAG); the remaining rounds are Dijkstra searches
// on reduced costs. Path ties break on fewer hops then on arc order, so
// results are deterministic.
inline FlowResult solve_min_cost_flow(FlowNetwork& network) {
    const int h = network.h();
    const int w = network.w();
    const int s = network.supply();
    if (s > h) throw std::invalid_argument("min_cost_flow: supply exceeds column capacity");

    auto& arcs = network.arcs_;
    const int n = network.node_count();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> dist(static_cast<std::size_t>(n), kInf);
    std::vector<int> hops(static_cast<std::size_t>(n), 0);
    std::vector<int> parent_arc(static_cast<std::size_t>(n), -1);
    dist[static_cast<std::size_t>(network.source())] = 0.0;

    auto relax_from = [&](int u) {
        if (dist[static_cast<std::size_t>(u)] == kInf) return;
        for (int a = network.first_arc(u); a != -1; a = arcs[static_cast<std::size_t>(a)].next) {
            const auto& arc = arcs[static_cast<std::size_t>(a)];
            if (arc.cap <= 0) continue;
            const double nd = dist[static_cast<std::size_t>(u)] + arc.cost;
            const int nh = hops[static_cast<std::size_t>(u)] + 1;
            auto& dv = dist[static_cast<std::size_t>(arc.to)];
            auto& hv = hops[static_cast<std::size_t>(arc.to)];
            if (nd < dv || (nd == dv && nh < hv)) {
                dv = nd;
                hv = nh;
                parent_arc[static_cast<std::size_t>(arc.to)] = a;
            }
        }
    };
    // Topological order: source, then columns left to right, then sink.
    relax_from(network.source());
    for (int c = 0; c < w; ++c)
        for (int r = 0; r < h; ++r) {
            relax_from(network.in_node(r, c));
            relax_from(network.out_node(r, c));
        }

    std::vector<double> potential = dist;
    double total_cost = 0.0;

    for (int round = 0; round < s; ++round) {
        if (round > 0) {
            std::fill(dist.begin(), dist.end(), kInf);
            std::fill(hops.begin(), hops.end(), 0);
            std::fill(parent_arc.begin(), parent_arc.end(), -1);
            dist[static_cast<std::size_t>(network.source())] = 0.0;

            using Entry = std::tuple<double, int, int>;  // (dist, hops, node)
            std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
            queue.push({0.0, 0, network.source()});
            while (!queue.empty()) {
                auto [d, hp, u] = queue.top();
                queue.pop();
                if (d > dist[static_cast<std::size_t>(u)] ||
                    (d == dist[static_cast<std::size_t>(u)] &&
                     hp > hops[static_cast<std::size_t>(u)]))
                    continue;
                for (int a = network.first_arc(u); a != -1;
                     a = arcs[static_cast<std::size_t>(a)].next) {
                    const auto& arc = arcs[static_cast<std::size_t>(a)];
                    if (arc.cap <= 0) continue;
                    if (potential[static_cast<std::size_t>(arc.to)] == kInf) continue;
                    const double reduced = arc.cost + potential[static_cast<std::size_t>(u)] -
                                           potential[static_cast<std::size_t>(arc.to)];
                    const double nd = d + reduced;
                    const int nh = hp + 1;
                    auto& dv = dist[static_cast<std::size_t>(arc.to)];
                    auto& hv = hops[static_cast<std::size_t>(arc.to)];
                    if (nd < dv || (nd == dv && nh < hv)) {
                        dv = nd;
                        hv = nh;
                        parent_arc[static_cast<std::size_t>(arc.to)] = a;
                        queue.push({nd, nh, arc.to});
                    }
                }
            }
        }
        if (dist[static_cast<std::size_t>(network.sink())] == kInf)
            throw std::invalid_argument("min_cost_flow: network cannot carry the requested supply");

        if (round > 0) {
            const double dt = dist[static_cast<std::size_t>(network.sink())];
            for (int v = 0; v < n; ++v) {
                if (potential[static_cast<std::size_t>(v)] == kInf) continue;
                potential[static_cast<std::size_t>(v)] += std::min(dist[static_cast<std::size_t>(v)], dt);
            }
        }
        for (int v = network.sink(); v != network.source();) {
            const int a = parent_arc[static_cast<std::size_t>(v)];
            auto& arc = arcs[static_cast<std::size_t>(a)];
            auto& rev = arcs[static_cast<std::size_t>(a ^ 1)];
            arc.cap -= 1;
            rev.cap += 1;
            total_cost += arc.cost;
            v = rev.to;
        }
    }

    // Cells whose in->out arc carries flow; unit capacities keep every flow
    // value in {0, 1}.
    std::vector<GridIndex> cells;
    cells.reserve(static_cast<std::size_t>(s) * w);
    for (int c = 0; c < w; ++c)
        for (int r = 0; r < h; ++r) {
            const auto cap = arcs[static_cast<std::size_t>(network.cell_arc(r, c))].cap;
            if (cap != 0 && cap != 1) throw std::logic_error("min_cost_flow: non-integral flow");
            if (cap == 0) cells.push_back({r, c});
        }
    FlowResult result{Support(std::move(cells)), total_cost};

    // Lagrangian correspondence: cost of the flow must equal
    // -||X_Omega||_p^p + lambda * EMD(Omega).
    double mass = 0.0;
    for (const auto& e : result.support) mass += network.cell_gain(e.row, e.col);
    const double expected = -mass + network.lambda() * exact_column_emd(result.support, w);
    if (std::abs(result.cost - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
        throw std::logic_error("min_cost_flow: flow cost does not match Lagrangian value");
    return result;
}

}  // namespace detail

inline FlowResult min_cost_flow(const FlowNetwork& network) {
    FlowNetwork scratch = network;
    return detail::solve_min_cost_flow(scratch);
}

// Acceptable tail blow-ups: EMD may stretch by d, the tail error by
// c = 1 + 1/(d-1) + delta.
struct TailParams {
    double d = 2.0;
    double delta = 0.1;

    TailParams(double d_, double delta_) : d(d_), delta(delta_) {
        if (!(d > 1.0)) throw std::invalid_argument("TailParams: d must exceed 1");
        if (!(delta > 0.0)) throw std::invalid_argument("TailParams: delta must be positive");
    }

    double c() const { return 1.0 + 1.0 / (d - 1.0) + delta; }
};

struct TailProbe {
    double lambda = 0.0;
    int emd = 0;
    double tail_pp = 0.0;
};

namespace detail {

struct TailSolve {
    Support support;
    int emd = 0;
    double tail_pp = 0.0;
    bool tail_exact_zero = false;
};

// Holds one network across the probe sequence of a tail_approx call.
class TailProbeRunner {
public:
    TailProbeRunner(const SignalMatrix& x, const CemdParams& params, int p)
        : x_(x), params_(params), p_(p), network_(build_network(x, params, 0.0, p)),
          total_mass_(lp_mass(x, p)) {}

    TailSolve solve(double lambda, std::vector<TailProbe>* trace) {
        network_.reset_for_lambda(lambda);
        const FlowResult flow = solve_min_cost_flow(network_);
        TailSolve out;
        out.support = flow.support;
        out.emd = exact_column_emd(out.support, params_.w);
        int uncovered = 0;
        for (int c = 0; c < x_.cols(); ++c)
            for (int r = 0; r < x_.rows(); ++r)
                if (x_(r, c) != 0.0 && !out.support.contains(r, c)) ++uncovered;
        out.tail_exact_zero = uncovered == 0;
        out.tail_pp = out.tail_exact_zero
                          ? 0.0
                          : std::max(0.0, total_mass_ - lp_mass_on(x_, out.support, p_));
        if (trace) trace->push_back({lambda, out.emd, out.tail_pp});
        return out;
    }

    double total_mass() const { return total_mass_; }

private:
    const SignalMatrix& x_;
    const CemdParams& params_;
    int p_;
    FlowNetwork network_;
    double total_mass_;
};

}  // namespace detail

// TailApprox: one cheap probe that detects in-model signals, then a binary
// search over the Lagrange multiplier until either a support lands in the
// EMD window [B, dB] or the bracket collapses below epsilon, in which case
// the lambda_l solution satisfies the relaxed tail bound. The search is
// additionally capped at 200 rounds.
inline Support tail_approx(const SignalMatrix& x, const CemdParams& params, const TailParams& tail,
                           int p, std::vector<TailProbe>* trace = nullptr) {
    check_norm_index(p);
    if (x.rows() != params.h || x.cols() != params.w)
        throw std::invalid_argument("tail_approx: signal dimensions do not match params");

    detail::TailProbeRunner runner(x, params, p);

    double x_min = std::numeric_limits<double>::infinity();
    for (double v : x.values())
        if (v != 0.0) x_min = std::min(x_min, (p == 1) ? std::abs(v) : v * v);
    if (!std::isfinite(x_min)) {
        // Zero signal: any in-model support has zero tail. lambda = 0 keeps
        // the deterministic minimal-EMD pick of the solver.
        return runner.solve(0.0, trace).support;
    }

    const double wh2 = static_cast<double>(params.w) * params.h * params.h;
    const double epsilon = x_min * tail.delta / wh2;
    const double lambda0 = x_min / (2.0 * wh2);

    const auto first = runner.solve(lambda0, trace);
    if (first.tail_exact_zero && first.emd <= params.B) return first.support;

    double lambda_r = 0.0;
    double lambda_l = runner.total_mass();
    int rounds = 0;
    while (lambda_l - lambda_r > epsilon && rounds < 200) {
        ++rounds;
        const double lambda_m = 0.5 * (lambda_l + lambda_r);
        const auto probe = runner.solve(lambda_m, trace);
        if (probe.emd >= params.B && probe.emd <= tail.d * params.B) return probe.support;
        if (probe.emd > params.B)
            lambda_r = lambda_m;
        else
            lambda_l = lambda_m;
    }
    return runner.solve(lambda_l, trace).support;
}

// TailApprox packaged as a tail oracle: quality c^(1/p) into the model with
// budget floor(d*B).
inline TailOracle as_tail_oracle(const CemdParams& params, const TailParams& tail, int p) {
    check_norm_index(p);
    const CemdParams out(params.h, params.w, params.k,
                         static_cast<int>(std::floor(tail.d * params.B)));
    return TailOracle{
        [params, tail, p](const SignalMatrix& x) { return tail_approx(x, params, tail, p); },
        out, OracleQuality(1.0, std::pow(tail.c(), 1.0 / p), p)};
}

}  // namespace cemd
