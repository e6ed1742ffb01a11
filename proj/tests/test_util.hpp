#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "cemd/cemd.hpp"

namespace cemd::testing {

// Brute-force EMD: minimum over all bijections. Independent of the
// sorted-matching implementation it checks.
inline int emd_all_bijections(std::vector<int> a, std::vector<int> b) {
    std::sort(b.begin(), b.end());
    int best = std::numeric_limits<int>::max();
    do {
        int cost = 0;
        for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[i]);
        best = std::min(best, cost);
    } while (std::next_permutation(b.begin(), b.end()));
    return best;
}

inline SignalMatrix random_matrix(int h, int w, Rng& rng) {
    SignalMatrix x(h, w);
    for (int c = 0; c < w; ++c)
        for (int r = 0; r < h; ++r) x.set(r, c, rng.gaussian());
    return x;
}

// Exhaustive max-weight path search over all h^w row sequences.
struct BrutePath {
    std::vector<int> rows;
    double weight = -1.0;
};

inline BrutePath brute_max_weight_path(const SignalMatrix& x, int budget, int p) {
    const int h = x.rows();
    const int w = x.cols();
    BrutePath best;
    std::vector<int> rows(static_cast<std::size_t>(w), 0);
    while (true) {
        int emd = 0;
        for (int c = 1; c < w; ++c)
            emd += std::abs(rows[static_cast<std::size_t>(c)] - rows[static_cast<std::size_t>(c - 1)]);
        if (emd <= budget) {
            double weight = 0.0;
            for (int c = 0; c < w; ++c) {
                const double v = x(rows[static_cast<std::size_t>(c)], c);
                weight += (p == 1) ? std::abs(v) : v * v;
            }
            if (weight > best.weight) {
                best.weight = weight;
                best.rows = rows;
            }
        }
        int c = w - 1;
        while (c >= 0 && rows[static_cast<std::size_t>(c)] == h - 1) {
            rows[static_cast<std::size_t>(c)] = 0;
            --c;
        }
        if (c < 0) break;
        ++rows[static_cast<std::size_t>(c)];
    }
    return best;
}

}  // namespace cemd::testing
