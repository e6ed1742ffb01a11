#include <catch2/catch_amalgamated.hpp>

#include "cemd/cemd.hpp"
#include "test_util.hpp"

using namespace cemd;

TEST_CASE("restrict keeps the support and zeroes the rest") {
    const auto x = SignalMatrix::from_rows({{1, 3}, {0, -1}, {2, 1}});
    const auto omega = Support::of({{0, 0}, {0, 1}});
    const auto restricted = restrict(x, omega);
    CHECK(restricted == SignalMatrix::from_rows({{1, 3}, {0, 0}, {0, 0}}));

    CHECK(restrict(x, Support{}) == SignalMatrix(3, 2));

    Support full = support_of(SignalMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}}));
    CHECK(restrict(x, full) == x);

    CHECK_THROWS_AS(restrict(x, Support::of({{3, 0}})), std::invalid_argument);
}

TEST_CASE("restrict is idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = testing::random_matrix(4, 3, rng);
        std::vector<GridIndex> entries;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 4; ++r)
                if (rng.bernoulli(0.4)) entries.push_back({r, c});
        const Support omega{std::move(entries)};
        const auto once = restrict(x, omega);
        CHECK(restrict(once, omega) == once);
    }
}

TEST_CASE("lp_norm basics") {
    CHECK(lp_norm(SignalMatrix(2, 2), 2) == 0.0);
    CHECK(lp_norm(SignalMatrix::from_rows({{3}, {4}}), 2) == Catch::Approx(5.0));
    CHECK(lp_norm(SignalMatrix::from_rows({{1, 3}, {0, -1}, {2, 1}}), 1) == Catch::Approx(8.0));
    CHECK_THROWS_AS(lp_norm(SignalMatrix(2, 2), 3), std::invalid_argument);
}

TEST_CASE("mass splits between a support and its complement") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = testing::random_matrix(5, 3, rng);
        std::vector<GridIndex> entries;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 5; ++r)
                if (rng.bernoulli(0.5)) entries.push_back({r, c});
        const Support omega{std::move(entries)};
        for (int p : {1, 2}) {
            const double total = lp_mass(x, p);
            const double on = lp_mass_on(x, omega, p);
            const double off = lp_mass(subtract(x, restrict(x, omega)), p);
            CHECK(std::abs(total - (on + off)) <= 1e-12 * std::max(1.0, total));
        }
    }
}

TEST_CASE("SignalMatrix rejects non-finite entries and bad shapes") {
    CHECK_THROWS_AS(SignalMatrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(SignalMatrix(2, 1, {1.0, std::numeric_limits<double>::quiet_NaN()}),
                    std::invalid_argument);
    SignalMatrix x(2, 2);
    CHECK_THROWS_AS(x.set(0, 0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("column-major flattening is the vector view") {
    const auto x = SignalMatrix::from_rows({{1, 4}, {2, 5}, {3, 6}});
    CHECK(x.values() == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(x.flat_index(1, 1) == 4);
}

TEST_CASE("Support iterates sorted by (col,row) without duplicates") {
    const auto s = Support::of({{2, 1}, {0, 0}, {2, 1}, {1, 0}});
    std::vector<GridIndex> expect{{0, 0}, {1, 0}, {2, 1}};
    CHECK(s.entries() == expect);
    CHECK(s.size() == 3);
    CHECK(s.contains(2, 1));
    CHECK_FALSE(s.contains(2, 0));
}

TEST_CASE("support text form round-trips") {
    const auto s = Support::of({{0, 0}, {2, 0}, {1, 2}});
    CHECK(format_support(s) == "0:0,2;2:1");
    CHECK(parse_support(format_support(s)) == s);
    CHECK(format_support(Support{}) == "");
    CHECK(parse_support("") == Support{});

    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<GridIndex> entries;
        for (int c = 0; c < 4; ++c)
            for (int r = 0; r < 5; ++r)
                if (rng.bernoulli(0.3)) entries.push_back({r, c});
        const Support omega{std::move(entries)};
        CHECK(parse_support(format_support(omega)) == omega);
    }
}
