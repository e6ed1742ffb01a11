#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cemd/cemd.hpp"
#include "test_util.hpp"

using namespace cemd;

namespace {

const CemdParams kModel(8, 4, 4, 4);

RecoveryConfig exact_config(int p, Algorithm algo = Algorithm::am_iht) {
    const OraclePair oracles = make_exact_oracles(kModel, p);
    RecoveryConfig cfg;
    cfg.algorithm = algo;
    cfg.head = oracles.head;
    cfg.tail = oracles.tail;
    cfg.max_iters = 30;
    cfg.residual_stop = 1e-14;
    return cfg;
}

}  // namespace

TEST_CASE("identity operator recovers in one iteration") {
    Rng rng(401);
    const auto A = DenseOperator::identity(8, 4);
    for (auto algo : {Algorithm::am_iht, Algorithm::am_cosamp}) {
        RecoveryConfig cfg = exact_config(2, algo);
        cfg.max_iters = 1;
        const SignalMatrix x = random_model_signal(kModel, rng, 2);
        const auto res = algo == Algorithm::am_iht ? am_iht(A.apply(x), A, cfg)
                                                   : am_cosamp(A.apply(x), A, cfg);
        CHECK(lp_norm(subtract(x, res.estimate), 2) <= 1e-12);
    }
}

TEST_CASE("private-neighborhood expander recovers in one iteration") {
    Rng rng(403);
    const auto E = ExpanderOperator::private_blocks(8, 4, 3);
    RecoveryConfig cfg = exact_config(1);
    cfg.max_iters = 1;
    const SignalMatrix x = random_model_signal(kModel, rng, 1);
    const auto res = am_iht_rip1(E.apply(x), E, cfg);
    CHECK(lp_norm(subtract(x, res.estimate), 1) <= 1e-12);
}

TEST_CASE("noiseless gaussian recovery with exact oracles") {
    int ok = 0;
    RecoveryConfig cfg = exact_config(2);
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(split_seed(42, seed));
        const SignalMatrix x = random_model_signal(kModel, rng, 2);
        const auto A =
            DenseOperator::make(DenseFamily::gaussian, 48, 8, 4, split_seed(42, 1000 + seed));
        const auto res = am_iht(A.apply(x), A, cfg);
        if (lp_norm(subtract(x, res.estimate), 2) <= 1e-6 * lp_norm(x, 2)) ++ok;
    }
    CHECK(ok >= 18);
}

TEST_CASE("am_cosamp first iterate matches its written composition") {
    Rng rng(409);
    const SignalMatrix x = random_model_signal(kModel, rng, 2);
    const auto A = DenseOperator::make(DenseFamily::gaussian, 48, 8, 4, 77);
    const Eigen::VectorXd y = A.apply(x);
    RecoveryConfig cfg = exact_config(2, Algorithm::am_cosamp);
    cfg.max_iters = 1;
    const auto res = am_cosamp(y, A, cfg);

    const SignalMatrix proxy = A.adjoint_apply(y);
    const Support gamma = cfg.head.project(proxy);
    const Support cand = gamma.unite(Support{});  // x^0 = 0
    const SignalMatrix z = restricted_least_squares(A, cand, y);
    const SignalMatrix expect = restrict(z, cfg.tail.project(z));
    CHECK(res.estimate == expect);
    CHECK(support_of(res.estimate).is_subset_of(cand));
}

TEST_CASE("iterates stay in the tail oracle's declared output model") {
    const OraclePair oracles = make_cemd_oracles(kModel, TailParams(2.0, 0.1), 2, 3);
    RecoveryConfig cfg;
    cfg.head = oracles.head;
    cfg.tail = oracles.tail;
    cfg.max_iters = 8;
    for (int seed = 0; seed < 5; ++seed) {
        Rng rng(split_seed(419, seed));
        const SignalMatrix x = random_model_signal(kModel, rng, 2);
        const auto A =
            DenseOperator::make(DenseFamily::gaussian, 64, 8, 4, split_seed(419, 1000 + seed));
        const Eigen::VectorXd y = A.apply(x);

        SignalMatrix estimate(8, 4);
        for (int i = 0; i < cfg.max_iters; ++i) {
            const SignalMatrix proxy = A.adjoint_apply(y - A.apply(estimate));
            const SignalMatrix update = add(estimate, restrict(proxy, cfg.head.project(proxy)));
            estimate = restrict(update, cfg.tail.project(update));
            CHECK(is_member(support_of(estimate), oracles.tail.output_model));
        }
    }
}

TEST_CASE("per-iteration contraction with exact oracles at small distortion") {
    const CemdParams scope(8, 4, 16, 16);  // signal + tail + head scope
    RecoveryConfig cfg = exact_config(2);
    cfg.record_trajectory = true;
    cfg.residual_stop = 0.0;
    cfg.max_iters = 12;
    for (int seed = 0; seed < 3; ++seed) {
        Rng rng(split_seed(421, seed));
        const SignalMatrix x = random_model_signal(kModel, rng, 2);
        const auto A =
            DenseOperator::make(DenseFamily::gaussian, 8192, 8, 4, split_seed(421, 1000 + seed));
        const auto est = estimate_model_rip(A, scope, 24, 2, split_seed(421, 2000 + seed));
        const auto cc = constants(1.0, 1.0, est.delta_lower, Algorithm::am_iht);
        REQUIRE(cc.feasible);

        const auto res = am_iht(A.apply(x), A, cfg, &x);
        for (std::size_t i = 1; i < res.trajectory.size(); ++i) {
            const double prev = *res.trajectory[i - 1].error;
            const double cur = *res.trajectory[i].error;
            CHECK(cur <= cc.alpha * prev + 1e-12);
            if (i >= 2) CHECK(cur <= prev + 1e-12);  // monotone after the first step
        }
    }
}

TEST_CASE("convergence constants frozen evaluations") {
    const auto perfect = constants(1.0, 1.0, 0.0, Algorithm::am_iht);
    CHECK(perfect.alpha0 == 1.0);
    CHECK(perfect.beta0 == 2.0);
    CHECK(perfect.alpha == 0.0);
    CHECK(perfect.feasible);

    // c_T = 1, delta -> 0: feasibility boundary sits at c_H = sqrt(3)/2.
    const double boundary = std::sqrt(3.0) / 2.0;
    CHECK_FALSE(constants(boundary - 1e-6, 1.0, 0.0, Algorithm::am_iht).feasible);
    CHECK(constants(boundary + 1e-6, 1.0, 0.0, Algorithm::am_iht).feasible);

    // c_T = 10 requires c_H > sqrt(1 - 1/121) ~ 0.9959.
    const double needed = std::sqrt(1.0 - 1.0 / 121.0);
    CHECK_FALSE(constants(needed - 1e-4, 10.0, 0.0, Algorithm::am_iht).feasible);
    CHECK(constants(needed + 1e-4, 10.0, 0.0, Algorithm::am_iht).feasible);

    const auto rip1 = constants(1.0, 1.0, 0.1, Algorithm::am_iht_rip1);
    CHECK(rip1.rho0 == Catch::Approx(0.4 / 0.6));
    CHECK(rip1.rho == Catch::Approx(2.0 * (2.0 * (0.4 / 0.6) + 1.0 - (1.0 - 0.4 / 0.6))));
    CHECK(rip1.tau == Catch::Approx(2.0 * 3.0 * 4.0));

    const auto infeasible = constants(0.1, 1.0, 0.4, Algorithm::am_iht);
    CHECK_FALSE(infeasible.feasible);
    CHECK(infeasible.note.find("alpha0") != std::string::npos);
    const auto bad_rip1 = constants(1.0, 1.0, 0.3, Algorithm::am_iht_rip1);
    CHECK_FALSE(bad_rip1.feasible);
    CHECK_FALSE(bad_rip1.note.empty());
}

TEST_CASE("iteration bound and final error coefficient") {
    const auto cc = constants(0.99, 1.0, 0.01, Algorithm::am_iht);
    REQUIRE(cc.feasible);
    const int t = iteration_bound(cc, 10.0, 0.1);
    CHECK(t == static_cast<int>(std::ceil(std::log(100.0) / std::log(1.0 / cc.alpha))));
    CHECK(final_error_coefficient(cc) == Catch::Approx(1.0 + cc.beta / (1.0 - cc.alpha)));
    CHECK_THROWS_AS(iteration_bound(constants(0.1, 1.0, 0.4, Algorithm::am_iht), 1.0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("identical seeds give bit-identical trajectories") {
    auto run = []() {
        Rng rng(split_seed(431, 0));
        const SignalMatrix x = random_model_signal(kModel, rng, 2);
        const auto A = DenseOperator::make(DenseFamily::gaussian, 64, 8, 4, split_seed(431, 1));
        const OraclePair oracles = make_cemd_oracles(kModel, TailParams(2.0, 0.1), 2, 2);
        RecoveryConfig cfg;
        cfg.head = oracles.head;
        cfg.tail = oracles.tail;
        cfg.max_iters = 15;
        return am_iht(A.apply(x), A, cfg, &x);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.estimate == b.estimate);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
        CHECK(a.trajectory[i].residual == b.trajectory[i].residual);
        CHECK(*a.trajectory[i].error == *b.trajectory[i].error);
    }
}

TEST_CASE("adversarial demo at a small size") {
    AdversarialConfig cfg;
    cfg.run_contrast = true;
    const auto rep = adversarial_demo(16, 1e6, 5, cfg);
    // c -> infinity pushes the threshold to 1, and ||a||^2 >= a_1^2 = 1.
    CHECK(rep.threshold == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(rep.proxy_norm_sq >= 1.0);
    CHECK(rep.oracle_condition);
    CHECK(rep.iterates_stayed_zero);
    CHECK(rep.stuck_error == 1.0);
    CHECK(rep.contrast_ran);
    CHECK(rep.contrast_recovered);

    CHECK_THROWS_AS(adversarial_demo(8, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(adversarial_demo(64, 1.0, 1), std::invalid_argument);
}

TEST_CASE("trajectory csv has the documented columns") {
    Rng rng(433);
    const auto A = DenseOperator::identity(8, 4);
    RecoveryConfig cfg = exact_config(2);
    cfg.max_iters = 2;
    const SignalMatrix x = random_model_signal(kModel, rng, 2);
    const auto res = am_iht(A.apply(x), A, cfg, &x);
    std::ostringstream out;
    write_trajectory_csv(out, res.trajectory);
    const std::string text = out.str();
    CHECK(text.rfind("iter,residual_p,error_p,support_emd,col_sparsity_max", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          static_cast<long>(res.trajectory.size()) + 1);
}

TEST_CASE("rip1 loop shrugs off one corrupted measurement") {
    // The median over 7 neighbors ignores a single bad value, so the final
    // error sits far inside the tau/(1-rho) envelope (tau0 = 4, nominal
    // delta = 0.02).
    const OraclePair oracles = make_exact_oracles(kModel, 1);
    const auto cc = constants(1.0, 1.0, 0.02, Algorithm::am_iht_rip1);
    REQUIRE(cc.feasible);
    const double envelope = cc.tau / (1.0 - cc.rho);
    for (int seed = 0; seed < 5; ++seed) {
        Rng rng(split_seed(808, seed));
        const SignalMatrix x = random_model_signal(kModel, rng, 1);
        const auto E = ExpanderOperator::make(96, 8, 4, 7, split_seed(808, 1000 + seed));
        Eigen::VectorXd y = E.apply(x);
        const double mag = 0.1 * y.lpNorm<1>();
        y(rng.uniform_int(0, 95)) += mag;
        RecoveryConfig cfg;
        cfg.head = oracles.head;
        cfg.tail = oracles.tail;
        cfg.max_iters = 50;
        cfg.residual_stop = 1e-14;
        const auto res = am_iht_rip1(y, E, cfg);
        CHECK(lp_norm(subtract(x, res.estimate), 1) <= envelope * mag);
    }
}

TEST_CASE("operators describe themselves as regeneration tuples") {
    const auto A = DenseOperator::make(DenseFamily::gaussian, 10, 4, 2, 99);
    CHECK(A.describe() == "gaussian,m=10,h=4,w=2,seed=99");
    const auto E = ExpanderOperator::make(15, 4, 2, 5, 7);
    CHECK(E.describe() == "expander,m=15,h=4,w=2,d_deg=5,seed=7");
}
