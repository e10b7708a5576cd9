#include <catch2/catch_amalgamated.hpp>

#include "mdplab/schedule.hpp"

using namespace mdplab;

TEST_CASE("mu_hat recursion follows its three cases") {
    // unvisited pair: reset to the uniform guess
    CHECK(adaptive_mu_update(0.3, 0, 10, 12) == Catch::Approx(1.0 / 12.0));
    // empirical minimum within a factor of 2: keep the previous estimate
    CHECK(adaptive_mu_update(0.1, 15, 100, 12) == 0.1); // ratio 1.5
    // otherwise re-anchor at the empirical minimum
    CHECK(adaptive_mu_update(0.1, 30, 100, 12) == Catch::Approx(0.3)); // ratio 3
    CHECK(adaptive_mu_update(0.4, 10, 100, 12) == Catch::Approx(0.1)); // ratio 0.25
    // boundary ratios exactly 1/2 or 2 re-anchor (strict inequalities inside)
    CHECK(adaptive_mu_update(0.2, 10, 100, 12) == Catch::Approx(0.1));
    CHECK(adaptive_mu_update(0.05, 10, 100, 12) == Catch::Approx(0.1));
    CHECK_THROWS_AS(adaptive_mu_update(0.0, 5, 10, 12), std::logic_error);
    CHECK_THROWS_AS(adaptive_mu_update(0.1, -1, 10, 12), std::invalid_argument);
}

TEST_CASE("adaptive learning rate") {
    SECTION("clamps to 1 when the inner ratio is large") {
        // t=100, mu_hat=0.25, gamma=0.9: inner = 4.60517/2.025 = 2.274,
        // floor(log) = 0, so the raw rate is 1 and the min clamps at 1
        CHECK(adaptive_eta(100, 0.25, 0.9, 1.0) == 1.0);
        CHECK(adaptive_eta(2, 1e-6, 0.5, 5.0) == 1.0);
    }
    SECTION("matches the floored-exponent closed form at t = 1e6") {
        // inner = 13.8155/20250 = 6.8225e-4, log = -7.290, floor = -8
        const double eta = adaptive_eta(1'000'000, 0.25, 0.9, 1.0);
        CHECK(eta == Catch::Approx(std::exp(-8.0)).epsilon(1e-12));
        CHECK(eta == Catch::Approx(3.3546262790251185e-4).epsilon(1e-9));
    }
    SECTION("piecewise constant: changes only when the floored exponent moves") {
        double prev = adaptive_eta(2, 0.25, 0.9, 1.0);
        int changes = 0;
        for (long long t = 3; t < 5000; ++t) {
            const double eta = adaptive_eta(t, 0.25, 0.9, 1.0);
            if (eta != prev) ++changes;
            prev = eta;
        }
        CHECK(changes >= 1);
        CHECK(changes <= 12); // ~log of the range, not one change per step
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(adaptive_eta(1, 0.25, 0.9, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(adaptive_eta(10, 0.0, 0.9, 1.0), std::invalid_argument);
    }
}

TEST_CASE("mixing-time rate recipe") {
    SECTION("a huge mixing time selects the 1/t_mix branch") {
        const double c1 = 0.5;
        const double eta =
            mixing_rate_recipe(0.5, 0.1, 1000, 1'000'000, 0.9, 12, c1);
        const double expected =
            c1 / std::log(12.0 * 1000.0 / 0.1) / 1'000'000.0;
        CHECK(eta == Catch::Approx(expected).epsilon(1e-12));
    }
    SECTION("branch tie at eps = 1/(1-gamma), gamma = 0.5, t_mix = 1") {
        // (1-gamma)^4 eps^2 / gamma^2 = 0.0625*4/0.25 = 1 = 1/t_mix
        const double eta = mixing_rate_recipe(2.0, 0.1, 1000, 1, 0.5, 4, 1.0);
        CHECK(eta == Catch::Approx(1.0 / std::log(4.0 * 1000.0 / 0.1)).epsilon(1e-12));
    }
    SECTION("monotone in delta: doubling delta increases eta") {
        const double lo = mixing_rate_recipe(0.1, 0.05, 10000, 5, 0.9, 15, 0.5);
        const double hi = mixing_rate_recipe(0.1, 0.10, 10000, 5, 0.9, 15, 0.5);
        CHECK(hi > lo);
    }
    SECTION("clamped into (0,1]") {
        CHECK(mixing_rate_recipe(1.0, 0.5, 10, 1, 0.5, 1, 1e9) == 1.0);
        CHECK_THROWS_AS(mixing_rate_recipe(0.0, 0.1, 10, 1, 0.5, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(mixing_rate_recipe(0.1, 1.5, 10, 1, 0.5, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("cover-time rate recipe replaces 1/t_mix by 1") {
    // gamma = 0.5, eps = 2: the eps branch equals 1, so eta = c1/log(nT/delta)
    const double eta = cover_rate_recipe(2.0, 0.1, 1000, 0.5, 4, 1.0);
    CHECK(eta == Catch::Approx(1.0 / std::log(4.0 * 1000.0 / 0.1)).epsilon(1e-12));
    // the min never exceeds the eps branch
    CHECK(cover_rate_recipe(0.1, 0.1, 1000, 0.9, 4, 0.5) <=
          cover_rate_recipe(2.0, 0.1, 1000, 0.9, 4, 0.5));
    CHECK(cover_rate_recipe(0.1, 0.2, 1000, 0.9, 4, 0.5) >
          cover_rate_recipe(0.1, 0.1, 1000, 0.9, 4, 0.5));
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(validate(LearningRateSchedule{ConstantRate{0.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(LearningRateSchedule{ConstantRate{1.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(LearningRateSchedule{PolynomialRate{0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(LearningRateSchedule{PolynomialRate{1.0}}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate(LearningRateSchedule{PolynomialRate{0.75}}));
    CHECK_NOTHROW(validate(LearningRateSchedule{LinearRate{}}));
    CHECK_THROWS_AS(validate(LearningRateSchedule{AdaptiveRate{0.0}}),
                    std::invalid_argument);
    CHECK(describe(ConstantRate{0.25}) == "constant eta=0.25");
    CHECK(is_adaptive(AdaptiveRate{1.0}));
    CHECK_FALSE(is_adaptive(LinearRate{}));
}
