#include <doctest.h>

#include <cmath>

#include "collapsim/errors.hpp"
#include "collapsim/planner.hpp"
#include "collapsim/rng.hpp"

using namespace collapsim;

TEST_CASE("slit budget reproduces the ~30/s estimate, below dark noise") {
    const auto b = planner::budget_slit(1e5, 0.25, 5e-3, 3.0, 0.7, 100.0);
    CHECK(b.expected_rate_hz == doctest::Approx(29.1667).epsilon(1e-4));
    CHECK(std::abs(b.expected_rate_hz - 29.2) < 0.1);
    CHECK(b.snr < 1.0);
    CHECK(b.geometric_acceptance == doctest::Approx(5e-3 / 3.0).epsilon(1e-12));
}

TEST_CASE("slit budget edge cases") {
    CHECK(planner::budget_slit(1e5, 0.0, 5e-3, 3.0, 0.7, 100.0).expected_rate_hz == 0.0);
    CHECK(planner::budget_slit(1e5, 0.25, 3.0, 3.0, 0.7, 100.0).geometric_acceptance == 1.0);
    CHECK_THROWS_AS(planner::budget_slit(1e5, 0.25, 5e-3, 0.0, 0.7, 100.0), ConfigError);
}

TEST_CASE("grating budget with the integrated peak fraction") {
    const auto b = planner::budget_grating(1e5, 0.25, 0.224, 0.7, 100.0, 2e4);
    CHECK(b.expected_rate_hz == doctest::Approx(3920.0).epsilon(1e-12));
    CHECK(b.snr == doctest::Approx(39.2).epsilon(1e-12));
    REQUIRE(b.quoted_rate_hz.has_value());
    CHECK(*b.quoted_rate_hz == 2e4);
    // the quoted figure and the factor product disagree; both are reported
    CHECK(b.expected_rate_hz < *b.quoted_rate_hz);

    CHECK(planner::budget_grating(1e5, 0.25, 0.2, 0.7, 100.0).expected_rate_hz ==
          doctest::Approx(3500.0).epsilon(1e-12));
    CHECK(planner::budget_grating(0.0, 0.25, 0.224, 0.7, 100.0).expected_rate_hz == 0.0);
}

TEST_CASE("echo ceiling advisories") {
    CHECK(planner::echo_ceiling(1e5).status == planner::EchoStatus::AtLimit);
    CHECK(planner::echo_ceiling(1e3).status == planner::EchoStatus::Acceptable);
    CHECK(planner::echo_ceiling(1e6).status == planner::EchoStatus::JammingRisk);
    CHECK(planner::echo_ceiling(9.6e4).status == planner::EchoStatus::AtLimit);
    CHECK_THROWS_AS(planner::echo_ceiling(-1.0), ConfigError);
}

TEST_CASE("expected rate is monotone in every factor") {
    rng::Xoshiro256pp eng(808);
    for (int i = 0; i < 200; ++i) {
        const double src = rng::uniform01(eng) * 1e5;
        const double pe = rng::uniform01(eng);
        const double frac = rng::uniform01(eng);
        const double de = rng::uniform01(eng);
        const auto base = planner::budget_grating(src, pe, frac, de, 100.0);
        CHECK(planner::budget_grating(src * 1.1, pe, frac, de, 100.0).expected_rate_hz >=
              base.expected_rate_hz);
        CHECK(planner::budget_grating(src, std::min(1.0, pe + 0.05), frac, de, 100.0)
                  .expected_rate_hz >= base.expected_rate_hz);
        CHECK(planner::budget_grating(src, pe, std::min(1.0, frac + 0.05), de, 100.0)
                  .expected_rate_hz >= base.expected_rate_hz);
        CHECK(planner::budget_grating(src, pe, frac, std::min(1.0, de + 0.05), 100.0)
                  .expected_rate_hz >= base.expected_rate_hz);
    }
}

TEST_CASE("slit acceptance at full coverage equals grating acceptance of 1") {
    const auto slit = planner::budget_slit(7e4, 0.3, 2.0, 2.0, 0.6, 50.0);
    const auto grating = planner::budget_grating(7e4, 0.3, 1.0, 0.6, 50.0);
    CHECK(slit.expected_rate_hz == doctest::Approx(grating.expected_rate_hz).epsilon(1e-12));
    CHECK(slit.geometric_acceptance == 1.0);
}

TEST_CASE("budgets validate their ranges") {
    CHECK_THROWS_AS(planner::budget_grating(1e5, 1.5, 0.2, 0.7, 100.0), ConfigError);
    CHECK_THROWS_AS(planner::budget_grating(1e5, 0.25, -0.1, 0.7, 100.0), ConfigError);
    CHECK_THROWS_AS(planner::budget_grating(1e5, 0.25, 0.2, 7.0, 100.0), ConfigError);
    CHECK_THROWS_AS(planner::budget_grating(-1.0, 0.25, 0.2, 0.7, 100.0), ConfigError);
}
