#include <doctest.h>

#include <cmath>

#include "collapsim/collapse.hpp"
#include "collapsim/errors.hpp"
#include "collapsim/rng.hpp"
#include "support/oracles.hpp"

using namespace collapsim;
using collapse::CollapseModel;
using optics::IntensityProfile;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kC = 299792458.0;

IntensityProfile three_peak_profile(double q) {
    const double side = 4.0 / (kPi * kPi);
    return optics::discrete_profile({-q, 0.0, q}, {side, 1.0, side});
}

}  // namespace

TEST_CASE("two equal narrow peaks separated by q spread to q/2") {
    const double q = 3.0;
    const auto prof = optics::discrete_profile({-q / 2.0, q / 2.0}, {0.5, 0.5});
    const auto s = collapse::spread(prof);
    CHECK(s.spread_m == q / 2.0);  // exact: both masses sit q/2 from the center
    CHECK(s.t_delay_s == doctest::Approx(q / (2.0 * kC)).epsilon(1e-15));
    CHECK(s.t_delay_s * 1e9 == doctest::Approx(5.0035).epsilon(1e-4));
}

TEST_CASE("a single narrow peak has zero spread wherever it sits") {
    for (const double x0 : {-2.0, 0.0, 0.7}) {
        const auto s = collapse::spread(optics::delta_profile(x0));
        CHECK(s.spread_m == 0.0);
        CHECK(s.t_delay_s == 0.0);
    }
}

TEST_CASE("three-peak grating idealization: spread coefficient 8/(pi^2+8)") {
    const double q = 4.0 * std::asin(0.64);
    const auto s = collapse::spread(three_peak_profile(q));
    const double coeff = 8.0 / (kPi * kPi + 8.0);
    CHECK(s.spread_m / q == doctest::Approx(coeff).epsilon(1e-12));
    CHECK(coeff == doctest::Approx(0.4476875828047043).epsilon(1e-12));
    // rounds to 0.448 at three significant figures
    CHECK(std::round(coeff * 1000.0) == 448.0);
    CHECK(s.t_delay_s * 1e9 == doctest::Approx(4.148446587).epsilon(1e-9));
}

TEST_CASE("Gaussian profile: spread = sigma/sqrt(pi), checked by quadrature") {
    const double sigma = 0.35;
    // tabulated Gaussian, dense enough that discretization error is tiny
    const int n = 20001;
    std::vector<double> xs(n), ws(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = -8.0 * sigma + 16.0 * sigma * i / (n - 1);
        ws[i] = std::exp(-xs[i] * xs[i] / (sigma * sigma));
    }
    const auto s = collapse::spread(optics::discrete_profile(std::move(xs), std::move(ws)));

    const double analytic = sigma / std::sqrt(kPi);
    CHECK(analytic == doctest::Approx(sigma * 0.5641895835477563).epsilon(1e-12));
    CHECK(s.spread_m == doctest::Approx(analytic).epsilon(1e-6));

    // independent quadrature of the defining ratio
    auto f_num = [sigma](double x) { return std::abs(x) * std::exp(-x * x / (sigma * sigma)); };
    auto f_den = [sigma](double x) { return std::exp(-x * x / (sigma * sigma)); };
    const double by_quadrature = oracles::simpson(f_num, -8.0 * sigma, 8.0 * sigma) /
                                 oracles::simpson(f_den, -8.0 * sigma, 8.0 * sigma);
    CHECK(s.spread_m == doctest::Approx(by_quadrature).epsilon(1e-6));
}

TEST_CASE("spread rejects malformed profiles") {
    IntensityProfile bad;
    CHECK_THROWS_AS(collapse::spread(bad), ConfigError);
    bad.positions = {0.0, 1.0};
    bad.weights = {0.4, 0.4};  // unnormalized
    CHECK_THROWS_AS(collapse::spread(bad), ConfigError);
}

TEST_CASE("spread invariances: translation, reflection, scaling, support bound") {
    rng::Xoshiro256pp eng(4242);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng::uniform01(eng) * 40);
        std::vector<double> xs(n), ws(n);
        double x = -1.0;
        for (int i = 0; i < n; ++i) {
            x += 0.01 + rng::uniform01(eng) * 0.1;
            xs[i] = x;
            ws[i] = rng::uniform01(eng) + 1e-3;
        }
        const auto base = optics::discrete_profile(xs, ws);
        const double s0 = collapse::spread(base).spread_m;

        const double shift = (rng::uniform01(eng) - 0.5) * 10.0;
        std::vector<double> xs_shift(xs);
        for (auto& v : xs_shift) v += shift;
        const double s_shift =
            collapse::spread(optics::discrete_profile(xs_shift, ws)).spread_m;
        CHECK(s_shift == doctest::Approx(s0).epsilon(1e-9));

        std::vector<double> xs_mirror(n), ws_mirror(n);
        for (int i = 0; i < n; ++i) {
            xs_mirror[i] = -xs[n - 1 - i];
            ws_mirror[i] = ws[n - 1 - i];
        }
        const double s_mirror =
            collapse::spread(optics::discrete_profile(xs_mirror, ws_mirror)).spread_m;
        CHECK(s_mirror == doctest::Approx(s0).epsilon(1e-12));

        const double k = 0.1 + rng::uniform01(eng) * 5.0;
        std::vector<double> xs_scaled(xs);
        for (auto& v : xs_scaled) v *= k;
        const double s_scaled =
            collapse::spread(optics::discrete_profile(xs_scaled, ws)).spread_m;
        CHECK(s_scaled == doctest::Approx(k * s0).epsilon(1e-12));

        const double lmax = std::max(std::abs(xs.front()), std::abs(xs.back()));
        CHECK(s0 <= lmax);
    }
}

TEST_CASE("detection delay per model") {
    const double q = 4.0 * std::asin(0.64);
    const auto prof = three_peak_profile(q);
    CHECK(collapse::detection_delay_s(CollapseModel::Instantaneous, prof) == 0.0);
    CHECK(collapse::detection_delay_s(CollapseModel::Instantaneous,
                                      optics::delta_profile(1.0)) == 0.0);
    const double hk = collapse::detection_delay_s(CollapseModel::HellwigKraus, prof);
    CHECK(hk * 1e9 == doctest::Approx(4.1484).epsilon(1e-4));

    const auto two = optics::discrete_profile({-1.5, 1.5}, {0.5, 0.5});
    CHECK(collapse::detection_delay_s(CollapseModel::HellwigKraus, two) * 1e9 ==
          doctest::Approx(5.0035).epsilon(1e-4));
}

TEST_CASE("tabulated reference grating profile delays by about 4.15 ns") {
    const auto prof = optics::screen_profile(optics::GratingSpec::reference(),
                                             optics::ScreenGeometry::reference());
    const double hk = collapse::detection_delay_s(CollapseModel::HellwigKraus, prof);
    CHECK(hk * 1e9 == doctest::Approx(4.1498).epsilon(2e-3));
}

TEST_CASE("collapse model names round-trip") {
    CHECK(collapse::parse_collapse_model("instantaneous") == CollapseModel::Instantaneous);
    CHECK(collapse::parse_collapse_model("hellwig_kraus") == CollapseModel::HellwigKraus);
    CHECK(collapse::to_string(CollapseModel::HellwigKraus) == "hellwig_kraus");
    CHECK_THROWS_AS(collapse::parse_collapse_model("grw"), ConfigError);
}
