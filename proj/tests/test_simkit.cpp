#include <doctest.h>

#include <cmath>
#include <set>

#include "collapsim/errors.hpp"
#include "collapsim/experiment.hpp"
#include "collapsim/planner.hpp"
#include "collapsim/simkit.hpp"
#include "support/oracles.hpp"

using namespace collapsim;
using simkit::ChannelOffsets;
using simkit::DetectorSpec;
using simkit::SourceSpec;

namespace {

SourceSpec fock_source(double rate = 1e5, double path_eff = 1.0) {
    SourceSpec s;
    s.herald_rate_hz = rate;
    s.path_efficiency = path_eff;
    s.statistics = simkit::Fock1{};
    return s;
}

DetectorSpec ideal_detector(std::uint8_t ch, double pos, double aperture) {
    DetectorSpec d;
    d.channel = ch;
    d.position_m = pos;
    d.aperture_m = aperture;
    d.efficiency = 1.0;
    d.dark_rate_hz = 0.0;
    d.resolution_fwhm_s = 2e-9;
    d.afterpulse_prob = 0.0;
    d.afterpulse_mean_delay_s = 50e-9;
    d.dead_time_s = 0.0;
    return d;
}

// two lateral-peak windows of the reference pattern, generous apertures
optics::IntensityProfile lateral_pair_profile() {
    const double q = 2.7779930625;
    const double side = 4.0 / (M_PI * M_PI);
    // narrow three-point clusters so sampling cells stay tight
    std::vector<double> xs, ws;
    for (const double c : {-q, 0.0, q}) {
        const double w = c == 0.0 ? 1.0 : side;
        for (int k = -1; k <= 1; ++k) {
            xs.push_back(c + k * 1e-4);
            ws.push_back(w);
        }
    }
    return optics::discrete_profile(xs, ws);
}

}  // namespace

TEST_CASE("heralds: Poisson count statistics and determinism") {
    const auto s1 = simkit::generate_heralds(fock_source(), 10.0, 42);
    const double expected = 1e5 * 10.0;
    CHECK(std::abs(static_cast<double>(s1.tags.size()) - expected) < 4.0 * std::sqrt(expected));

    const auto s2 = simkit::generate_heralds(fock_source(), 10.0, 42);
    CHECK(s1.tags == s2.tags);

    const auto s3 = simkit::generate_heralds(fock_source(), 10.0, 43);
    CHECK(s1.tags != s3.tags);

    CHECK(s1.is_sorted());
    CHECK(s1.tags.front().t_ps >= 0);

    CHECK_THROWS_AS(simkit::generate_heralds(fock_source(), 0.0, 1), ConfigError);
    CHECK_THROWS_AS(simkit::generate_heralds(fock_source(), -2.0, 1), ConfigError);
}

TEST_CASE("herald rate above the echo ceiling only warns") {
    CHECK(fock_source(2e5).validate() != "");
    CHECK(fock_source(1e5).validate() == "");
    const auto s = simkit::generate_heralds(fock_source(2e5), 0.1, 7);
    CHECK(s.tags.size() > 15000);
}

TEST_CASE("Fock1 exclusivity: at most one screen detection per herald, never both detectors") {
    const auto profile = lateral_pair_profile();
    const double q = 2.7779930625;
    const std::vector<DetectorSpec> dets{ideal_detector(2, q, 0.5),
                                         ideal_detector(3, -q, 0.5)};
    ChannelOffsets off;
    off.seconds[1] = 0.0;

    const auto heralds = simkit::generate_heralds(fock_source(1e4), 20.0, 99);
    simkit::SimDiagnostics diag;
    const auto out = simkit::propagate_and_detect(heralds, fock_source(1e4), profile, dets,
                                                  collapse::CollapseModel::Instantaneous, off,
                                                  99, &diag);
    CHECK(diag.heralds == heralds.tags.size());
    REQUIRE(diag.per_herald_detections.size() == heralds.tags.size());
    for (const auto n : diag.per_herald_detections) CHECK(n <= 1);
    CHECK(diag.dark_tags == 0);
    CHECK(diag.afterpulse_tags == 0);
    CHECK(out.is_sorted());
    // both lateral windows capture ~22.4% each
    const double frac2 = static_cast<double>(out.count(2)) / diag.heralds;
    CHECK(std::abs(frac2 - 0.2239) < 0.01);
}

TEST_CASE("Coherent slots can fire both detectors; frequency matches Poisson thinning") {
    SourceSpec src = fock_source(1e4);
    src.statistics = simkit::Coherent{1.0};
    const auto profile = lateral_pair_profile();
    const double q = 2.7779930625;
    auto da = ideal_detector(2, q, 0.5);
    auto db = ideal_detector(3, -q, 0.5);
    da.resolution_fwhm_s = db.resolution_fwhm_s = 1e-12;  // keep tags inside tight windows
    ChannelOffsets off;

    const auto heralds = simkit::generate_heralds(src, 30.0, 4096);
    simkit::SimDiagnostics diag;
    const auto out = simkit::propagate_and_detect(heralds, src, profile, {da, db},
                                                  collapse::CollapseModel::Instantaneous, off,
                                                  4096, &diag);
    const auto alpha = analysis::anticorrelation_alpha(out.channel_times(1),
                                                       out.channel_times(2),
                                                       out.channel_times(3), 2000.0, 0.0, 0.0);
    // photon numbers in the two windows are independent Poisson (thinning of
    // the coherent slot), each with mean = the window's profile weight
    const double side = (4.0 / (M_PI * M_PI)) / (1.0 + 8.0 / (M_PI * M_PI));
    const double p_one = 1.0 - std::exp(-side);
    const double n_her = static_cast<double>(alpha.n_heralds);
    CHECK(alpha.n_ab > 0);
    CHECK(std::abs(static_cast<double>(alpha.n_a) - n_her * p_one) <
          4.0 * std::sqrt(n_her * p_one));
    CHECK(std::abs(static_cast<double>(alpha.n_ab) - n_her * p_one * p_one) <
          4.0 * std::sqrt(n_her * p_one * p_one) + 5.0);
    CHECK(alpha.alpha == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("dark counts alone follow the configured rate") {
    SourceSpec src = fock_source(1e4, 0.0);  // all signal paths blocked
    auto det = ideal_detector(2, 0.0, 5e-3);
    det.dark_rate_hz = 100.0;
    ChannelOffsets off;

    const auto heralds = simkit::generate_heralds(src, 100.0, 31337);
    const auto out = simkit::propagate_and_detect(heralds, src, optics::delta_profile(0.0),
                                                  {det}, collapse::CollapseModel::Instantaneous,
                                                  off, 31337);
    const double n = static_cast<double>(out.count(2));
    CHECK(std::abs(n - 1e4) < 4.0 * 100.0);  // 1e4 +- 4 sqrt(1e4)
}

TEST_CASE("registered times are herald + offset + delay + Gaussian jitter") {
    SourceSpec src = fock_source(1e4);
    auto det = ideal_detector(2, 0.0, 1e-2);
    ChannelOffsets off;
    off.seconds[1] = 10e-9;
    off.seconds[2] = 30e-9;

    const auto heralds = simkit::generate_heralds(src, 10.0, 5);
    const auto out = simkit::propagate_and_detect(heralds, src, optics::delta_profile(0.0),
                                                  {det}, collapse::CollapseModel::Instantaneous,
                                                  off, 5);
    const auto d1 = out.channel_times(1);
    const auto d2 = out.channel_times(2);
    REQUIRE(d1.size() == heralds.tags.size());
    REQUIRE(d2.size() == heralds.tags.size());  // lossless chain

    // jitter distribution: mean 20 ns offset difference, sigma = FWHM/2.355
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i)
        mean += static_cast<double>(d2[i] - d1[i]);
    mean /= static_cast<double>(d1.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        const double dev = static_cast<double>(d2[i] - d1[i]) - mean;
        var += dev * dev;
    }
    var /= static_cast<double>(d1.size() - 1);
    const double sigma_expected = 2e-9 / 2.3548200450309493 * 1e12;
    CHECK(std::abs(mean - 20000.0) < 3.0 * sigma_expected / std::sqrt(1e5));
    const double fwhm_measured = std::sqrt(var) * 2.3548200450309493;
    CHECK(std::abs(fwhm_measured - 2000.0) / 2000.0 < 0.05);
}

TEST_CASE("dead time suppresses close tags per channel") {
    SourceSpec src = fock_source(5e4, 0.0);
    auto det = ideal_detector(2, 0.0, 5e-3);
    det.dark_rate_hz = 5e4;  // dense darks to force collisions
    det.dead_time_s = 10e-6;
    ChannelOffsets off;

    const auto heralds = simkit::generate_heralds(src, 5.0, 61);
    simkit::SimDiagnostics diag;
    const auto out = simkit::propagate_and_detect(heralds, src, optics::delta_profile(0.0),
                                                  {det}, collapse::CollapseModel::Instantaneous,
                                                  off, 61, &diag);
    CHECK(diag.dead_time_suppressed > 0);
    const auto times = out.channel_times(2);
    for (std::size_t i = 1; i < times.size(); ++i)
        CHECK(times[i] - times[i - 1] >= 10000000);  // 10 us in ps
}

TEST_CASE("afterpulses appear at the configured probability") {
    SourceSpec src = fock_source(1e4, 0.0);
    auto det = ideal_detector(2, 0.0, 5e-3);
    det.dark_rate_hz = 1e4;
    det.afterpulse_prob = 0.25;
    det.afterpulse_mean_delay_s = 100e-9;
    ChannelOffsets off;

    const auto heralds = simkit::generate_heralds(src, 10.0, 4711);
    simkit::SimDiagnostics diag;
    const auto out = simkit::propagate_and_detect(heralds, src, optics::delta_profile(0.0),
                                                  {det}, collapse::CollapseModel::Instantaneous,
                                                  off, 4711, &diag);
    // accepted tags ~ darks + echoes; echo fraction p/(1-p) of primaries
    const double primaries = static_cast<double>(diag.dark_tags);
    const double expected_echoes = primaries * 0.25 / 0.75;
    CHECK(std::abs(static_cast<double>(diag.afterpulse_tags) - expected_echoes) <
          5.0 * std::sqrt(expected_echoes));
    CHECK(out.count(2) == diag.dark_tags + diag.afterpulse_tags);
}

TEST_CASE("collapse model shifts every screen tag by the profile delay") {
    SourceSpec src = fock_source(1e4);
    auto det = ideal_detector(2, 1.5, 1e-2);
    det.resolution_fwhm_s = 1e-12;  // effectively no jitter
    ChannelOffsets off;

    // two narrow clusters at +-1.5 m => spread 1.5 m => delay 5.0035 ns
    std::vector<double> xs, ws;
    for (int k = -1; k <= 1; ++k) {
        xs.push_back(-1.5 + k * 1e-5);
        ws.push_back(1.0);
    }
    for (int k = -1; k <= 1; ++k) {
        xs.push_back(1.5 + k * 1e-5);
        ws.push_back(1.0);
    }
    const auto profile = optics::discrete_profile(xs, ws);

    const auto heralds = simkit::generate_heralds(src, 2.0, 8);
    const auto inst = simkit::propagate_and_detect(heralds, src, profile, {det},
                                                   collapse::CollapseModel::Instantaneous, off, 8);
    const auto hk = simkit::propagate_and_detect(heralds, src, profile, {det},
                                                 collapse::CollapseModel::HellwigKraus, off, 8);
    const auto t_inst = inst.channel_times(2);
    const auto t_hk = hk.channel_times(2);
    REQUIRE(t_inst.size() == t_hk.size());
    const std::int64_t delay =
        static_cast<std::int64_t>(std::llround(1.5 / 299792458.0 * 1e12));
    for (std::size_t i = 0; i < t_inst.size(); ++i) CHECK(t_hk[i] - t_inst[i] == delay);
}

TEST_CASE("propagate validates detector layout") {
    SourceSpec src = fock_source();
    const auto heralds = simkit::generate_heralds(src, 0.01, 3);
    const auto prof = optics::delta_profile(0.0);
    ChannelOffsets off;

    CHECK_THROWS_AS(simkit::propagate_and_detect(heralds, src, prof, {},
                                                 collapse::CollapseModel::Instantaneous, off, 3),
                    ConfigError);
    // overlapping apertures
    const std::vector<DetectorSpec> overlap{ideal_detector(2, 0.0, 0.1),
                                            ideal_detector(3, 0.04, 0.1)};
    CHECK_THROWS_AS(simkit::propagate_and_detect(heralds, src, prof, overlap,
                                                 collapse::CollapseModel::Instantaneous, off, 3),
                    ConfigError);
    const std::vector<DetectorSpec> dup{ideal_detector(2, -1.0, 0.1),
                                        ideal_detector(2, 1.0, 0.1)};
    CHECK_THROWS_AS(simkit::propagate_and_detect(heralds, src, prof, dup,
                                                 collapse::CollapseModel::Instantaneous, off, 3),
                    ConfigError);
}

TEST_CASE("long-run detected rate converges to the planner budget") {
    auto cfg = config::RunConfig::reference();
    cfg.run.duration_s = 20.0;
    cfg.run.seed = 777;
    for (auto& det : cfg.detectors) {
        det.dark_rate_hz = 0.0;  // compare signal only
        det.afterpulse_prob = 0.0;
        det.dead_time_s = 0.0;
    }
    const auto profile = simkit::phase_profile(cfg, simkit::Phase::Grating);
    const auto& d2 = cfg.detectors.front();
    const double capture =
        profile.mass_in(d2.position_m - d2.aperture_m / 2.0, d2.position_m + d2.aperture_m / 2.0);
    const auto budget =
        planner::budget_grating(cfg.source.herald_rate_hz, cfg.source.path_efficiency, capture,
                                d2.efficiency, 100.0);

    const auto stream = simkit::simulate_phase(cfg, simkit::Phase::Grating);
    const double n_expected = budget.expected_rate_hz * cfg.run.duration_s;
    const double n_seen = static_cast<double>(stream.count(2));
    CHECK(std::abs(n_seen - n_expected) < 3.0 * std::sqrt(n_expected));
}

TEST_CASE("phase profiles and detector placement") {
    auto cfg = config::RunConfig::reference();
    const auto base_prof = simkit::phase_profile(cfg, simkit::Phase::Baseline);
    CHECK(base_prof.size() == 1);
    CHECK(base_prof.positions[0] == 0.0);
    CHECK(collapse::spread(base_prof).spread_m == 0.0);

    cfg.run.baseline_spot_halfwidth_m = 2e-4;
    const auto spot = simkit::phase_profile(cfg, simkit::Phase::Baseline);
    CHECK(spot.size() > 1);
    CHECK(collapse::spread(spot).spread_m == doctest::Approx(1e-4).epsilon(0.05));

    const auto dets = simkit::phase_detectors(cfg, simkit::Phase::Baseline);
    CHECK(dets[0].channel == 2);
    CHECK(dets[0].position_m == 0.0);
    CHECK(dets[1].position_m == cfg.detectors[1].position_m);

    const auto dets_g = simkit::phase_detectors(cfg, simkit::Phase::Grating);
    CHECK(dets_g[0].position_m == cfg.detectors[0].position_m);

    cfg.grating.reset();
    CHECK_THROWS_AS(simkit::phase_profile(cfg, simkit::Phase::Grating), ConfigError);
    CHECK_THROWS_AS(simkit::run_experiment(cfg), ConfigError);
}

TEST_CASE("simulate_phase is deterministic and phase-separated") {
    auto cfg = config::RunConfig::reference();
    cfg.run.duration_s = 0.5;
    const auto a = simkit::simulate_phase(cfg, simkit::Phase::Baseline);
    const auto b = simkit::simulate_phase(cfg, simkit::Phase::Baseline);
    CHECK(a.tags == b.tags);
    const auto g = simkit::simulate_phase(cfg, simkit::Phase::Grating);
    CHECK(a.tags != g.tags);
    CHECK(a.header.phase == "baseline");
    CHECK(g.header.phase == "grating");
    CHECK(a.header.config_hash == cfg.hash());
}
