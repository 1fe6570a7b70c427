#include "collapsim/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "collapsim/errors.hpp"
#include "collapsim/rng.hpp"

namespace collapsim::simkit {

Phase parse_phase(const std::string& name) {
    if (name == "baseline") return Phase::Baseline;
    if (name == "grating") return Phase::Grating;
    throw ConfigError("unknown phase: " + name + " (expected baseline or grating)");
}

std::string to_string(Phase phase) {
    return phase == Phase::Baseline ? "baseline" : "grating";
}

optics::IntensityProfile phase_profile(const config::RunConfig& cfg, Phase phase) {
    if (phase == Phase::Grating) {
        if (!cfg.grating)
            throw ConfigError("grating phase requested but config has no grating section");
        return optics::screen_profile(*cfg.grating, cfg.screen);
    }
    const double h = cfg.run.baseline_spot_halfwidth_m;
    if (h <= 0.0) return optics::delta_profile(0.0);
    // top-hat spot: enough bins that the sampler resolves it
    const int n = 33;
    std::vector<double> xs(n), ws(n, 1.0);
    for (int i = 0; i < n; ++i) xs[i] = -h + 2.0 * h * i / (n - 1);
    return optics::discrete_profile(std::move(xs), std::move(ws));
}

std::vector<DetectorSpec> phase_detectors(const config::RunConfig& cfg, Phase phase) {
    std::vector<DetectorSpec> dets = cfg.detectors;
    if (phase == Phase::Baseline && !dets.empty()) {
        auto primary = std::min_element(dets.begin(), dets.end(),
                                        [](const DetectorSpec& a, const DetectorSpec& b) {
                                            return a.channel < b.channel;
                                        });
        primary->position_m = 0.0;
    }
    return dets;
}

namespace {

tags::TagStream run_phase(const config::RunConfig& cfg, Phase phase,
                          const optics::IntensityProfile& profile, SimDiagnostics* diag) {
    const std::uint64_t purpose = phase == Phase::Baseline ? rng::kStreamPhaseBaseline
                                                           : rng::kStreamPhaseGrating;
    const std::uint64_t seed = rng::derive_seed(cfg.run.seed, purpose, 0);
    const auto detectors = phase_detectors(cfg, phase);

    tags::TagStream heralds = generate_heralds(cfg.source, cfg.run.duration_s, seed);
    heralds.header.config_hash = cfg.hash();
    heralds.header.phase = to_string(phase);

    tags::TagStream out = propagate_and_detect(heralds, cfg.source, profile, detectors,
                                               cfg.model, cfg.offsets, seed, diag);
    out.header.seed = cfg.run.seed;
    return out;
}

}  // namespace

tags::TagStream simulate_phase(const config::RunConfig& cfg, Phase phase,
                               SimDiagnostics* diag) {
    cfg.validate();
    return run_phase(cfg, phase, phase_profile(cfg, phase), diag);
}

ExperimentResult run_experiment(const config::RunConfig& cfg) {
    cfg.validate();
    if (!cfg.grating)
        throw ConfigError("run_experiment: config has no grating section");
    ExperimentResult r;
    r.baseline = run_phase(cfg, Phase::Baseline, phase_profile(cfg, Phase::Baseline), nullptr);
    r.grating_profile = phase_profile(cfg, Phase::Grating);
    r.grating = run_phase(cfg, Phase::Grating, r.grating_profile, nullptr);
    r.predicted_delay_s =
        collapse::detection_delay_s(collapse::CollapseModel::HellwigKraus, r.grating_profile);
    r.injected_delay_s = collapse::detection_delay_s(cfg.model, r.grating_profile);
    return r;
}

}  // namespace collapsim::simkit
