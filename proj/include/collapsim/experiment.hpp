#pragma once

#include <string>

#include "collapsim/config.hpp"
#include "collapsim/simkit.hpp"

// Two-phase observation protocol. Phase 1 (baseline): no grating, the screen
// shows a narrow spot at x = 0 where the primary screen detector is placed;
// the coincidence peak against the heralds calibrates all fixed latencies
// (T0). Phase 2 (grating): the full diffraction profile with detectors at the
// configured (lateral-peak) positions yields T1. T1 - T0 isolates any
// collapse-induced delay from cables, fibers and response times, which are
// identical in both phases.

namespace collapsim::simkit {

enum class Phase { Baseline, Grating };

Phase parse_phase(const std::string& name);
std::string to_string(Phase phase);

/// Screen profile a phase diffracts onto: the tabulated grating profile, or
/// the narrow baseline spot (an ideal point, or a top-hat of the configured
/// halfwidth).
optics::IntensityProfile phase_profile(const config::RunConfig& cfg, Phase phase);

/// Detector layout for a phase: baseline moves the primary screen detector
/// (lowest channel id) to x = 0, everything else untouched.
std::vector<DetectorSpec> phase_detectors(const config::RunConfig& cfg, Phase phase);

/// Runs one phase end to end (heralds, propagation, detection) with a seed
/// substream derived from the config seed and the phase.
tags::TagStream simulate_phase(const config::RunConfig& cfg, Phase phase,
                               SimDiagnostics* diag = nullptr);

struct ExperimentResult {
    tags::TagStream baseline;
    tags::TagStream grating;
    optics::IntensityProfile grating_profile;
    double predicted_delay_s = 0.0;  ///< delayed-collapse prediction for this profile
    double injected_delay_s = 0.0;   ///< delay the configured model actually applied (grating phase)
};

/// Both phases with identical offsets, per the protocol.
ExperimentResult run_experiment(const config::RunConfig& cfg);

}  // namespace collapsim::simkit
