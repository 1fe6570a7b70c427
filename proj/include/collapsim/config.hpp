#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapsim/collapse.hpp"
#include "collapsim/optics.hpp"
#include "collapsim/simkit.hpp"

// One structured JSON document describes a full run: source, grating, screen,
// detectors, collapse model, channel latencies and run controls. Every command
// is a deterministic function of (config, seed); reports embed the config hash
// so results stay traceable to their inputs.

namespace collapsim::config {

struct RunControls {
    double duration_s = 60.0;
    std::uint64_t seed = 12345;
    /// Halfwidth of the grating-free "narrow spot" on the screen; 0 means an
    /// ideal point (all baseline photons land exactly at x = 0).
    double baseline_spot_halfwidth_m = 0.0;
};

struct RunConfig {
    simkit::SourceSpec source;
    std::optional<optics::GratingSpec> grating;  ///< absent = slit/spot-only runs
    optics::ScreenGeometry screen;
    std::vector<simkit::DetectorSpec> detectors;
    collapse::CollapseModel model = collapse::CollapseModel::Instantaneous;
    simkit::ChannelOffsets offsets;
    RunControls run;

    /// Throws ConfigError on hard violations; returns human-readable warnings
    /// (echo-ceiling rate, screen narrower than the outermost order, ...).
    std::vector<std::string> validate() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;

    /// Reference setup: 800 lines/mm symmetric grating, 800 nm, N = 2000,
    /// f = 4 m screen, detectors D2/D3 at the +-1 order peaks, realistic
    /// avalanche-photodiode imperfections.
    static RunConfig reference();

    /// FNV-1a hash (hex) of the canonical JSON serialization.
    std::string hash() const;
};

/// Applies a "section.key=value" override to a config JSON document. The path
/// may index arrays ("detectors.0.efficiency=0.6"); the value is parsed as
/// JSON when possible, else taken as a string. Throws ConfigError for paths
/// that do not resolve.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace collapsim::config
