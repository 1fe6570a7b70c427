#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "collapsim/collapse.hpp"
#include "collapsim/optics.hpp"
#include "collapsim/tags.hpp"

// Discrete-event Monte Carlo: heralded photon source, screen detectors with
// realistic imperfections (efficiency, jitter, dark counts, dead time,
// afterpulsing), and picosecond time-tag stream generation under a chosen
// collapse model. Fully deterministic for a fixed seed; per-herald and
// per-channel randomness comes from independently derived substreams, so
// generation is partitionable without changing results.

namespace collapsim::simkit {

/// Herald channel id (the detector heralding the single-photon state).
inline constexpr std::uint8_t kHeraldChannel = 1;

struct Fock1 {};  ///< exactly one photon per heralded slot

struct Coherent {
    double mean_photon_number = 1.0;  ///< Poisson photon number per slot
};

struct SourceSpec {
    double herald_rate_hz = 0.0;
    double path_efficiency = 0.0;  ///< probability the slot's light reaches the screen
    std::variant<Fock1, Coherent> statistics = Fock1{};

    bool is_fock() const { return std::holds_alternative<Fock1>(statistics); }

    /// Throws ConfigError on invariant violations; returns a warning string
    /// when the rate exceeds the afterpulse-echo ceiling (empty otherwise).
    std::string validate() const;
};

struct DetectorSpec {
    std::uint8_t channel = 0;
    double position_m = 0.0;
    double aperture_m = 0.0;  ///< collecting diameter; accepts |x - position| <= aperture/2
    double efficiency = 0.0;
    double dark_rate_hz = 0.0;
    double resolution_fwhm_s = 0.0;  ///< Gaussian jitter, sigma = FWHM / 2.355
    double afterpulse_prob = 0.0;    ///< per registered tag; echo delay is exponential
    double afterpulse_mean_delay_s = 50e-9;
    double dead_time_s = 0.0;

    void validate() const;
};

/// Fixed per-channel latency (cables, fibers, free-space flight, detector
/// response), added to every tag of that channel.
struct ChannelOffsets {
    std::map<std::uint8_t, double> seconds;

    double get(std::uint8_t channel) const {
        const auto it = seconds.find(channel);
        return it == seconds.end() ? 0.0 : it->second;
    }
    void validate() const;
};

/// Bookkeeping counters; per_herald_detections is filled only when a non-null
/// diagnostics pointer is passed (used by the photon-conservation check).
struct SimDiagnostics {
    std::uint64_t heralds = 0;
    std::uint64_t photons_on_screen = 0;
    std::uint64_t signal_tags = 0;
    std::uint64_t dark_tags = 0;
    std::uint64_t afterpulse_tags = 0;
    std::uint64_t dead_time_suppressed = 0;
    std::vector<std::uint32_t> per_herald_detections;
};

/// Homogeneous Poisson herald process at herald_rate over [0, duration).
/// Deterministic for a fixed seed; times are raw emission times (channel
/// offsets are applied downstream).
tags::TagStream generate_heralds(const SourceSpec& source, double duration_s,
                                 std::uint64_t seed);

/// Propagates each heralded slot to the screen: with probability
/// source.path_efficiency the slot's light reaches the screen, carrying one
/// photon (Fock1) or a Poisson number (Coherent); each photon lands at a
/// position sampled from the profile, and a detector covering that position
/// registers it with its efficiency at
///   herald time + channel offset + collapse delay + Gaussian jitter.
/// Per-channel dark counts, dead time and afterpulsing are then applied.
/// Returns all screen tags merged with the D1 passthrough (offset applied),
/// sorted by (time, channel).
tags::TagStream propagate_and_detect(const tags::TagStream& heralds,
                                     const SourceSpec& source,
                                     const optics::IntensityProfile& profile,
                                     const std::vector<DetectorSpec>& detectors,
                                     collapse::CollapseModel model,
                                     const ChannelOffsets& offsets, std::uint64_t seed,
                                     SimDiagnostics* diag = nullptr);

}  // namespace collapsim::simkit
