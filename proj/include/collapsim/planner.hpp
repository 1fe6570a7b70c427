#pragma once

#include <optional>
#include <string>

// Feasibility arithmetic: expected detector count rates for the single-slit
// and grating layouts, signal-to-dark-noise ratios, and the afterpulse-echo
// ceiling on the heralded source rate.

namespace collapsim::planner {

struct RateBudget {
    double source_rate_hz = 0.0;
    double path_efficiency = 0.0;
    double geometric_acceptance = 0.0;
    double detector_efficiency = 0.0;
    double expected_rate_hz = 0.0;  ///< product of the four factors
    double dark_rate_hz = 0.0;
    double snr = 0.0;  ///< expected / dark, 0 when dark_rate == 0
    std::optional<double> quoted_rate_hz;  ///< external estimate echoed for comparison
};

/// Slit layout: the diffracted light spreads over `spread_extent` and a
/// detector of diameter d intercepts the 1-D ratio d / spread_extent.
RateBudget budget_slit(double source_rate_hz, double path_efficiency,
                       double detector_diameter_m, double spread_extent_m,
                       double detector_efficiency, double dark_rate_hz);

/// Grating layout: a lateral order is focused onto the detector, so the
/// geometric acceptance is that peak's share of the total screen power.
/// `quoted_rate_hz`, when given, is carried through for comparison tables.
RateBudget budget_grating(double source_rate_hz, double path_efficiency,
                          double peak_power_fraction, double detector_efficiency,
                          double dark_rate_hz,
                          std::optional<double> quoted_rate_hz = std::nullopt);

/// Heralded-source rate ceiling above which afterpulse echoes jam the
/// observation (~1e5 /s for avalanche photodiodes).
inline constexpr double kEchoCeilingHz = 1e5;

enum class EchoStatus { Acceptable, AtLimit, JammingRisk };

struct EchoAdvisory {
    double requested_rate_hz = 0.0;
    double ceiling_hz = kEchoCeilingHz;
    EchoStatus status = EchoStatus::Acceptable;
};

/// Flags requested rates near (within 5%) or above the echo ceiling.
EchoAdvisory echo_ceiling(double requested_rate_hz);

std::string to_string(EchoStatus s);

}  // namespace collapsim::planner
