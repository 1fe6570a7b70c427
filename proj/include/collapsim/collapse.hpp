#pragma once

#include <string>

#include "collapsim/optics.hpp"

// Spread functional and collapse hypotheses. Under light-cone-delayed
// reduction, a state spread over a distance s on the screen takes s/c to
// collapse, so detections lag a narrow-spot reference by t = s/c. The spread
// is the intensity-weighted mean absolute deviation from the profile's center
// of mass; standard instantaneous collapse predicts no lag at all.

namespace collapsim::collapse {

/// Exact SI speed of light (m/s).
inline constexpr double kSpeedOfLight = 299792458.0;

struct SpreadResult {
    double spread_m = 0.0;   ///< mean |x - x_cm| under the profile weights
    double t_delay_s = 0.0;  ///< spread_m / c
};

enum class CollapseModel {
    Instantaneous,  ///< standard reduction: zero delay for every profile
    HellwigKraus,   ///< light-cone reduction: delay = spread / c
};

/// Spread of a tabulated profile, evaluated on the profile's own bins so the
/// value is consistent with what the Monte Carlo sampler actually draws from.
/// Throws ConfigError for an empty or unnormalized profile.
SpreadResult spread(const optics::IntensityProfile& profile);

/// The detection delay a collapse hypothesis assigns to a whole profile; one
/// value per profile, applied identically to every event drawn from it.
double detection_delay_s(CollapseModel model, const optics::IntensityProfile& profile);

CollapseModel parse_collapse_model(const std::string& name);
std::string to_string(CollapseModel model);

}  // namespace collapsim::collapse
