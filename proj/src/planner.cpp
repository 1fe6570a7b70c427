#include "collapsim/planner.hpp"

#include "collapsim/errors.hpp"

namespace collapsim::planner {

namespace {

RateBudget make_budget(double source, double path_eff, double acceptance, double det_eff,
                       double dark) {
    if (!(source >= 0.0)) throw ConfigError("budget: negative source rate");
    if (path_eff < 0.0 || path_eff > 1.0) throw ConfigError("budget: path efficiency out of range");
    if (acceptance < 0.0 || acceptance > 1.0)
        throw ConfigError("budget: geometric acceptance out of range");
    if (det_eff < 0.0 || det_eff > 1.0) throw ConfigError("budget: detector efficiency out of range");
    if (dark < 0.0) throw ConfigError("budget: negative dark rate");
    RateBudget b;
    b.source_rate_hz = source;
    b.path_efficiency = path_eff;
    b.geometric_acceptance = acceptance;
    b.detector_efficiency = det_eff;
    b.expected_rate_hz = source * path_eff * acceptance * det_eff;
    b.dark_rate_hz = dark;
    b.snr = dark > 0.0 ? b.expected_rate_hz / dark : 0.0;
    return b;
}

}  // namespace

RateBudget budget_slit(double source_rate_hz, double path_efficiency,
                       double detector_diameter_m, double spread_extent_m,
                       double detector_efficiency, double dark_rate_hz) {
    if (!(spread_extent_m > 0.0)) throw ConfigError("budget_slit: zero spread extent");
    if (detector_diameter_m < 0.0) throw ConfigError("budget_slit: negative detector diameter");
    const double acceptance =
        detector_diameter_m >= spread_extent_m ? 1.0 : detector_diameter_m / spread_extent_m;
    return make_budget(source_rate_hz, path_efficiency, acceptance, detector_efficiency,
                       dark_rate_hz);
}

RateBudget budget_grating(double source_rate_hz, double path_efficiency,
                          double peak_power_fraction, double detector_efficiency,
                          double dark_rate_hz, std::optional<double> quoted_rate_hz) {
    RateBudget b = make_budget(source_rate_hz, path_efficiency, peak_power_fraction,
                               detector_efficiency, dark_rate_hz);
    b.quoted_rate_hz = quoted_rate_hz;
    return b;
}

EchoAdvisory echo_ceiling(double requested_rate_hz) {
    if (requested_rate_hz < 0.0) throw ConfigError("echo_ceiling: negative rate");
    EchoAdvisory a;
    a.requested_rate_hz = requested_rate_hz;
    if (requested_rate_hz > kEchoCeilingHz)
        a.status = EchoStatus::JammingRisk;
    else if (requested_rate_hz >= 0.95 * kEchoCeilingHz)
        a.status = EchoStatus::AtLimit;
    else
        a.status = EchoStatus::Acceptable;
    return a;
}

std::string to_string(EchoStatus s) {
    switch (s) {
        case EchoStatus::Acceptable: return "acceptable";
        case EchoStatus::AtLimit: return "at_limit";
        case EchoStatus::JammingRisk: return "jamming_risk";
    }
    return "acceptable";
}

}  // namespace collapsim::planner
