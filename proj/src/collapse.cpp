#include "collapsim/collapse.hpp"

#include <cmath>

#include "collapsim/errors.hpp"

namespace collapsim::collapse {

SpreadResult spread(const optics::IntensityProfile& profile) {
    profile.validate();
    double s = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i)
        s += std::abs(profile.positions[i] - profile.center_of_mass) * profile.weights[i];
    return {s, s / kSpeedOfLight};
}

double detection_delay_s(CollapseModel model, const optics::IntensityProfile& profile) {
    switch (model) {
        case CollapseModel::Instantaneous:
            profile.validate();
            return 0.0;
        case CollapseModel::HellwigKraus:
            return spread(profile).t_delay_s;
    }
    throw ConfigError("unknown collapse model");
}

CollapseModel parse_collapse_model(const std::string& name) {
    if (name == "instantaneous") return CollapseModel::Instantaneous;
    if (name == "hellwig_kraus") return CollapseModel::HellwigKraus;
    throw ConfigError("unknown collapse model: " + name +
                      " (expected instantaneous or hellwig_kraus)");
}

std::string to_string(CollapseModel model) {
    return model == CollapseModel::Instantaneous ? "instantaneous" : "hellwig_kraus";
}

}  // namespace collapsim::collapse
