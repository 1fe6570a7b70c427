#include "collapsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "collapsim/errors.hpp"
#include "collapsim/planner.hpp"

namespace collapsim::config {

using nlohmann::json;

namespace {

double require_number(const json& j, const char* section, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("config: ") + section + "." + key +
                          " missing or not a number");
    return j[key].get<double>();
}

json source_to_json(const simkit::SourceSpec& s) {
    json j;
    j["herald_rate_hz"] = s.herald_rate_hz;
    j["path_efficiency"] = s.path_efficiency;
    if (s.is_fock()) {
        j["statistics"] = {{"type", "fock1"}};
    } else {
        j["statistics"] = {
            {"type", "coherent"},
            {"mean_photon_number", std::get<simkit::Coherent>(s.statistics).mean_photon_number}};
    }
    return j;
}

simkit::SourceSpec source_from_json(const json& j) {
    simkit::SourceSpec s;
    s.herald_rate_hz = require_number(j, "source", "herald_rate_hz");
    s.path_efficiency = require_number(j, "source", "path_efficiency");
    if (j.contains("statistics")) {
        const auto& st = j["statistics"];
        const std::string type = st.value("type", "fock1");
        if (type == "fock1") {
            s.statistics = simkit::Fock1{};
        } else if (type == "coherent") {
            simkit::Coherent c;
            c.mean_photon_number = require_number(st, "source.statistics", "mean_photon_number");
            s.statistics = c;
        } else {
            throw ConfigError("config: unknown source statistics type: " + type);
        }
    }
    return s;
}

json detector_to_json(const simkit::DetectorSpec& d) {
    json j;
    j["channel"] = d.channel;
    j["position_m"] = d.position_m;
    j["aperture_m"] = d.aperture_m;
    j["efficiency"] = d.efficiency;
    j["dark_rate_hz"] = d.dark_rate_hz;
    j["resolution_fwhm_s"] = d.resolution_fwhm_s;
    j["afterpulse_prob"] = d.afterpulse_prob;
    j["afterpulse_mean_delay_s"] = d.afterpulse_mean_delay_s;
    j["dead_time_s"] = d.dead_time_s;
    return j;
}

simkit::DetectorSpec detector_from_json(const json& j) {
    simkit::DetectorSpec d;
    const double ch = require_number(j, "detectors[]", "channel");
    if (ch < 0 || ch > 255 || ch != std::floor(ch))
        throw ConfigError("config: detector channel must be an integer in [0,255]");
    d.channel = static_cast<std::uint8_t>(ch);
    d.position_m = require_number(j, "detectors[]", "position_m");
    d.aperture_m = require_number(j, "detectors[]", "aperture_m");
    d.efficiency = require_number(j, "detectors[]", "efficiency");
    d.dark_rate_hz = require_number(j, "detectors[]", "dark_rate_hz");
    d.resolution_fwhm_s = require_number(j, "detectors[]", "resolution_fwhm_s");
    d.afterpulse_prob = j.value("afterpulse_prob", 0.0);
    d.afterpulse_mean_delay_s = j.value("afterpulse_mean_delay_s", 50e-9);
    d.dead_time_s = j.value("dead_time_s", 0.0);
    return d;
}

}  // namespace

std::vector<std::string> RunConfig::validate() const {
    std::vector<std::string> warnings;
    const std::string rate_warning = source.validate();
    if (!rate_warning.empty()) warnings.push_back("source: " + rate_warning);
    screen.validate();
    if (grating) grating->validate();
    if (detectors.empty()) throw ConfigError("config: no detectors configured");
    for (const auto& d : detectors) {
        d.validate();
        if (std::abs(d.position_m) + d.aperture_m / 2.0 > screen.extent_halfwidth_m)
            throw ConfigError("config: detector on channel " + std::to_string(d.channel) +
                              " lies off the screen");
    }
    offsets.validate();
    if (!(run.duration_s > 0.0)) throw ConfigError("config: run duration must be positive");
    if (run.baseline_spot_halfwidth_m < 0.0)
        throw ConfigError("config: baseline spot halfwidth must be non-negative");
    if (grating) {
        const auto peaks = optics::peak_angles(*grating);
        double outermost = 0.0;
        for (const auto& pk : peaks) outermost = std::max(outermost, std::abs(pk.theta_rad));
        const double theta_screen = screen.tan_mapping
                                        ? std::atan(screen.extent_halfwidth_m / screen.focal_m)
                                        : screen.extent_halfwidth_m / screen.focal_m;
        if (outermost > theta_screen)
            warnings.push_back("screen: extent does not cover the outermost diffraction order");
    }
    return warnings;
}

json RunConfig::to_json() const {
    json j;
    j["source"] = source_to_json(source);
    if (grating) {
        j["grating"] = {{"period_m", grating->period_m},
                        {"aperture_m", grating->aperture_m},
                        {"lines_illuminated", grating->lines_illuminated},
                        {"wavelength_m", grating->wavelength_m}};
    }
    j["screen"] = {{"focal_m", screen.focal_m},
                   {"extent_halfwidth_m", screen.extent_halfwidth_m},
                   {"sample_count", screen.sample_count},
                   {"tan_mapping", screen.tan_mapping}};
    j["detectors"] = json::array();
    for (const auto& d : detectors) j["detectors"].push_back(detector_to_json(d));
    j["collapse"] = collapse::to_string(model);
    json off = json::object();
    for (const auto& [ch, s] : offsets.seconds) off[std::to_string(ch)] = s;
    j["offsets"] = off;
    j["run"] = {{"duration_s", run.duration_s},
                {"seed", run.seed},
                {"baseline_spot_halfwidth_m", run.baseline_spot_halfwidth_m}};
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    if (!j.contains("source")) throw ConfigError("config: missing source section");
    c.source = source_from_json(j["source"]);
    if (j.contains("grating") && !j["grating"].is_null()) {
        optics::GratingSpec g;
        g.period_m = require_number(j["grating"], "grating", "period_m");
        g.aperture_m = require_number(j["grating"], "grating", "aperture_m");
        const double n = require_number(j["grating"], "grating", "lines_illuminated");
        g.lines_illuminated = static_cast<int>(n);
        g.wavelength_m = require_number(j["grating"], "grating", "wavelength_m");
        c.grating = g;
    }
    if (!j.contains("screen")) throw ConfigError("config: missing screen section");
    c.screen.focal_m = require_number(j["screen"], "screen", "focal_m");
    c.screen.extent_halfwidth_m = require_number(j["screen"], "screen", "extent_halfwidth_m");
    c.screen.sample_count =
        static_cast<int>(require_number(j["screen"], "screen", "sample_count"));
    c.screen.tan_mapping = j["screen"].value("tan_mapping", false);
    if (!j.contains("detectors") || !j["detectors"].is_array())
        throw ConfigError("config: missing detectors array");
    for (const auto& dj : j["detectors"]) c.detectors.push_back(detector_from_json(dj));
    if (!j.contains("collapse") || !j["collapse"].is_string())
        throw ConfigError("config: missing collapse model");
    c.model = collapse::parse_collapse_model(j["collapse"].get<std::string>());
    if (j.contains("offsets")) {
        for (const auto& [key, value] : j["offsets"].items()) {
            const int ch = std::stoi(key);
            if (ch < 0 || ch > 255) throw ConfigError("config: offsets channel out of range");
            c.offsets.seconds[static_cast<std::uint8_t>(ch)] = value.get<double>();
        }
    }
    if (!j.contains("run")) throw ConfigError("config: missing run section");
    c.run.duration_s = require_number(j["run"], "run", "duration_s");
    if (!j["run"].contains("seed"))
        throw ConfigError("config: run.seed is required (no wall-clock seeding)");
    c.run.seed = j["run"]["seed"].get<std::uint64_t>();
    c.run.baseline_spot_halfwidth_m = j["run"].value("baseline_spot_halfwidth_m", 0.0);
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return from_json(j);
}

void RunConfig::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << to_json().dump(2) << "\n";
    if (!os) throw IoError("write failed: " + path);
}

RunConfig RunConfig::reference() {
    RunConfig c;
    c.source.herald_rate_hz = 1e5;
    c.source.path_efficiency = 0.25;
    c.source.statistics = simkit::Fock1{};
    c.grating = optics::GratingSpec::reference();
    c.screen = optics::ScreenGeometry::reference();

    const double q = c.screen.focal_m *
                     std::asin(c.grating->wavelength_m / c.grating->period_m);
    simkit::DetectorSpec d2;
    d2.channel = 2;
    d2.position_m = q;
    d2.aperture_m = 5e-3;
    d2.efficiency = 0.7;
    d2.dark_rate_hz = 100.0;
    d2.resolution_fwhm_s = 2e-9;
    d2.afterpulse_prob = 0.02;
    d2.afterpulse_mean_delay_s = 50e-9;
    d2.dead_time_s = 50e-9;
    simkit::DetectorSpec d3 = d2;
    d3.channel = 3;
    d3.position_m = -q;
    c.detectors = {d2, d3};

    c.model = collapse::CollapseModel::Instantaneous;
    // Fixed latencies: herald arm electronics vs. screen arm (fiber + 4 m
    // free-space flight + detector response). Their difference is what the
    // baseline run calibrates away as T0.
    c.offsets.seconds[simkit::kHeraldChannel] = 12e-9;
    c.offsets.seconds[2] = 25e-9;
    c.offsets.seconds[3] = 25e-9;
    c.run.duration_s = 60.0;
    c.run.seed = 12345;
    return c;
}

std::string RunConfig::hash() const {
    const std::uint64_t h = fnv1a64(to_json().dump());
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like section.key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &j;
    std::size_t pos = 0;
    std::vector<std::string> keys;
    while (pos <= path.size()) {
        const auto dot = path.find('.', pos);
        keys.push_back(path.substr(pos, dot == std::string::npos ? dot : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        const std::string& k = keys[i];
        if (node->is_array()) {
            const std::size_t idx = std::stoul(k);
            if (idx >= node->size())
                throw ConfigError("override index out of range: " + path);
            node = &(*node)[idx];
        } else if (node->is_object()) {
            if (!node->contains(k)) (*node)[k] = json::object();
            node = &(*node)[k];
        } else {
            throw ConfigError("override path does not resolve: " + path);
        }
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // plain string
    const std::string& leaf = keys.back();
    if (node->is_array())
        (*node)[std::stoul(leaf)] = parsed;
    else
        (*node)[leaf] = parsed;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace collapsim::config
