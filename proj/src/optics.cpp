#include "collapsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "collapsim/errors.hpp"

namespace collapsim::optics {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Switch to the series expansion this close to a removable singularity.
constexpr double kSingularBand = 1e-6;

// sinc^2(u) = (sin u / u)^2 with the u -> 0 limit handled by series.
double sinc_sq(double u) {
    if (std::abs(u) < kSingularBand) {
        // log sinc(u) = -u^2/6 - u^4/180 - ...
        const double u2 = u * u;
        return std::exp(-u2 / 3.0 - u2 * u2 / 90.0);
    }
    const double s = std::sin(u) / u;
    return s * s;
}

// Normalized multi-slit factor sin^2(N g)/(N^2 sin^2 g), peaks of height 1 at
// g = k*pi. Reduce g mod pi first; near the peak use the series of
// [sin(N e)/(N sin e)]^2 = exp(-(N^2-1)e^2/3 - (N^4-1)e^4/90 - ...).
double grating_factor(double gamma, int n) {
    if (n == 1) return 1.0;
    const double e = gamma - kPi * std::round(gamma / kPi);
    const double nd = static_cast<double>(n);
    if (std::abs(e) * nd < kSingularBand) {
        const double e2 = e * e;
        return std::exp(-(nd * nd - 1.0) * e2 / 3.0 - (nd * nd * nd * nd - 1.0) * e2 * e2 / 90.0);
    }
    const double r = std::sin(nd * e) / (nd * std::sin(e));
    return r * r;
}

}  // namespace

void GratingSpec::validate() const {
    if (!(period_m > 0.0) || !std::isfinite(period_m))
        throw ConfigError("grating: period must be positive");
    if (!(aperture_m > 0.0) || aperture_m > period_m)
        throw ConfigError("grating: aperture must satisfy 0 < a <= p");
    if (lines_illuminated < 1)
        throw ConfigError("grating: need at least one illuminated line");
    if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m))
        throw ConfigError("grating: wavelength must be positive");
}

GratingSpec GratingSpec::reference() {
    GratingSpec g;
    g.period_m = 1.0 / 800e3;  // 800 lines/mm
    g.aperture_m = g.period_m / 2.0;
    g.lines_illuminated = 2000;
    g.wavelength_m = 800e-9;
    return g;
}

void ScreenGeometry::validate() const {
    if (!(focal_m > 0.0)) throw ConfigError("screen: focal length must be positive");
    if (!(extent_halfwidth_m > 0.0)) throw ConfigError("screen: extent must be positive");
    if (sample_count < 2) throw ConfigError("screen: need at least 2 samples");
}

ScreenGeometry ScreenGeometry::reference() {
    ScreenGeometry s;
    s.focal_m = 4.0;
    s.extent_halfwidth_m = 3.0;
    s.sample_count = 1 << 20;
    return s;
}

double IntensityProfile::mass_in(double lo, double hi) const {
    const auto first = std::lower_bound(positions.begin(), positions.end(), lo);
    const auto last = std::upper_bound(positions.begin(), positions.end(), hi);
    return std::accumulate(weights.begin() + (first - positions.begin()),
                           weights.begin() + (last - positions.begin()), 0.0);
}

void IntensityProfile::validate() const {
    if (positions.empty() || positions.size() != weights.size())
        throw ConfigError("profile: empty or mismatched arrays");
    double sum = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(positions[i])) throw ConfigError("profile: non-finite position");
        if (i > 0 && !(positions[i] > positions[i - 1]))
            throw ConfigError("profile: positions must be strictly increasing");
        if (!(weights[i] >= 0.0)) throw ConfigError("profile: negative weight");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("profile: weights must sum to 1");
    double cm = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) cm += positions[i] * weights[i];
    const double extent = std::max(std::abs(positions.front()), std::abs(positions.back()));
    if (std::abs(cm - center_of_mass) > 1e-12 * std::max(extent, 1.0))
        throw ConfigError("profile: center_of_mass inconsistent with data");
}

double relative_intensity(const GratingSpec& grating, double theta_rad) {
    grating.validate();
    if (!std::isfinite(theta_rad)) throw ConfigError("theta must be finite");
    const double s = std::sin(theta_rad);
    if (std::abs(s) > 1.0) throw ConfigError("non-propagating direction: |sin theta| > 1");
    const double beta = kPi * grating.aperture_m / grating.wavelength_m * s;
    const double gamma = kPi * grating.period_m / grating.wavelength_m * s;
    return sinc_sq(beta) * grating_factor(gamma, grating.lines_illuminated);
}

std::vector<OrderPeak> peak_angles(const GratingSpec& grating) {
    grating.validate();
    std::vector<OrderPeak> peaks;
    if (grating.lines_illuminated == 1) {
        peaks.push_back({0, 0.0, 1.0});
        return peaks;
    }
    const int m_max =
        static_cast<int>(std::floor(grating.period_m / grating.wavelength_m));
    for (int m = -m_max; m <= m_max; ++m) {
        const double sin_t = m * grating.wavelength_m / grating.period_m;
        if (std::abs(sin_t) > 1.0) continue;
        const double beta = kPi * grating.aperture_m / grating.wavelength_m * sin_t;
        const double height = sinc_sq(beta);
        // orders killed by the aperture factor (e.g. even m for p = 2a)
        if (m != 0 && height < 1e-24) continue;
        peaks.push_back({m, std::asin(sin_t), height});
    }
    return peaks;
}

namespace {

// Angular full width of a grating-order main lobe at theta (null to null is
// twice this; used both for refinement regions and the resolution check).
double peak_halfwidth(const GratingSpec& g, double theta) {
    return g.wavelength_m /
           (g.lines_illuminated * g.period_m * std::max(std::cos(theta), 1e-12));
}

}  // namespace

IntensityProfile screen_profile(const GratingSpec& grating, const ScreenGeometry& geom) {
    grating.validate();
    geom.validate();

    const double theta_limit = kPi / 2.0 * (1.0 - 1e-9);
    const double theta_screen = geom.tan_mapping
                                    ? std::atan(geom.extent_halfwidth_m / geom.focal_m)
                                    : geom.extent_halfwidth_m / geom.focal_m;
    const double theta_max = std::min(theta_screen, theta_limit);

    const auto peaks = peak_angles(grating);
    bool warn = false;
    double outermost = 0.0;
    for (const auto& pk : peaks) outermost = std::max(outermost, std::abs(pk.theta_rad));
    if (outermost > theta_max) warn = true;

    if (theta_max < peak_halfwidth(grating, 0.0))
        throw ConfigError("screen extent too small to include any diffraction peak");

    // Assemble the angular grid: uniform base spacing, 16x finer inside
    // +-10 peak-widths of every propagating order on the screen.
    const double h = 2.0 * theta_max / (geom.sample_count - 1);
    struct Region {
        double lo, hi;
    };
    std::vector<Region> fine;
    for (const auto& pk : peaks) {
        const double w = peak_halfwidth(grating, pk.theta_rad);
        // Broad peaks (few-line gratings) are already resolved by the base
        // grid; refining them would multiply the whole tabulation by 16.
        if (10.0 * w > 0.2 * theta_max) continue;
        const double lo = std::max(pk.theta_rad - 10.0 * w, -theta_max);
        const double hi = std::min(pk.theta_rad + 10.0 * w, theta_max);
        if (lo < hi) fine.push_back({lo, hi});
    }
    std::sort(fine.begin(), fine.end(), [](const Region& a, const Region& b) { return a.lo < b.lo; });
    std::vector<Region> merged;
    for (const auto& r : fine) {
        if (!merged.empty() && r.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, r.hi);
        else
            merged.push_back(r);
    }

    std::vector<double> theta;
    theta.reserve(static_cast<std::size_t>(geom.sample_count) + (merged.size() + 1) * 16);
    double cursor = -theta_max;
    auto emit_span = [&theta](double lo, double hi, double step) {
        const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
        for (int i = 0; i < n; ++i) theta.push_back(lo + (hi - lo) * i / n);
    };
    for (const auto& r : merged) {
        if (cursor < r.lo) emit_span(cursor, r.lo, h);
        emit_span(std::max(cursor, r.lo), r.hi, h / 16.0);
        cursor = r.hi;
    }
    if (cursor < theta_max) emit_span(cursor, theta_max, h);
    theta.push_back(theta_max);

    // Resolution check: every order's main lobe must hold >= 9 samples.
    for (const auto& pk : peaks) {
        if (std::abs(pk.theta_rad) > theta_max) continue;
        const double w = peak_halfwidth(grating, pk.theta_rad);
        const auto lo = std::lower_bound(theta.begin(), theta.end(), pk.theta_rad - w);
        const auto hi = std::upper_bound(theta.begin(), theta.end(),
                                         std::min(pk.theta_rad + w, theta_max));
        if (hi - lo < 9)
            throw ConfigError("sample_count insufficient to resolve order " +
                              std::to_string(pk.order));
    }

    // Cell mass = intensity * direction-cosine interval of the cell, so cell
    // weights track the energy landing on that piece of screen regardless of
    // the (nonlinear) position map and of local grid density.
    const std::size_t n = theta.size();
    IntensityProfile prof;
    prof.positions.resize(n);
    prof.weights.resize(n);
    prof.extent_warning = warn;
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = theta[i];
        prof.positions[i] = geom.tan_mapping ? geom.focal_m * std::tan(t) : geom.focal_m * t;
        const double lo = i == 0 ? t : 0.5 * (theta[i - 1] + t);
        const double hi = i + 1 == n ? t : 0.5 * (t + theta[i + 1]);
        const double cell = std::sin(hi) - std::sin(lo);
        const double w = relative_intensity(grating, t) * cell;
        prof.weights[i] = w;
        wsum += w;
    }
    double cm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prof.weights[i] /= wsum;
        cm += prof.positions[i] * prof.weights[i];
    }
    prof.center_of_mass = cm;
    return prof;
}

IntensityProfile delta_profile(double x0_m) {
    IntensityProfile p;
    p.positions = {x0_m};
    p.weights = {1.0};
    p.center_of_mass = x0_m;
    return p;
}

IntensityProfile discrete_profile(std::vector<double> positions, std::vector<double> weights) {
    if (positions.empty() || positions.size() != weights.size())
        throw ConfigError("discrete_profile: empty or mismatched arrays");
    double sum = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i > 0 && !(positions[i] > positions[i - 1]))
            throw ConfigError("discrete_profile: positions must be strictly increasing");
        if (!(weights[i] >= 0.0)) throw ConfigError("discrete_profile: negative weight");
        sum += weights[i];
    }
    if (!(sum > 0.0)) throw ConfigError("discrete_profile: zero total weight");
    IntensityProfile p;
    p.positions = std::move(positions);
    p.weights = std::move(weights);
    double cm = 0.0;
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
        p.weights[i] /= sum;
        cm += p.positions[i] * p.weights[i];
    }
    p.center_of_mass = cm;
    return p;
}

PositionSampler::PositionSampler(const IntensityProfile& profile) {
    profile.validate();
    const std::size_t n = profile.size();
    edges_.resize(n + 1);
    if (n == 1) {
        // single point mass: zero-width cell, sampler always returns x0
        edges_[0] = edges_[1] = profile.positions[0];
    } else {
        edges_[0] = profile.positions[0] - 0.5 * (profile.positions[1] - profile.positions[0]);
        for (std::size_t i = 1; i < n; ++i)
            edges_[i] = 0.5 * (profile.positions[i - 1] + profile.positions[i]);
        edges_[n] =
            profile.positions[n - 1] + 0.5 * (profile.positions[n - 1] - profile.positions[n - 2]);
    }
    cdf_.resize(n + 1);
    cdf_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf_[i + 1] = cdf_[i] + profile.weights[i];
    const double total = cdf_[n];
    for (auto& c : cdf_) c /= total;
    cdf_[n] = 1.0;
}

double PositionSampler::sample(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw ConfigError("sample: u must be in [0,1)");
    // first cell whose upper cdf exceeds u
    const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    if (i >= edges_.size() - 1) i = edges_.size() - 2;
    const double c0 = cdf_[i], c1 = cdf_[i + 1];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return edges_[i] + frac * (edges_[i + 1] - edges_[i]);
}

double sample_position(const IntensityProfile& profile, double u) {
    return PositionSampler(profile).sample(u);
}

void write_profile_csv(std::ostream& os, const IntensityProfile& profile) {
    os << "x_m,weight\n";
    char buf[64];
    for (std::size_t i = 0; i < profile.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", profile.positions[i],
                      profile.weights[i]);
        os << buf;
    }
}

void write_profile_csv(const std::string& path, const IntensityProfile& profile) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_profile_csv(os, profile);
    if (!os) throw IoError("write failed: " + path);
}

IntensityProfile read_profile_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open profile file: " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("x_m,weight", 0) != 0)
        throw IoError("profile file missing x_m,weight header: " + path);
    std::vector<double> xs, ws;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError("malformed profile row: " + line);
        xs.push_back(std::stod(line.substr(0, comma)));
        ws.push_back(std::stod(line.substr(comma + 1)));
    }
    return discrete_profile(std::move(xs), std::move(ws));
}

}  // namespace collapsim::optics
