#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

// Fraunhofer multi-slit diffraction: the far-field intensity of a grating with
// N illuminated apertures of width a on period p,
//
//   I(theta) = (sin^2 beta / beta^2) * (sin^2 (N gamma) / (N^2 sin^2 gamma)),
//   beta = (pi a / lambda) sin theta,   gamma = (pi p / lambda) sin theta,
//
// normalized so I(0) = 1, tabulated on a focal screen as a discrete probability
// profile that the Monte Carlo sampler and the spread functional both consume.

namespace collapsim::optics {

/// Physical parameters of the transmission grating.
struct GratingSpec {
    double period_m = 0.0;        ///< grating period p
    double aperture_m = 0.0;      ///< transmitting aperture width a, 0 < a <= p
    int lines_illuminated = 0;    ///< number of illuminated apertures N >= 1
    double wavelength_m = 0.0;    ///< lambda > 0

    /// Throws ConfigError if any invariant is violated.
    void validate() const;

    /// Reference instance: symmetric (p = 2a) 800 lines/mm grating,
    /// lambda = 800 nm, N = 2000.
    static GratingSpec reference();
};

/// Screen placed in the focal plane of the collecting optics.
struct ScreenGeometry {
    double focal_m = 0.0;             ///< focal length f; screen coordinate x = f*theta
    double extent_halfwidth_m = 0.0;  ///< screen covers [-extent, +extent]
    int sample_count = 0;             ///< base tabulation grid size, >= 2
    bool tan_mapping = false;         ///< optional x = f*tan(theta) instead of x = f*theta

    void validate() const;

    /// Reference instance: f = 4 m, 3 m halfwidth, 2^20 base samples.
    static ScreenGeometry reference();
};

/// Tabulated screen intensity as a discrete probability distribution:
/// point masses `weights` (summing to 1) at strictly increasing `positions`.
struct IntensityProfile {
    std::vector<double> positions;  ///< screen coordinates (m), strictly increasing
    std::vector<double> weights;    ///< non-negative, sum = 1
    double center_of_mass = 0.0;
    bool extent_warning = false;    ///< set when the screen cuts off a propagating order

    std::size_t size() const { return positions.size(); }

    /// Total weight of samples with lo <= x <= hi.
    double mass_in(double lo, double hi) const;

    /// Throws ConfigError when positions/weights violate the invariants
    /// (ordering, non-negativity, normalization, center of mass).
    void validate() const;
};

/// A diffraction order that propagates to the screen.
struct OrderPeak {
    int order = 0;              ///< m, sin(theta_m) = m lambda / p
    double theta_rad = 0.0;
    double relative_height = 0.0;  ///< aperture-factor intensity relative to I(0)
};

/// Normalized Eq.-style intensity at angle theta; I(0) = 1. Removable
/// singularities of both factors are evaluated by their limits.
/// Throws ConfigError for |sin theta| > 1 (handled before calling with any
/// real angle; the guard matters when callers work in sin-space).
double relative_intensity(const GratingSpec& grating, double theta_rad);

/// All propagating orders (|m lambda / p| <= 1) with nonvanishing aperture
/// factor, symmetric in +-m and always containing m = 0. For N = 1 there is
/// no multi-slit structure and only m = 0 is reported.
std::vector<OrderPeak> peak_angles(const GratingSpec& grating);

/// Tabulates the screen profile. Base grid: sample_count uniform angular
/// samples across the screen; 16x refinement within +-10 peak widths of every
/// propagating order so each peak is well resolved (>= 9 samples per main
/// lobe, else ConfigError). Weights are the energy per screen cell, i.e. the
/// intensity integrated over the cell's direction-cosine interval; positions
/// use the x = f*theta map (or f*tan theta when tan_mapping is set).
IntensityProfile screen_profile(const GratingSpec& grating, const ScreenGeometry& geom);

/// Degenerate single-point profile: all mass at x0 (the "narrow spot" of a
/// grating-free run).
IntensityProfile delta_profile(double x0_m);

/// Builds a normalized profile from arbitrary tabulated (position, weight)
/// pairs; positions must be strictly increasing, weights non-negative with a
/// positive sum. Used for idealized few-peak profiles and for file input.
IntensityProfile discrete_profile(std::vector<double> positions, std::vector<double> weights);

/// Inverse-CDF position sampler over a tabulated profile. Each point mass is
/// spread over a cell bounded by the midpoints to its neighbours and sampled
/// by linear interpolation, so output positions converge in distribution to
/// the profile. Deterministic function of u in [0,1).
class PositionSampler {
public:
    explicit PositionSampler(const IntensityProfile& profile);

    /// u in [0,1): u = 0 maps to the left edge of the first nonzero cell,
    /// u -> 1 to the right edge of the last one.
    double sample(double u) const;

private:
    std::vector<double> cdf_;    // cdf_[i] = total weight of cells 0..i-1, size n+1
    std::vector<double> edges_;  // cell boundaries, size n+1
};

/// Convenience wrapper; builds a sampler per call, so prefer PositionSampler
/// in loops.
double sample_position(const IntensityProfile& profile, double u);

/// CSV export with header "x_m,weight".
void write_profile_csv(std::ostream& os, const IntensityProfile& profile);
void write_profile_csv(const std::string& path, const IntensityProfile& profile);

/// Reads a profile back from "x_m,weight" CSV (renormalizes the weight sum).
IntensityProfile read_profile_csv(const std::string& path);

}  // namespace collapsim::optics
