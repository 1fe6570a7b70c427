#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Coincidence analysis between a reference (herald) channel and a signal
// channel: histogram of pair delays, peak-delay estimation with sub-bin
// parabolic refinement, the delayed-collapse hypothesis test on T1 - T0, and
// the heralded anticorrelation parameter alpha.

namespace collapsim::analysis {

struct CoincidenceHistogram {
    std::int64_t bin_width_ps = 0;
    std::int64_t tau_min_ps = 0;  ///< inclusive
    std::int64_t tau_max_ps = 0;  ///< exclusive; range is an exact multiple of bin width
    std::vector<std::uint64_t> counts;
    std::uint64_t total_pairs = 0;

    std::size_t n_bins() const { return counts.size(); }
    double bin_center_ps(std::size_t i) const {
        return static_cast<double>(tau_min_ps) + (static_cast<double>(i) + 0.5) * bin_width_ps;
    }
};

/// Counts every (ref, sig) pair with tau = t_sig - t_ref in [tau_min, tau_max)
/// into bins of bin_width. Two-pointer sweep over the sorted streams:
/// O(n + m + pairs), never O(n*m).
CoincidenceHistogram correlate(const std::vector<std::int64_t>& ref_times,
                               const std::vector<std::int64_t>& sig_times,
                               std::int64_t bin_width_ps, std::int64_t tau_min_ps,
                               std::int64_t tau_max_ps);

struct DelayEstimate {
    double tau_star_ps = 0.0;       ///< estimated peak delay
    double tau_sigma_ps = 0.0;      ///< statistical uncertainty of tau_star
    std::uint64_t peak_counts = 0;  ///< counts in the maximal bin
    double background_level = 0.0;  ///< median bin count
    double significance_sigma = 0.0;
    bool sub_bin_refined = false;
    bool no_peak = false;  ///< nothing rises above background
};

/// Locates the coincidence peak: maximal bin (ties broken toward smallest
/// |tau|), background = median bin, significance = (peak - bg)/sqrt(max(bg,1)).
/// When both neighbours sit above background the delay is refined by the
/// vertex of the parabola through the three bins. Throws on an all-zero
/// histogram or fewer than 3 bins.
DelayEstimate estimate_delay(const CoincidenceHistogram& hist);

enum class Verdict { HkConsistent, QmConsistent, Inconclusive };

std::string to_string(Verdict v);

struct DelayVerdict {
    double delta_t_ps = 0.0;    ///< T1 - T0
    double sigma_ps = 0.0;      ///< combined uncertainty on delta_t
    double predicted_ps = 0.0;  ///< delayed-collapse prediction fed to the test
    Verdict verdict = Verdict::Inconclusive;
    double hk_threshold_ps = 0.0;  ///< delta_t >= this => delayed-collapse consistent
    double qm_threshold_ps = 0.0;  ///< |delta_t| <= this => instantaneous consistent
};

/// Relative systematic of the three-point parabolic vertex for peaks a couple
/// of bins wide, folded into the combined uncertainty (in units of bin width).
inline constexpr double kRefineSystematicBins = 0.05;

/// T1 - T0 against the predicted delay. Requires both estimates significant
/// (>= min_significance, default 5 sigma) else throws InconclusiveError.
/// Verdict bands: HK-consistent if dT >= predicted - 2*sigma; QM-consistent if
/// |dT| <= 2*sigma; inconclusive otherwise.
DelayVerdict delta_t_test(const DelayEstimate& baseline, const DelayEstimate& grating,
                          double predicted_delay_ps, double bin_width_ps,
                          double min_significance = 5.0);

struct AlphaResult {
    double alpha = 0.0;
    std::uint64_t n_heralds = 0;
    std::uint64_t n_a = 0;
    std::uint64_t n_b = 0;
    std::uint64_t n_ab = 0;
    double window_ps = 0.0;
    bool defined = true;  ///< false when n_a * n_b == 0
};

/// Heralded anticorrelation parameter alpha = N_AB * N_heralds / (N_A * N_B).
/// A herald counts toward N_A when channel A has at least one tag within
/// +-window/2 of (herald time + center_a), and similarly for B; N_AB requires
/// both. 0 for ideal single photons, 1 for coherent light.
AlphaResult anticorrelation_alpha(const std::vector<std::int64_t>& herald_times,
                                  const std::vector<std::int64_t>& a_times,
                                  const std::vector<std::int64_t>& b_times,
                                  double window_ps, double center_a_ps, double center_b_ps);

/// CSV export with header "tau_ps,counts" (bin centers).
void write_histogram_csv(std::ostream& os, const CoincidenceHistogram& hist);
void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist);

}  // namespace collapsim::analysis
