#include "collapsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "collapsim/errors.hpp"

namespace collapsim::analysis {

CoincidenceHistogram correlate(const std::vector<std::int64_t>& ref_times,
                               const std::vector<std::int64_t>& sig_times,
                               std::int64_t bin_width_ps, std::int64_t tau_min_ps,
                               std::int64_t tau_max_ps) {
    if (ref_times.empty() || sig_times.empty())
        throw ConfigError("correlate: empty channel");
    if (bin_width_ps <= 0 || tau_max_ps <= tau_min_ps)
        throw ConfigError("correlate: invalid bin width or range");
    if ((tau_max_ps - tau_min_ps) % bin_width_ps != 0)
        throw ConfigError("correlate: range must be a multiple of the bin width");

    CoincidenceHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.tau_min_ps = tau_min_ps;
    h.tau_max_ps = tau_max_ps;
    h.counts.assign(static_cast<std::size_t>((tau_max_ps - tau_min_ps) / bin_width_ps), 0);

    // For each reference tag, signal tags within [t_ref + tau_min, t_ref + tau_max)
    // form pairs. Both streams are sorted, so the window start only advances.
    std::size_t lo = 0;
    for (const std::int64_t t_ref : ref_times) {
        while (lo < sig_times.size() && sig_times[lo] - t_ref < tau_min_ps) ++lo;
        for (std::size_t j = lo; j < sig_times.size(); ++j) {
            const std::int64_t tau = sig_times[j] - t_ref;
            if (tau >= tau_max_ps) break;
            ++h.counts[static_cast<std::size_t>((tau - tau_min_ps) / bin_width_ps)];
            ++h.total_pairs;
        }
    }
    return h;
}

namespace {

double median_count(const std::vector<std::uint64_t>& counts) {
    std::vector<std::uint64_t> sorted(counts);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
    return 0.5 * (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2]));
}

}  // namespace

DelayEstimate estimate_delay(const CoincidenceHistogram& hist) {
    const std::size_t n = hist.n_bins();
    if (n < 3) throw ConfigError("estimate_delay: need at least 3 bins");
    if (hist.total_pairs == 0) throw ConfigError("estimate_delay: all-zero histogram");

    // maximal bin, ties toward smallest |tau| (then toward smaller tau)
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (hist.counts[i] > hist.counts[best]) {
            best = i;
        } else if (hist.counts[i] == hist.counts[best]) {
            const double ci = std::abs(hist.bin_center_ps(i));
            const double cb = std::abs(hist.bin_center_ps(best));
            if (ci < cb) best = i;
        }
    }

    DelayEstimate est;
    est.peak_counts = hist.counts[best];
    est.background_level = median_count(hist.counts);
    const double excess = static_cast<double>(est.peak_counts) - est.background_level;
    est.significance_sigma =
        excess > 0.0 ? excess / std::sqrt(std::max(est.background_level, 1.0)) : 0.0;
    est.no_peak = !(excess > 0.0);
    est.tau_star_ps = hist.bin_center_ps(best);
    const double w = static_cast<double>(hist.bin_width_ps);
    est.tau_sigma_ps = w / std::sqrt(12.0);  // uniform within one bin

    if (best > 0 && best + 1 < n) {
        const double a = static_cast<double>(hist.counts[best - 1]);
        const double b = static_cast<double>(hist.counts[best]);
        const double c = static_cast<double>(hist.counts[best + 1]);
        if (a > est.background_level && c > est.background_level) {
            const double denom = a - 2.0 * b + c;
            if (denom < 0.0) {
                double delta = 0.5 * (a - c) / denom;
                delta = std::clamp(delta, -0.5, 0.5);
                est.tau_star_ps = hist.bin_center_ps(best) + delta * w;
                est.sub_bin_refined = true;
                // Poisson error propagation through the vertex formula.
                const double da = (c - b) / (denom * denom);
                const double db = (a - c) / (denom * denom);
                const double dc = (b - a) / (denom * denom);
                est.tau_sigma_ps = w * std::sqrt(da * da * a + db * db * b + dc * dc * c);
            }
        }
    }
    return est;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::HkConsistent: return "hk_consistent";
        case Verdict::QmConsistent: return "qm_consistent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DelayVerdict delta_t_test(const DelayEstimate& baseline, const DelayEstimate& grating,
                          double predicted_delay_ps, double bin_width_ps,
                          double min_significance) {
    if (baseline.no_peak || grating.no_peak ||
        baseline.significance_sigma < min_significance ||
        grating.significance_sigma < min_significance) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "insignificant coincidence peaks (baseline %.1f sigma, grating %.1f "
                      "sigma, need %.1f)",
                      baseline.significance_sigma, grating.significance_sigma,
                      min_significance);
        throw InconclusiveError(msg);
    }

    DelayVerdict v;
    v.delta_t_ps = grating.tau_star_ps - baseline.tau_star_ps;
    const double sys = kRefineSystematicBins * bin_width_ps;
    v.sigma_ps = std::sqrt(baseline.tau_sigma_ps * baseline.tau_sigma_ps +
                           grating.tau_sigma_ps * grating.tau_sigma_ps + sys * sys);
    v.predicted_ps = predicted_delay_ps;
    v.hk_threshold_ps = predicted_delay_ps - 2.0 * v.sigma_ps;
    v.qm_threshold_ps = 2.0 * v.sigma_ps;
    if (v.delta_t_ps >= v.hk_threshold_ps)
        v.verdict = Verdict::HkConsistent;
    else if (std::abs(v.delta_t_ps) <= v.qm_threshold_ps)
        v.verdict = Verdict::QmConsistent;
    else
        v.verdict = Verdict::Inconclusive;
    return v;
}

namespace {

// True when `times` has an element within [center - half, center + half].
// `cursor` only moves forward; callers sweep heralds in ascending order.
bool window_hit(const std::vector<std::int64_t>& times, std::size_t& cursor,
                std::int64_t lo, std::int64_t hi) {
    while (cursor < times.size() && times[cursor] < lo) ++cursor;
    return cursor < times.size() && times[cursor] <= hi;
}

}  // namespace

AlphaResult anticorrelation_alpha(const std::vector<std::int64_t>& herald_times,
                                  const std::vector<std::int64_t>& a_times,
                                  const std::vector<std::int64_t>& b_times,
                                  double window_ps, double center_a_ps, double center_b_ps) {
    if (herald_times.empty()) throw ConfigError("alpha: no heralds");
    if (!(window_ps > 0.0)) throw ConfigError("alpha: window must be positive");

    const auto half = static_cast<std::int64_t>(window_ps / 2.0);
    const auto ca = static_cast<std::int64_t>(std::llround(center_a_ps));
    const auto cb = static_cast<std::int64_t>(std::llround(center_b_ps));

    AlphaResult r;
    r.n_heralds = herald_times.size();
    r.window_ps = window_ps;
    std::size_t ia = 0, ib = 0;
    for (const std::int64_t th : herald_times) {
        const bool hit_a = window_hit(a_times, ia, th + ca - half, th + ca + half);
        const bool hit_b = window_hit(b_times, ib, th + cb - half, th + cb + half);
        r.n_a += hit_a;
        r.n_b += hit_b;
        r.n_ab += hit_a && hit_b;
    }
    if (r.n_a > 0 && r.n_b > 0) {
        r.alpha = static_cast<double>(r.n_ab) * static_cast<double>(r.n_heralds) /
                  (static_cast<double>(r.n_a) * static_cast<double>(r.n_b));
    } else {
        r.defined = false;
    }
    return r;
}

void write_histogram_csv(std::ostream& os, const CoincidenceHistogram& hist) {
    os << "tau_ps,counts\n";
    char line[64];
    for (std::size_t i = 0; i < hist.n_bins(); ++i) {
        std::snprintf(line, sizeof line, "%.1f,%llu\n", hist.bin_center_ps(i),
                      static_cast<unsigned long long>(hist.counts[i]));
        os << line;
    }
}

void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_histogram_csv(os, hist);
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace collapsim::analysis
