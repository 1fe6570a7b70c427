#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "collapsim/analysis.hpp"
#include "collapsim/optics.hpp"

// Independent reference implementations used only by tests. Everything here
// deliberately avoids the code paths under test: quadrature instead of the
// tabulated profile sums, a quadratic pair counter instead of the two-pointer
// sweep.

namespace oracles {

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double eps = 1e-10, int depth = 30) {
    struct Impl {
        const std::function<double(double)>& f;
        double run(double a, double m, double b, double fa, double fm, double fb, double whole,
                   double eps, int depth) {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
                return left + right + (left + right - whole) / 15.0;
            return run(a, lm, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
                   run(m, rm, b, fm, frm, fb, right, eps / 2.0, depth - 1);
        }
    } impl{f};
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return impl.run(a, m, b, fa, fm, fb, whole, eps, depth);
}

/// O(n*m) coincidence pair counter; the reference for the two-pointer sweep.
inline collapsim::analysis::CoincidenceHistogram brute_force_correlate(
    const std::vector<std::int64_t>& ref, const std::vector<std::int64_t>& sig,
    std::int64_t bin_ps, std::int64_t tau_min_ps, std::int64_t tau_max_ps) {
    collapsim::analysis::CoincidenceHistogram h;
    h.bin_width_ps = bin_ps;
    h.tau_min_ps = tau_min_ps;
    h.tau_max_ps = tau_max_ps;
    h.counts.assign(static_cast<std::size_t>((tau_max_ps - tau_min_ps) / bin_ps), 0);
    for (const auto tr : ref) {
        for (const auto ts : sig) {
            const std::int64_t tau = ts - tr;
            if (tau < tau_min_ps || tau >= tau_max_ps) continue;
            ++h.counts[static_cast<std::size_t>((tau - tau_min_ps) / bin_ps)];
            ++h.total_pairs;
        }
    }
    return h;
}

/// Kolmogorov-Smirnov distance between a sample set and the tabulated profile
/// CDF (cell-resolved, matching the sampler's piecewise-linear CDF).
inline double ks_distance(std::vector<double> samples,
                          const collapsim::optics::IntensityProfile& profile) {
    std::sort(samples.begin(), samples.end());
    const std::size_t n = profile.size();
    std::vector<double> edges(n + 1), cdf(n + 1);
    edges[0] = profile.positions[0] - 0.5 * (profile.positions[1] - profile.positions[0]);
    for (std::size_t i = 1; i < n; ++i)
        edges[i] = 0.5 * (profile.positions[i - 1] + profile.positions[i]);
    edges[n] = profile.positions[n - 1] +
               0.5 * (profile.positions[n - 1] - profile.positions[n - 2]);
    cdf[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + profile.weights[i];

    auto model_cdf = [&](double x) {
        if (x <= edges.front()) return 0.0;
        if (x >= edges.back()) return 1.0;
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
        const double frac = (x - edges[i]) / (edges[i + 1] - edges[i]);
        return cdf[i] + frac * (cdf[i + 1] - cdf[i]);
    };

    double d = 0.0;
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double m = model_cdf(samples[i]);
        d = std::max(d, std::abs(m - static_cast<double>(i) * inv));
        d = std::max(d, std::abs(static_cast<double>(i + 1) * inv - m));
    }
    return d;
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace oracles
