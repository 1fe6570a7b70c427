#include "collapsim/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "collapsim/errors.hpp"
#include "collapsim/planner.hpp"
#include "collapsim/rng.hpp"

namespace collapsim::simkit {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

std::int64_t to_ps(double seconds) {
    return static_cast<std::int64_t>(std::llround(seconds * 1e12));
}

}  // namespace

std::string SourceSpec::validate() const {
    if (!(herald_rate_hz > 0.0)) throw ConfigError("source: herald rate must be positive");
    if (path_efficiency < 0.0 || path_efficiency > 1.0)
        throw ConfigError("source: path efficiency out of range [0,1]");
    if (const auto* coh = std::get_if<Coherent>(&statistics)) {
        if (!(coh->mean_photon_number > 0.0))
            throw ConfigError("source: coherent mean photon number must be positive");
    }
    if (herald_rate_hz > planner::kEchoCeilingHz)
        return "herald rate exceeds the afterpulse-echo ceiling of 1e5 /s; expect jammed "
               "statistics";
    return {};
}

void DetectorSpec::validate() const {
    if (channel == kHeraldChannel) throw ConfigError("detector: channel 1 is reserved for heralds");
    if (!(aperture_m > 0.0)) throw ConfigError("detector: aperture must be positive");
    if (efficiency < 0.0 || efficiency > 1.0)
        throw ConfigError("detector: efficiency out of range [0,1]");
    if (dark_rate_hz < 0.0) throw ConfigError("detector: negative dark rate");
    if (!(resolution_fwhm_s > 0.0)) throw ConfigError("detector: resolution FWHM must be positive");
    if (afterpulse_prob < 0.0 || afterpulse_prob >= 1.0)
        throw ConfigError("detector: afterpulse probability must be in [0,1)");
    if (afterpulse_mean_delay_s < 0.0) throw ConfigError("detector: negative afterpulse delay");
    if (dead_time_s < 0.0) throw ConfigError("detector: negative dead time");
}

void ChannelOffsets::validate() const {
    for (const auto& [ch, s] : seconds) {
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ConfigError("offsets: channel " + std::to_string(ch) +
                              " latency must be finite and non-negative");
    }
}

tags::TagStream generate_heralds(const SourceSpec& source, double duration_s,
                                 std::uint64_t seed) {
    source.validate();
    if (!(duration_s > 0.0)) throw ConfigError("generate_heralds: duration must be positive");

    rng::Xoshiro256pp eng(rng::derive_seed(seed, rng::kStreamHeralds, 0));
    tags::TagStream out;
    out.header.seed = seed;
    out.header.duration_s = duration_s;
    out.tags.reserve(static_cast<std::size_t>(source.herald_rate_hz * duration_s * 1.05) + 16);
    const double mean_gap = 1.0 / source.herald_rate_hz;
    double t = 0.0;
    for (;;) {
        t += rng::exponential(eng, mean_gap);
        if (t >= duration_s) break;
        out.tags.push_back({to_ps(t), kHeraldChannel});
    }
    return out;
}

namespace {

// Dead time + afterpulsing for one channel. Raw events (signal + darks,
// sorted) are consumed in time order, merged with pending echoes; only
// accepted tags reset the dead-time clock and may spawn a further echo.
void finalize_channel(std::vector<std::int64_t>& raw, const DetectorSpec& spec,
                      std::uint64_t seed, std::vector<tags::TimeTag>& out,
                      SimDiagnostics& diag) {
    std::sort(raw.begin(), raw.end());
    rng::Xoshiro256pp eng(rng::derive_seed(seed, rng::kStreamAfterpulse, spec.channel));
    const std::int64_t dead_ps = to_ps(spec.dead_time_s);
    std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>> echoes;

    std::size_t i = 0;
    std::int64_t last = 0;
    bool have_last = false;
    while (i < raw.size() || !echoes.empty()) {
        std::int64_t t;
        bool is_echo;
        if (!echoes.empty() && (i >= raw.size() || echoes.top() < raw[i])) {
            t = echoes.top();
            echoes.pop();
            is_echo = true;
        } else {
            t = raw[i++];
            is_echo = false;
        }
        if (have_last && dead_ps > 0 && t - last < dead_ps) {
            ++diag.dead_time_suppressed;
            continue;
        }
        out.push_back({t, spec.channel});
        if (is_echo) ++diag.afterpulse_tags;
        last = t;
        have_last = true;
        if (spec.afterpulse_prob > 0.0 && rng::uniform01(eng) < spec.afterpulse_prob) {
            const double extra = rng::exponential(eng, spec.afterpulse_mean_delay_s);
            echoes.push(t + std::max<std::int64_t>(1, to_ps(extra)));
        }
    }
}

}  // namespace

tags::TagStream propagate_and_detect(const tags::TagStream& heralds,
                                     const SourceSpec& source,
                                     const optics::IntensityProfile& profile,
                                     const std::vector<DetectorSpec>& detectors,
                                     collapse::CollapseModel model,
                                     const ChannelOffsets& offsets, std::uint64_t seed,
                                     SimDiagnostics* diag) {
    source.validate();
    if (detectors.empty()) throw ConfigError("propagate: no detectors configured");
    for (const auto& det : detectors) det.validate();
    offsets.validate();

    // pairwise non-overlapping apertures, distinct channels
    std::vector<const DetectorSpec*> by_pos;
    by_pos.reserve(detectors.size());
    for (const auto& det : detectors) by_pos.push_back(&det);
    std::sort(by_pos.begin(), by_pos.end(),
              [](const DetectorSpec* a, const DetectorSpec* b) {
                  return a->position_m < b->position_m;
              });
    for (std::size_t i = 0; i + 1 < by_pos.size(); ++i) {
        const double gap = by_pos[i + 1]->position_m - by_pos[i]->position_m;
        if (gap < (by_pos[i]->aperture_m + by_pos[i + 1]->aperture_m) / 2.0)
            throw ConfigError("propagate: detector apertures overlap");
    }
    for (std::size_t i = 0; i < detectors.size(); ++i)
        for (std::size_t j = i + 1; j < detectors.size(); ++j)
            if (detectors[i].channel == detectors[j].channel)
                throw ConfigError("propagate: duplicate detector channel");

    const double delay_s = collapse::detection_delay_s(model, profile);
    const optics::PositionSampler sampler(profile);
    const bool fock = source.is_fock();
    const double mean_n = fock ? 1.0 : std::get<Coherent>(source.statistics).mean_photon_number;

    SimDiagnostics local;
    SimDiagnostics& dg = diag ? *diag : local;
    dg = SimDiagnostics{};
    dg.heralds = heralds.tags.size();
    if (diag) dg.per_herald_detections.assign(heralds.tags.size(), 0);

    struct Channel {
        const DetectorSpec* spec;
        double base_offset_s;  // channel latency + collapse delay
        double sigma_s;        // jitter
        std::vector<std::int64_t> raw;
    };
    std::vector<Channel> channels;
    channels.reserve(detectors.size());
    for (const auto& det : detectors)
        channels.push_back({&det, offsets.get(det.channel) + delay_s,
                            det.resolution_fwhm_s / kFwhmPerSigma, {}});

    // Signal tags, herald by herald. Each herald gets its own derived RNG
    // substream so time-chunked generation would reproduce these exactly.
    for (std::size_t i = 0; i < heralds.tags.size(); ++i) {
        rng::Xoshiro256pp eng(rng::derive_seed(seed, rng::kStreamTransport, i));
        if (rng::uniform01(eng) >= source.path_efficiency) continue;
        const std::uint64_t n = fock ? 1 : rng::poisson(eng, mean_n);
        if (n > 0) ++dg.photons_on_screen;
        for (std::uint64_t k = 0; k < n; ++k) {
            const double x = sampler.sample(rng::uniform01(eng));
            Channel* hit = nullptr;
            for (auto& ch : channels) {
                if (std::abs(x - ch.spec->position_m) <= ch.spec->aperture_m / 2.0) {
                    hit = &ch;
                    break;
                }
            }
            if (!hit) continue;
            if (rng::uniform01(eng) >= hit->spec->efficiency) continue;
            const double wobble = rng::gaussian(eng) * hit->sigma_s;
            const std::int64_t t =
                heralds.tags[i].t_ps + to_ps(hit->base_offset_s + wobble);
            if (t < 0) continue;  // before run start; TDC never saw it
            hit->raw.push_back(t);
            ++dg.signal_tags;
            if (diag) ++dg.per_herald_detections[i];
        }
    }

    // Independent dark-count Poisson process per channel, over the run window.
    const double duration_s = heralds.header.duration_s;
    for (auto& ch : channels) {
        if (ch.spec->dark_rate_hz <= 0.0) continue;
        rng::Xoshiro256pp eng(rng::derive_seed(seed, rng::kStreamDarkCounts, ch.spec->channel));
        const double mean_gap = 1.0 / ch.spec->dark_rate_hz;
        double t = 0.0;
        for (;;) {
            t += rng::exponential(eng, mean_gap);
            if (t >= duration_s) break;
            ch.raw.push_back(to_ps(t));
            ++dg.dark_tags;
        }
    }

    tags::TagStream out;
    out.header = heralds.header;
    out.header.seed = seed;
    std::size_t total = heralds.tags.size();
    for (const auto& ch : channels) total += ch.raw.size();
    out.tags.reserve(total + total / 16);

    // D1 passthrough with its fixed latency applied.
    const std::int64_t d1_off = to_ps(offsets.get(kHeraldChannel));
    for (const auto& h : heralds.tags) out.tags.push_back({h.t_ps + d1_off, h.channel});

    for (auto& ch : channels) finalize_channel(ch.raw, *ch.spec, seed, out.tags, dg);

    std::sort(out.tags.begin(), out.tags.end());
    return out;
}

}  // namespace collapsim::simkit
