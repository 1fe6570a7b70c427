#include "collapsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "collapsim/analysis.hpp"
#include "collapsim/errors.hpp"
#include "collapsim/experiment.hpp"
#include "collapsim/planner.hpp"

namespace collapsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNsPerPs = 1e-3;

/// Externally quoted count-rate estimate for the reference grating layout,
/// echoed in planning tables next to the first-principles product.
constexpr double kQuotedGratingRateHz = 2e4;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << text;
    if (!os) throw IoError("write failed: " + path);
}

std::uint8_t lowest_screen_channel(const tags::TagStream& s, std::uint8_t ref) {
    for (const auto ch : s.channels())
        if (ch != ref) return ch;
    throw ConfigError("tag stream has no screen channel besides the reference");
}

json delay_to_json(const analysis::DelayEstimate& e) {
    return json{{"tau_ns", e.tau_star_ps * kNsPerPs},
                {"sigma_ns", e.tau_sigma_ps * kNsPerPs},
                {"peak_counts", e.peak_counts},
                {"background_per_bin", e.background_level},
                {"significance_sigma", e.significance_sigma},
                {"sub_bin_refined", e.sub_bin_refined},
                {"no_peak", e.no_peak}};
}

json alpha_to_json(const analysis::AlphaResult& a) {
    return json{{"alpha", a.alpha},       {"defined", a.defined}, {"n_heralds", a.n_heralds},
                {"n_a", a.n_a},           {"n_b", a.n_b},         {"n_ab", a.n_ab},
                {"window_ns", a.window_ps * kNsPerPs}};
}

struct PhaseAnalysis {
    analysis::CoincidenceHistogram hist;
    analysis::DelayEstimate estimate;
    std::uint8_t sig_channel = 0;
};

PhaseAnalysis analyze_stream(const tags::TagStream& stream, const AnalyzeOptions& a) {
    PhaseAnalysis r;
    r.sig_channel = a.sig_channel ? a.sig_channel
                                  : lowest_screen_channel(stream, a.ref_channel);
    const auto ref = stream.channel_times(a.ref_channel);
    const auto sig = stream.channel_times(r.sig_channel);
    const auto bin = static_cast<std::int64_t>(std::llround(a.bin_ns * 1e3));
    const auto range = static_cast<std::int64_t>(std::llround(a.range_ns * 1e3));
    r.hist = analysis::correlate(ref, sig, bin, -range, range);
    r.estimate = analysis::estimate_delay(r.hist);
    return r;
}

}  // namespace

config::RunConfig load_config(const GlobalOptions& g) {
    json j;
    if (g.config_path.empty()) {
        j = config::RunConfig::reference().to_json();
    } else {
        std::ifstream is(g.config_path);
        if (!is) throw ConfigError("cannot open config file: " + g.config_path);
        j = json::parse(is, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("config file is not valid JSON: " + g.config_path);
    }
    for (const auto& ov : g.overrides) config::apply_override(j, ov);
    config::RunConfig cfg = config::RunConfig::from_json(j);
    if (g.seed) cfg.run.seed = *g.seed;
    for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
    return cfg;
}

int cmd_pattern(const GlobalOptions& g) {
    const auto cfg = load_config(g);
    if (!cfg.grating) throw ConfigError("pattern: config has no grating section");
    ensure_out_dir(g.out_dir);

    const auto profile = optics::screen_profile(*cfg.grating, cfg.screen);
    const auto peaks = optics::peak_angles(*cfg.grating);
    write_profile_csv(join_path(g.out_dir, "profile.csv"), profile);

    // Per-order screen windows: midpoints between orders in sin-space,
    // clamped to the screen.
    const double sin_step = cfg.grating->wavelength_m / cfg.grating->period_m;
    std::string peaks_csv = "order,theta_rad,x_m,relative_height,integrated_fraction\n";
    std::printf("%6s %12s %12s %10s %10s\n", "order", "theta_rad", "x_m", "height", "fraction");
    for (const auto& pk : peaks) {
        const double x = cfg.screen.focal_m * (cfg.screen.tan_mapping
                                                   ? std::tan(pk.theta_rad)
                                                   : pk.theta_rad);
        const double s0 = pk.order * sin_step;
        auto order_edge = [&](double s) {
            const double clamped = std::clamp(s, -1.0, 1.0);
            const double th = std::asin(clamped);
            return cfg.screen.focal_m * (cfg.screen.tan_mapping ? std::tan(th) : th);
        };
        const double lo = std::max(order_edge(s0 - sin_step / 2.0),
                                   -cfg.screen.extent_halfwidth_m);
        const double hi = std::min(order_edge(s0 + sin_step / 2.0),
                                   cfg.screen.extent_halfwidth_m);
        const double frac = profile.mass_in(lo, hi);
        char row[160];
        std::snprintf(row, sizeof row, "%d,%.9g,%.9g,%.9g,%.9g\n", pk.order, pk.theta_rad, x,
                      pk.relative_height, frac);
        peaks_csv += row;
        std::printf("%6d %12.6f %12.6f %10.6f %10.6f\n", pk.order, pk.theta_rad, x,
                    pk.relative_height, frac);
    }
    write_text(join_path(g.out_dir, "peaks.csv"), peaks_csv);
    if (profile.extent_warning)
        std::cerr << "warning: screen extent cuts off a propagating order\n";
    if (peaks.size() >= 3) {
        // idealized narrow-peak weight for a symmetric three-peak pattern
        const double ideal = (4.0 / (M_PI * M_PI)) / (1.0 + 8.0 / (M_PI * M_PI));
        std::printf("idealized first-order weight (three narrow peaks): %.4f\n", ideal);
    }
    std::printf("profile: %zu samples -> %s\n", profile.size(),
                join_path(g.out_dir, "profile.csv").c_str());
    return kExitOk;
}

int cmd_spread(const GlobalOptions& g, const std::string& profile_csv_path) {
    optics::IntensityProfile profile;
    if (!profile_csv_path.empty()) {
        profile = optics::read_profile_csv(profile_csv_path);
    } else {
        const auto cfg = load_config(g);
        profile = cfg.grating ? optics::screen_profile(*cfg.grating, cfg.screen)
                              : simkit::phase_profile(cfg, simkit::Phase::Baseline);
    }
    const auto s = collapse::spread(profile);
    std::printf("spread_s_m %.9g\n", s.spread_m);
    std::printf("t_delay_ns %.6f\n", s.t_delay_s * 1e9);
    return kExitOk;
}

int cmd_plan(const GlobalOptions& g) {
    const auto cfg = load_config(g);
    ensure_out_dir(g.out_dir);
    const auto& det = cfg.detectors.front();

    // Slit scenario: diffraction spreads the light over the screen scale.
    const double spread_extent = cfg.screen.extent_halfwidth_m;
    const auto slit = planner::budget_slit(cfg.source.herald_rate_hz, cfg.source.path_efficiency,
                                           det.aperture_m, spread_extent, det.efficiency,
                                           det.dark_rate_hz);

    // Grating scenario: acceptance = integrated first-order peak fraction.
    std::optional<planner::RateBudget> grating;
    if (cfg.grating) {
        const auto profile = optics::screen_profile(*cfg.grating, cfg.screen);
        const double sin_step = cfg.grating->wavelength_m / cfg.grating->period_m;
        auto edge = [&](double s) {
            return cfg.screen.focal_m * std::asin(std::clamp(s, -1.0, 1.0));
        };
        const double lo = std::max(edge(sin_step / 2.0), -cfg.screen.extent_halfwidth_m);
        const double hi = std::min(edge(3.0 * sin_step / 2.0), cfg.screen.extent_halfwidth_m);
        const double fraction = profile.mass_in(lo, hi);
        grating = planner::budget_grating(cfg.source.herald_rate_hz, cfg.source.path_efficiency,
                                          fraction, det.efficiency, det.dark_rate_hz,
                                          kQuotedGratingRateHz);
    }

    auto print_budget = [](const char* name, const planner::RateBudget& b) {
        std::printf("%-22s rate %10.6g /s   acceptance %.6g   snr %.4g\n", name,
                    b.expected_rate_hz, b.geometric_acceptance, b.snr);
    };
    print_budget("slit", slit);
    if (grating) {
        print_budget("grating(first order)", *grating);
        std::printf("%-22s rate %10.6g /s   (external estimate, for comparison)\n",
                    "grating(quoted)", *grating->quoted_rate_hz);
    }
    const auto echo = planner::echo_ceiling(cfg.source.herald_rate_hz);
    std::printf("source rate %.6g /s vs echo ceiling %.6g /s: %s\n", echo.requested_rate_hz,
                echo.ceiling_hz, planner::to_string(echo.status).c_str());

    std::string csv =
        "scenario,source_rate_hz,path_efficiency,geometric_acceptance,detector_efficiency,"
        "expected_rate_hz,dark_rate_hz,snr\n";
    auto add_row = [&csv](const char* name, const planner::RateBudget& b) {
        char row[240];
        std::snprintf(row, sizeof row, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", name,
                      b.source_rate_hz, b.path_efficiency, b.geometric_acceptance,
                      b.detector_efficiency, b.expected_rate_hz, b.dark_rate_hz, b.snr);
        csv += row;
    };
    add_row("slit", slit);
    if (grating) add_row("grating_first_order", *grating);
    write_text(join_path(g.out_dir, "plan.csv"), csv);
    return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& phase_name) {
    const auto cfg = load_config(g);
    const auto phase = simkit::parse_phase(phase_name);
    ensure_out_dir(g.out_dir);

    const auto stream = simkit::simulate_phase(cfg, phase);
    const std::string ext = g.format == tags::TagFormat::Binary ? ".ett" : ".csv";
    const std::string path = join_path(g.out_dir, "tags_" + phase_name + ext);
    tags::write_tags(path, stream, g.format);

    std::printf("phase %s: %zu tags -> %s\n", phase_name.c_str(), stream.tags.size(),
                path.c_str());
    for (const auto ch : stream.channels()) {
        const auto n = stream.count(ch);
        std::printf("  channel %u: %zu tags (%.4g /s)\n", ch, n,
                    static_cast<double>(n) / cfg.run.duration_s);
    }
    return kExitOk;
}

namespace {

json analyze_one(const tags::TagStream& stream, const AnalyzeOptions& a,
                 const GlobalOptions& g, const std::string& label) {
    const auto pa = analyze_stream(stream, a);
    const std::string hist_path = join_path(g.out_dir, label + "_hist.csv");
    analysis::write_histogram_csv(hist_path, pa.hist);
    json j;
    j["phase"] = stream.header.phase.empty() ? label : stream.header.phase;
    j["signal_channel"] = pa.sig_channel;
    j["histogram_csv"] = hist_path;
    j["total_pairs"] = pa.hist.total_pairs;
    j["delay"] = delay_to_json(pa.estimate);
    return j;
}

}  // namespace

int cmd_analyze(const GlobalOptions& g, const AnalyzeOptions& a) {
    if (a.tag_files.empty()) throw ConfigError("analyze: no tag files given");
    if (a.tag_files.size() > 2) throw ConfigError("analyze: expected one or two tag files");
    ensure_out_dir(g.out_dir);

    std::vector<tags::TagStream> streams;
    for (const auto& path : a.tag_files) streams.push_back(tags::read_tags(path));

    json report;
    report["bin_ns"] = a.bin_ns;
    report["range_ns"] = a.range_ns;
    std::vector<analysis::DelayEstimate> estimates;
    std::vector<std::uint8_t> sig_channels;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const std::string label = streams.size() == 2 ? (i == 0 ? "baseline" : "grating")
                                                      : "stream";
        report["streams"].push_back(analyze_one(streams[i], a, g, label));
        const auto pa = analyze_stream(streams[i], a);
        estimates.push_back(pa.estimate);
        sig_channels.push_back(pa.sig_channel);
        std::printf("%s: tau = %.4f ns (sigma %.4f, significance %.1f)\n", label.c_str(),
                    pa.estimate.tau_star_ps * kNsPerPs, pa.estimate.tau_sigma_ps * kNsPerPs,
                    pa.estimate.significance_sigma);
    }

    int exit_code = kExitOk;
    if (streams.size() == 2) {
        double predicted_ps;
        if (a.predicted_ns) {
            predicted_ps = *a.predicted_ns * 1e3;
        } else {
            const auto cfg = load_config(g);
            if (!cfg.grating)
                throw ConfigError("analyze: need --predicted-ns or a config with a grating");
            const auto profile = optics::screen_profile(*cfg.grating, cfg.screen);
            predicted_ps = collapse::detection_delay_s(collapse::CollapseModel::HellwigKraus,
                                                       profile) *
                           1e12;
        }
        const auto bin_ps = a.bin_ns * 1e3;
        try {
            const auto v = analysis::delta_t_test(estimates[0], estimates[1], predicted_ps,
                                                  bin_ps, a.min_significance);
            report["delta_t"] = {{"value_ns", v.delta_t_ps * kNsPerPs},
                                 {"sigma_ns", v.sigma_ps * kNsPerPs},
                                 {"predicted_ns", v.predicted_ps * kNsPerPs},
                                 {"verdict", analysis::to_string(v.verdict)},
                                 {"hk_threshold_ns", v.hk_threshold_ps * kNsPerPs},
                                 {"qm_threshold_ns", v.qm_threshold_ps * kNsPerPs}};
            std::printf("delta_t = %.4f +- %.4f ns (predicted %.4f) -> %s\n",
                        v.delta_t_ps * kNsPerPs, v.sigma_ps * kNsPerPs,
                        v.predicted_ps * kNsPerPs, analysis::to_string(v.verdict).c_str());
            if (v.verdict == analysis::Verdict::Inconclusive) exit_code = kExitInconclusive;
        } catch (const InconclusiveError& e) {
            report["delta_t"] = {{"verdict", "inconclusive"}, {"reason", e.what()}};
            std::printf("delta_t: inconclusive (%s)\n", e.what());
            exit_code = kExitInconclusive;
        }
    }

    if (a.alpha) {
        const auto& stream = streams.back();
        const auto chans = stream.channels();
        std::uint8_t cha = a.sig_channel ? a.sig_channel
                                         : lowest_screen_channel(stream, a.ref_channel);
        std::uint8_t chb = a.alpha_b_channel;
        if (chb == 0) {
            for (const auto ch : chans)
                if (ch != a.ref_channel && ch != cha) {
                    chb = ch;
                    break;
                }
        }
        if (chb == 0) throw ConfigError("alpha: no second screen channel in the stream");
        AnalyzeOptions ab = a;
        ab.sig_channel = chb;
        const auto pa = analyze_stream(stream, a);
        const auto pb = analyze_stream(stream, ab);
        const auto alpha = analysis::anticorrelation_alpha(
            stream.channel_times(a.ref_channel), stream.channel_times(cha),
            stream.channel_times(chb), a.window_ns * 1e3, pa.estimate.tau_star_ps,
            pb.estimate.tau_star_ps);
        report["alpha"] = alpha_to_json(alpha);
        std::printf("alpha = %.4f (N_h %llu, N_A %llu, N_B %llu, N_AB %llu)\n", alpha.alpha,
                    static_cast<unsigned long long>(alpha.n_heralds),
                    static_cast<unsigned long long>(alpha.n_a),
                    static_cast<unsigned long long>(alpha.n_b),
                    static_cast<unsigned long long>(alpha.n_ab));
    }

    write_text(join_path(g.out_dir, "analysis_report.json"), report.dump(2) + "\n");
    return exit_code;
}

int cmd_run_experiment(const GlobalOptions& g, AnalyzeOptions a) {
    const auto cfg = load_config(g);
    ensure_out_dir(g.out_dir);

    const auto res = simkit::run_experiment(cfg);
    const std::string ext = g.format == tags::TagFormat::Binary ? ".ett" : ".csv";
    const std::string base_path = join_path(g.out_dir, "tags_baseline" + ext);
    const std::string grat_path = join_path(g.out_dir, "tags_grating" + ext);
    tags::write_tags(base_path, res.baseline, g.format);
    tags::write_tags(grat_path, res.grating, g.format);

    json report;
    report["config"] = cfg.to_json();
    report["config_hash"] = cfg.hash();
    report["seed"] = cfg.run.seed;
    report["injected_model"] = collapse::to_string(cfg.model);
    report["predicted_t_delay_ns"] = res.predicted_delay_s * 1e9;
    report["injected_t_delay_ns"] = res.injected_delay_s * 1e9;

    int exit_code = kExitOk;
    try {
        const auto pb = analyze_stream(res.baseline, a);
        const auto pg = analyze_stream(res.grating, a);
        analysis::write_histogram_csv(join_path(g.out_dir, "baseline_hist.csv"), pb.hist);
        analysis::write_histogram_csv(join_path(g.out_dir, "grating_hist.csv"), pg.hist);
        report["baseline"] = {{"tag_file", base_path},
                              {"signal_channel", pb.sig_channel},
                              {"delay", delay_to_json(pb.estimate)}};
        report["grating"] = {{"tag_file", grat_path},
                             {"signal_channel", pg.sig_channel},
                             {"delay", delay_to_json(pg.estimate)}};
        std::printf("T0 = %.4f ns (significance %.1f)\n", pb.estimate.tau_star_ps * kNsPerPs,
                    pb.estimate.significance_sigma);
        std::printf("T1 = %.4f ns (significance %.1f)\n", pg.estimate.tau_star_ps * kNsPerPs,
                    pg.estimate.significance_sigma);

        const auto v = analysis::delta_t_test(pb.estimate, pg.estimate,
                                              res.predicted_delay_s * 1e12, a.bin_ns * 1e3,
                                              a.min_significance);
        report["delta_t"] = {{"value_ns", v.delta_t_ps * kNsPerPs},
                             {"sigma_ns", v.sigma_ps * kNsPerPs},
                             {"predicted_ns", v.predicted_ps * kNsPerPs},
                             {"verdict", analysis::to_string(v.verdict)},
                             {"hk_threshold_ns", v.hk_threshold_ps * kNsPerPs},
                             {"qm_threshold_ns", v.qm_threshold_ps * kNsPerPs}};
        std::printf("delta_t = %.4f +- %.4f ns (predicted %.4f) -> %s\n",
                    v.delta_t_ps * kNsPerPs, v.sigma_ps * kNsPerPs, v.predicted_ps * kNsPerPs,
                    analysis::to_string(v.verdict).c_str());
        if (v.verdict == analysis::Verdict::Inconclusive) exit_code = kExitInconclusive;

        // Heralded anticorrelation on the grating run when a second screen
        // detector is present.
        const auto chans = res.grating.channels();
        std::uint8_t cha = pg.sig_channel, chb = 0;
        for (const auto ch : chans)
            if (ch != a.ref_channel && ch != cha) {
                chb = ch;
                break;
            }
        if (chb != 0) {
            AnalyzeOptions ab = a;
            ab.sig_channel = chb;
            const auto pb2 = analyze_stream(res.grating, ab);
            const auto alpha = analysis::anticorrelation_alpha(
                res.grating.channel_times(a.ref_channel), res.grating.channel_times(cha),
                res.grating.channel_times(chb), a.window_ns * 1e3, pg.estimate.tau_star_ps,
                pb2.estimate.tau_star_ps);
            report["alpha"] = alpha_to_json(alpha);
            std::printf("alpha = %.4f\n", alpha.alpha);
        }
    } catch (const InconclusiveError& e) {
        report["delta_t"] = {{"verdict", "inconclusive"}, {"reason", e.what()}};
        std::printf("verdict: inconclusive (%s)\n", e.what());
        exit_code = kExitInconclusive;
    }

    write_text(join_path(g.out_dir, "experiment_report.json"), report.dump(2) + "\n");
    std::printf("report -> %s\n", join_path(g.out_dir, "experiment_report.json").c_str());
    return exit_code;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"single-photon grating diffraction collapse-time simulator"};
    app.require_subcommand(1);

    GlobalOptions g;
    std::string format_name = "bin";
    app.add_option("--config", g.config_path, "run configuration JSON (default: built-in reference setup)");
    app.add_option("--set", g.overrides, "override config values, section.key=value")
        ->take_all();
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override run.seed");
    app.add_option("--out", g.out_dir, "output directory (default: .)");
    app.add_option("--format", format_name, "tag file format: bin or csv");

    auto* pattern = app.add_subcommand("pattern", "tabulate the screen profile and peak table");
    auto* spread_cmd = app.add_subcommand("spread", "spread and collapse delay of a profile");
    std::string profile_path;
    spread_cmd->add_option("--profile", profile_path, "profile CSV instead of the config");
    auto* plan = app.add_subcommand("plan", "count-rate budgets and echo-ceiling check");
    auto* simulate = app.add_subcommand("simulate", "generate a time-tag stream for one phase");
    std::string phase_name = "grating";
    simulate->add_option("--phase", phase_name, "baseline or grating")->required();
    auto* analyze = app.add_subcommand("analyze", "coincidence analysis of tag files");
    AnalyzeOptions a;
    std::vector<std::string> tag_files;
    analyze->add_option("--tags", tag_files, "tag file(s); two files = baseline then grating")
        ->required()
        ->take_all();
    auto* runx = app.add_subcommand("run-experiment",
                                    "both phases + analysis + hypothesis verdict");
    for (auto* cmd : {analyze, runx}) {
        cmd->add_option("--ref-channel", a.ref_channel, "reference (herald) channel");
        cmd->add_option("--sig-channel", a.sig_channel, "signal channel (default: lowest screen channel)");
        cmd->add_option("--bin-ns", a.bin_ns, "coincidence histogram bin width (ns)");
        cmd->add_option("--range-ns", a.range_ns, "histogram half-range (ns)");
        cmd->add_option("--window-ns", a.window_ns, "alpha coincidence window (ns)");
        cmd->add_option("--min-significance", a.min_significance,
                        "required peak significance (sigma)");
    }
    double predicted_ns = 0.0;
    auto* pred_opt = analyze->add_option("--predicted-ns", predicted_ns,
                                         "predicted collapse delay for the verdict (ns)");
    analyze->add_flag("--alpha", a.alpha, "compute the heralded anticorrelation parameter");
    analyze->add_option("--alpha-b", a.alpha_b_channel, "second channel for alpha");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*seed_opt) g.seed = seed_value;
    try {
        g.format = tags::parse_tag_format(format_name);
        if (pattern->parsed()) return cmd_pattern(g);
        if (spread_cmd->parsed()) return cmd_spread(g, profile_path);
        if (plan->parsed()) return cmd_plan(g);
        if (simulate->parsed()) return cmd_simulate(g, phase_name);
        if (analyze->parsed()) {
            a.tag_files = tag_files;
            if (*pred_opt) a.predicted_ns = predicted_ns;
            return cmd_analyze(g, a);
        }
        if (runx->parsed()) return cmd_run_experiment(g, a);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InconclusiveError& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return kExitInconclusive;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace collapsim::cli
