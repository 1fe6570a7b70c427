#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collapsim/config.hpp"
#include "collapsim/tags.hpp"

// Command-line entry points. Each command is an ordinary function taking
// parsed options, so tests can drive them without spawning a process; the
// CLI11 front end in run_cli() only maps argv onto these.

namespace collapsim::cli {

// Exit codes. Distinct values for the error classes callers script against.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInconclusive = 4;

struct GlobalOptions {
    std::string config_path;            ///< empty = built-in reference setup
    std::vector<std::string> overrides; ///< --set section.key=value
    std::optional<std::uint64_t> seed;  ///< --seed, wins over config
    std::string out_dir = ".";
    tags::TagFormat format = tags::TagFormat::Binary;
};

/// Loads the config (file or reference), applies --set overrides and the seed
/// override, validates, and prints any warnings to stderr.
config::RunConfig load_config(const GlobalOptions& g);

struct AnalyzeOptions {
    std::vector<std::string> tag_files;  ///< one file: delay estimate; two: baseline+grating
    std::uint8_t ref_channel = 1;
    std::uint8_t sig_channel = 0;  ///< 0 = lowest screen channel present
    double bin_ns = 2.0;
    double range_ns = 50.0;  ///< histogram spans [-range, +range)
    double window_ns = 2.0;  ///< coincidence window for alpha
    bool alpha = false;
    std::uint8_t alpha_b_channel = 0;  ///< 0 = next screen channel
    double min_significance = 5.0;
    std::optional<double> predicted_ns;  ///< else derived from the config profile
};

int cmd_pattern(const GlobalOptions& g);
int cmd_spread(const GlobalOptions& g, const std::string& profile_csv_path = {});
int cmd_plan(const GlobalOptions& g);
int cmd_simulate(const GlobalOptions& g, const std::string& phase);
int cmd_analyze(const GlobalOptions& g, const AnalyzeOptions& a);
int cmd_run_experiment(const GlobalOptions& g, AnalyzeOptions a);

/// Parses argv and dispatches; catches domain errors and maps them to the
/// exit codes above.
int run_cli(int argc, const char* const* argv);

}  // namespace collapsim::cli
