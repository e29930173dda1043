#pragma once

// Batch runner behind the holodisc command line.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace holodisc::cli {

enum ExitCode : int {
    kSuccess = 0,
    kFailure = 1,        ///< a check reported failure
    kNoConvergence = 2,
    kConfigError = 3,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Params = nlohmann::ordered_json;

struct Settings {
    std::string subcommand;
    std::filesystem::path out = "holodisc-out";
    std::uint64_t seed = 1;
    int threads = 1;
    bool dry_run = false;
    bool plots = false;
    Params params;   ///< subcommand parameters, fully resolved
};

/// Subcommands that run computations (plot is handled separately).
const std::vector<std::string>& subcommands();

Params default_params(const std::string& subcommand);

/// Overlays a TOML document: top-level seed, threads, out, plots and the
/// table named after the subcommand. Throws ConfigError.
void apply_config(Settings& s, const std::string& toml_text, const std::string& source);

/// Overrides one parameter from command-line text, converted to the type of
/// its default. Arrays accept comma-separated lists.
void apply_override(Settings& s, const std::string& key, const std::vector<std::string>& values);

/// Range checks on the resolved parameters. Throws ConfigError.
void validate(const Settings& s);

/// Resolved configuration as echoed in the manifest and by --dry-run.
Params resolved_config(const Settings& s);

struct Outcome {
    int code = kSuccess;
    std::vector<std::string> artifacts;   ///< file names inside the output directory
    std::string message;
};

/// Runs the pipeline and writes artifacts plus manifest.json into s.out.
Outcome execute(const Settings& s);

/// One SVG per report: a norm-study CSV, a sidecar carrying "history", or a
/// squeeze report carrying "chain". Throws ConfigError for a missing or
/// unrecognised report; an empty list writes nothing.
std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& reports,
                                              const std::filesystem::path& out_dir);

int run(int argc, char** argv);

}  // namespace holodisc::cli
