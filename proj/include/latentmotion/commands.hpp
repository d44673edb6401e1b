#pragma once

#include "latentmotion/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace latentmotion {

/// Flags shared by every verb. Empty paths mean "not given".
struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path data;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    /// Fold index or "all".
    std::string fold = "all";
    std::optional<int> workers;
};

/// Artifact paths under a run root. Every path depends only on the root,
/// the participant and the fold.
struct ExperimentLayout {
    std::filesystem::path root;

    std::filesystem::path config_file() const { return root / "config.json"; }
    std::filesystem::path run_manifest() const { return root / "run_manifest.json"; }
    std::filesystem::path run_log() const { return root / "run.log"; }
    std::filesystem::path checkpoint(const std::string& participant, int fold) const;
    std::filesystem::path failure_marker(const std::string& participant, int fold) const;
    std::filesystem::path history(const std::string& participant, int fold) const;
    std::filesystem::path report(const std::string& participant, int fold) const;
    std::filesystem::path curves(const std::string& participant, int fold) const;
    std::filesystem::path summary(const std::string& participant) const;
    std::filesystem::path summary_curves(const std::string& participant) const;
    std::filesystem::path reconstruction_dir(const std::string& participant, int fold) const;
    std::filesystem::path plots_dir() const { return root / "plots"; }
};

/// "all" expands to every fold; otherwise a single index in [0, n_folds).
std::vector<int> parse_fold_spec(const std::string& spec, int n_folds);

/// Flag, then LATENTMOTION_WORKERS, then the config value.
int resolve_workers(const std::optional<int>& flag, int config_workers);

/// Defaults when `opts.config` is empty; applies --seed and --data overrides.
ExperimentConfig resolve_experiment_config(const CommandOptions& opts);

std::string version_string();

// Each verb returns the process exit code: 0 iff every requested artifact
// was written. Errors are reported on `err`.
int cmd_ingest(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_synth(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_plot(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace latentmotion
