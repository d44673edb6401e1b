// latentmotion: ingest, synth, train, eval, reconstruct and plot verbs.

#include "latentmotion/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace {

void add_common(CLI::App* cmd, latentmotion::CommandOptions& opts, bool with_fold) {
    cmd->add_option("--config", opts.config, "Experiment config JSON (synthetic config for synth)");
    cmd->add_option("--data", opts.data, "Dataset archive, ingest manifest, run directory or report file");
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--seed", opts.seed, "Seed override for training or generation");
    if (with_fold) {
        cmd->add_option("--fold", opts.fold, "Fold index or 'all'")->default_val("all");
        cmd->add_option("--workers", opts.workers,
                        "Parallel fold workers (overrides LATENTMOTION_WORKERS and the config)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    using latentmotion::CommandOptions;
    CLI::App app{"Latent ODE modelling of noncyclic motion sequences"};
    app.set_version_flag("--version", latentmotion::version_string());
    app.require_subcommand(1);

    using Verb = std::function<int(const CommandOptions&, std::ostream&, std::ostream&)>;
    std::map<std::string, std::pair<CommandOptions, Verb>> verbs;
    struct Spec {
        const char* name;
        const char* help;
        bool with_fold;
        Verb fn;
    };
    const Spec specs[] = {
        {"ingest", "Detect events, align and window raw trials into a dataset archive", false,
         latentmotion::cmd_ingest},
        {"synth", "Generate a synthetic dataset archive with a ground-truth sidecar", false,
         latentmotion::cmd_synth},
        {"train", "Train one or all cross-validation folds", true, latentmotion::cmd_train},
        {"eval", "Evaluate fold checkpoints and write reports and a participant summary", true,
         latentmotion::cmd_eval},
        {"reconstruct", "Export held-out predictions and latent paths", true, latentmotion::cmd_reconstruct},
        {"plot", "Render SVG curves, latent projections and stick figures", false, latentmotion::cmd_plot},
    };
    for (const auto& s : specs) {
        auto& [opts, fn] = verbs[s.name];
        fn = s.fn;
        add_common(app.add_subcommand(s.name, s.help), opts, s.with_fold);
    }

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : app.get_subcommands()) {
        auto& [opts, fn] = verbs.at(sub->get_name());
        return fn(opts, std::cout, std::cerr);
    }
    return 1;
}
