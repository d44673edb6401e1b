#include "latentmotion/commands.hpp"

#include "latentmotion/artifacts.hpp"
#include "latentmotion/dataset_io.hpp"
#include "latentmotion/errors.hpp"
#include "latentmotion/plot.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef LATENTMOTION_VERSION
#define LATENTMOTION_VERSION "0.0.0"
#endif

namespace latentmotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fold_name(int fold) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fold_%02d", fold);
    return buf;
}

/// Serializes lines from concurrent fold workers to the console and run log.
class RunLog {
public:
    RunLog(std::ostream& console, const fs::path& file) : console_(console) {
        if (!file.empty()) {
            if (file.has_parent_path()) fs::create_directories(file.parent_path());
            file_.open(file, std::ios::app);
        }
    }

    void line(const std::string& text) {
        std::lock_guard<std::mutex> lock(mutex_);
        console_ << text << '\n';
        console_.flush();
        if (file_) file_ << text << '\n';
    }

private:
    std::ostream& console_;
    std::ofstream file_;
    std::mutex mutex_;
};

json run_manifest(const std::string& command, const std::string& hash, std::uint64_t seed) {
    return {{"tool", "latentmotion"},
            {"version", version_string()},
            {"command", command},
            {"config_hash", hash},
            {"seed", seed},
            {"versions",
             {{"latentmotion", version_string()},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", std::string(__VERSION__)}}}};
}

fs::path dataset_path(const CommandOptions& opts, const ExperimentConfig& config) {
    if (!opts.data.empty()) return opts.data;
    if (!config.dataset.empty()) return config.dataset;
    throw ConfigurationError("no dataset given (use --data or data.dataset in the config)");
}

fs::path require_out(const CommandOptions& opts) {
    if (opts.out.empty()) throw ConfigurationError("--out is required");
    return opts.out;
}

/// Runs `work(fold)` for each fold on up to `workers` threads. Returns the
/// number of folds that threw; each failure is logged.
template <typename Work>
int run_folds(const std::vector<int>& folds, int workers, RunLog& log, Work work) {
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < folds.size(); i = next++) {
            try {
                work(folds[i]);
            } catch (const std::exception& e) {
                ++failures;
                log.line("error: " + fold_name(folds[i]) + ": " + e.what());
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(folds.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return failures.load();
}

template <typename Scalar>
void train_one(const MotionDataset& dataset, const FoldAssignment& folds, int fold,
               const ExperimentConfig& config, const ExperimentLayout& layout, RunLog& log) {
    const std::string& pid = dataset.participant_id;
    const int report_every = std::max(1, config.training.epochs / 10);
    const auto start = std::chrono::steady_clock::now();
    auto on_epoch = [&](const EpochRecord& r) {
        if ((r.epoch + 1) % report_every == 0 || r.epoch == 0) {
            std::ostringstream msg;
            msg << fold_name(fold) << " epoch " << (r.epoch + 1) << "/" << config.training.epochs
                << " loss " << std::setprecision(6) << r.total << " recon " << r.recon << " kl " << r.kl;
            log.line(msg.str());
        }
    };
    FoldResult<Scalar> result;
    try {
        result = train_fold<Scalar>(dataset, folds, fold, config.training, config.model, on_epoch);
    } catch (const std::exception& e) {
        write_json(layout.failure_marker(pid, fold), {{"fold", fold}, {"error", e.what()}});
        fs::remove(layout.checkpoint(pid, fold));
        throw;
    }
    const EvalReport validation = evaluate_fold(result.trained, dataset, folds, config.evaluation);
    save_checkpoint(layout.checkpoint(pid, fold), result.trained, config.training.seed, validation);
    write_history_csv(layout.history(pid, fold), result.history);
    fs::remove(layout.failure_marker(pid, fold));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream msg;
    msg << fold_name(fold) << " done in " << std::fixed << std::setprecision(1) << seconds << " s; final loss "
        << std::setprecision(6) << (result.history.epochs.empty() ? 0.0 : result.history.epochs.back().total)
        << "; held-out R2 latter half " << std::setprecision(4) << validation.mean_r2_latter_half;
    log.line(msg.str());
}

struct FoldEvaluation {
    EvalReport test;
    EvalReport train;
    std::vector<Prediction> predictions;
};

template <typename Scalar>
FoldEvaluation evaluate_checkpoint(const fs::path& path, const MotionDataset& dataset,
                                   const FoldAssignment& folds, int fold, const EvalOptions& options) {
    const LoadedCheckpoint<Scalar> ckpt = load_checkpoint<Scalar>(path);
    if (ckpt.trained.fold != fold) {
        throw IoError("checkpoint " + path.string() + " belongs to fold " + std::to_string(ckpt.trained.fold));
    }
    FoldEvaluation out;
    out.test = evaluate_fold(ckpt.trained, dataset, folds, options, &out.predictions);

    // Training-split score, kept only as a logged observation.
    const auto train_idx = folds.train_indices(fold);
    const auto train_pred = predict_trials(ckpt.trained, dataset, train_idx);
    std::vector<MotionMatrix> train_mm;
    for (std::size_t i : train_idx) train_mm.push_back(dataset.trials[i]);
    out.train = build_report(train_pred, train_mm, fold, dataset.participant_id, options);
    return out;
}

template <typename Scalar>
std::vector<Prediction> reconstruct_checkpoint(const fs::path& path, const MotionDataset& dataset,
                                               const FoldAssignment& folds, int fold) {
    const LoadedCheckpoint<Scalar> ckpt = load_checkpoint<Scalar>(path);
    const auto idx = folds.test_indices(fold);
    return predict_trials(ckpt.trained, dataset, idx);
}

MotionDataset load_dataset(const fs::path& path) {
    return read_archive(path).dataset;
}

fs::path ground_truth_path(const fs::path& data) {
    return data / "ground_truth.json";
}

}  // namespace

fs::path ExperimentLayout::checkpoint(const std::string& participant, int fold) const {
    return root / "checkpoints" / participant / (fold_name(fold) + ".json");
}
fs::path ExperimentLayout::failure_marker(const std::string& participant, int fold) const {
    return root / "checkpoints" / participant / (fold_name(fold) + ".failed.json");
}
fs::path ExperimentLayout::history(const std::string& participant, int fold) const {
    return root / "histories" / participant / (fold_name(fold) + ".csv");
}
fs::path ExperimentLayout::report(const std::string& participant, int fold) const {
    return root / "reports" / participant / (fold_name(fold) + ".json");
}
fs::path ExperimentLayout::curves(const std::string& participant, int fold) const {
    return root / "reports" / participant / (fold_name(fold) + "_curves.csv");
}
fs::path ExperimentLayout::summary(const std::string& participant) const {
    return root / "reports" / participant / "summary.json";
}
fs::path ExperimentLayout::summary_curves(const std::string& participant) const {
    return root / "reports" / participant / "summary_curves.csv";
}
fs::path ExperimentLayout::reconstruction_dir(const std::string& participant, int fold) const {
    return root / "reconstructions" / participant / fold_name(fold);
}

std::vector<int> parse_fold_spec(const std::string& spec, int n_folds) {
    if (spec == "all") {
        std::vector<int> out(static_cast<std::size_t>(n_folds));
        for (int k = 0; k < n_folds; ++k) out[static_cast<std::size_t>(k)] = k;
        return out;
    }
    char* end = nullptr;
    const long k = std::strtol(spec.c_str(), &end, 10);
    if (spec.empty() || *end != '\0' || k < 0 || k >= n_folds) {
        throw ConfigurationError("--fold must be 'all' or an index in [0, " + std::to_string(n_folds) + ")");
    }
    return {static_cast<int>(k)};
}

int resolve_workers(const std::optional<int>& flag, int config_workers) {
    if (flag) {
        if (*flag < 1) throw ConfigurationError("--workers must be at least 1");
        return *flag;
    }
    if (const char* env = std::getenv("LATENTMOTION_WORKERS"); env && *env) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 1) throw ConfigurationError("LATENTMOTION_WORKERS must be a positive integer");
        return static_cast<int>(n);
    }
    return config_workers;
}

ExperimentConfig resolve_experiment_config(const CommandOptions& opts) {
    ExperimentConfig config = opts.config.empty() ? ExperimentConfig{} : load_experiment_config(opts.config);
    if (opts.seed) config.training.seed = *opts.seed;
    if (!opts.data.empty()) config.dataset = opts.data.string();
    config.validate();
    return config;
}

std::string version_string() {
    return LATENTMOTION_VERSION;
}

int cmd_ingest(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = resolve_experiment_config(opts);
        fs::path manifest_path = !opts.data.empty() ? opts.data : fs::path(config.manifest);
        if (manifest_path.empty()) throw ConfigurationError("no ingest manifest given (use --data)");
        if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
        const fs::path out_dir = require_out(opts);
        const IngestManifest manifest = read_ingest_manifest(manifest_path);

        std::vector<RawTrial> raw;
        std::vector<TrialEvents> events;
        int failures = 0;
        for (const auto& file : manifest.trial_files) {
            const std::string id = file.stem().string();
            try {
                RawTrial trial{id, read_trial_csv(file, manifest.joint_schema), manifest.frame_rate};
                trial.validate();
                events.push_back(detect_events(trial, manifest.joint_schema));
                raw.push_back(std::move(trial));
            } catch (const std::exception& e) {
                ++failures;
                err << "error: trial " << id << ": " << e.what() << '\n';
            }
        }
        if (failures > 0) {
            err << "ingest failed for " << failures << " of " << manifest.trial_files.size() << " trials\n";
            return 1;
        }
        if (raw.empty()) throw InputTooShortError("manifest lists no trials");

        DatasetArchive archive;
        archive.dataset = align_and_window(raw, events, manifest.joint_schema, manifest.participant_id);
        archive.dataset.frame_rate = manifest.frame_rate;
        archive.events = events;
        if (archive.dataset.size() >= static_cast<std::size_t>(config.n_folds)) {
            archive.folds = make_folds(archive.dataset.size(), config.n_folds, config.fold_seed);
        }
        write_archive(out_dir, archive);

        out << "trial_id,max_knee_height_frame,onset_frame,release_frame,onset_warning\n";
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out << raw[i].trial_id << ',' << events[i].max_knee_height_frame << ',' << events[i].onset_frame << ','
                << events[i].release_frame << ',' << (events[i].onset_warning ? 1 : 0) << '\n';
            if (events[i].onset_warning) {
                err << "warning: trial " << raw[i].trial_id << ": onset threshold never crossed, onset set to 0\n";
            }
        }
        out << "participant " << archive.dataset.participant_id << ": " << archive.dataset.size()
            << " trials, window length T = " << archive.dataset.window_length() << '\n';
        write_json(out_dir / "run_manifest.json",
                   run_manifest("ingest", config_hash(read_json(manifest_path)), config.fold_seed));
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_synth(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        SynthConfig synth = opts.config.empty() ? SynthConfig{} : load_synth_config(opts.config);
        synth.validate();
        const fs::path out_dir = require_out(opts);
        const std::uint64_t seed = opts.seed.value_or(0);
        const auto start = std::chrono::steady_clock::now();
        SynthResult result = synth_generate(synth, seed);

        DatasetArchive archive;
        archive.dataset = std::move(result.dataset);
        if (archive.dataset.size() >= 10) archive.folds = make_folds(archive.dataset.size(), 10, 0);
        write_archive(out_dir, archive);
        write_ground_truth(ground_truth_path(out_dir), result.truth, archive.dataset.trial_ids);
        write_json(out_dir / "run_manifest.json", run_manifest("synth", config_hash(to_json(synth)), seed));
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << "wrote " << archive.dataset.size() << " synthetic trials of " << archive.dataset.window_length()
            << " frames to " << out_dir.string() << " (" << std::fixed << std::setprecision(2) << seconds
            << " s)\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = resolve_experiment_config(opts);
        const ExperimentLayout layout{require_out(opts)};
        const MotionDataset dataset = load_dataset(dataset_path(opts, config));
        const FoldAssignment folds = make_folds(dataset.size(), config.n_folds, config.fold_seed);
        const std::vector<int> requested = parse_fold_spec(opts.fold, config.n_folds);
        const int workers = resolve_workers(opts.workers, config.workers);

        fs::create_directories(layout.root);
        save_experiment_config(layout.config_file(), config);
        const json config_json = to_json(config);
        json manifest = run_manifest("train", config_hash(config_json), config.training.seed);
        manifest["folds"] = requested;
        manifest["workers"] = workers;
        manifest["participant_id"] = dataset.participant_id;
        manifest["precision"] = to_string(config.training.precision);
        write_json(layout.run_manifest(), manifest);

        RunLog log(out, layout.run_log());
        log.line("train: participant " + dataset.participant_id + ", " + std::to_string(dataset.size()) +
                 " trials, T = " + std::to_string(dataset.window_length()) + ", config " +
                 config_hash(config_json) + ", seed " + std::to_string(config.training.seed));
        const int failures = run_folds(requested, workers, log, [&](int fold) {
            if (config.training.precision == Precision::Float64) {
                train_one<double>(dataset, folds, fold, config, layout, log);
            } else {
                train_one<float>(dataset, folds, fold, config, layout, log);
            }
        });
        if (failures > 0) {
            err << "error: " << failures << " fold(s) failed; see *.failed.json markers\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_eval(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = resolve_experiment_config(opts);
        const ExperimentLayout layout{require_out(opts)};
        const fs::path data = dataset_path(opts, config);
        const MotionDataset dataset = load_dataset(data);
        const FoldAssignment folds = make_folds(dataset.size(), config.n_folds, config.fold_seed);
        const std::vector<int> requested = parse_fold_spec(opts.fold, config.n_folds);
        const std::string& pid = dataset.participant_id;

        for (int fold : requested) {
            if (!fs::exists(layout.checkpoint(pid, fold))) {
                err << "error: missing checkpoint for " << fold_name(fold) << " ("
                    << layout.checkpoint(pid, fold).string() << ")\n";
                return 1;
            }
        }

        RunLog log(out, layout.run_log());
        std::vector<FoldEvaluation> results(requested.size());
        const int workers = resolve_workers(opts.workers, config.workers);
        const int failures = run_folds(requested, workers, log, [&](int fold) {
            const fs::path path = layout.checkpoint(pid, fold);
            const std::size_t slot =
                static_cast<std::size_t>(std::find(requested.begin(), requested.end(), fold) - requested.begin());
            results[slot] = checkpoint_precision(path) == Precision::Float64
                                ? evaluate_checkpoint<double>(path, dataset, folds, fold, config.evaluation)
                                : evaluate_checkpoint<float>(path, dataset, folds, fold, config.evaluation);
        });
        if (failures > 0) {
            err << "error: evaluation failed for " << failures << " fold(s)\n";
            return 1;
        }

        std::vector<EvalReport> reports;
        for (std::size_t i = 0; i < requested.size(); ++i) {
            const FoldEvaluation& r = results[i];
            write_json(layout.report(pid, requested[i]), to_json(r.test));
            write_curves_csv(layout.curves(pid, requested[i]), r.test);
            reports.push_back(r.test);
            std::ostringstream msg;
            msg << std::setprecision(4) << fold_name(requested[i]) << ": RMSE " << r.test.rmse_overall
                << " (baseline " << r.test.baseline_rmse_overall << "), R2 full " << r.test.mean_r2_full
                << ", latter half " << r.test.mean_r2_latter_half << "; training-split R2 full "
                << r.train.mean_r2_full;
            if (!(r.train.mean_r2_full > r.test.mean_r2_full)) msg << " (no generalization gap observed)";
            log.line(msg.str());
        }

        const ParticipantSummary summary = summarize(reports);
        json summary_json = to_json(summary);
        summary_json["schema_version"] = kReportSchemaVersion;
        summary_json["folds"] = requested;
        json observations = json::array();
        for (std::size_t i = 0; i < requested.size(); ++i) {
            observations.push_back({{"fold", requested[i]},
                                    {"train_mean_r2_full", results[i].train.mean_r2_full},
                                    {"test_mean_r2_full", results[i].test.mean_r2_full}});
        }
        summary_json["generalization_gap"] = observations;

        if (fs::exists(ground_truth_path(data))) {
            // Out-of-band diagnostic; not part of the reported prediction metrics.
            const SynthGroundTruth truth = read_ground_truth(ground_truth_path(data));
            std::vector<MotionMatrix> est;
            std::vector<MotionMatrix> ref;
            for (const auto& r : results) {
                for (const auto& p : r.predictions) {
                    const auto it = std::find(dataset.trial_ids.begin(), dataset.trial_ids.end(), p.trial_id);
                    const auto idx = static_cast<std::size_t>(it - dataset.trial_ids.begin());
                    if (idx >= truth.latent_paths.size()) continue;
                    est.push_back(p.latent_path);
                    ref.push_back(truth.latent_paths[idx]);
                }
            }
            if (!est.empty()) {
                summary_json["diagnostics"] = {{"latent_recovery_r2", latent_recovery_r2(est, ref)}};
            }
        }
        write_json(layout.summary(pid), summary_json);
        write_summary_curves_csv(layout.summary_curves(pid), summary);

        std::ostringstream msg;
        msg << std::setprecision(4) << "summary " << pid << ": R2 full " << summary.mean_r2_full.mean << " +/- "
            << summary.mean_r2_full.sd << ", latter half " << summary.mean_r2_latter_half.mean << " +/- "
            << summary.mean_r2_latter_half.sd << ", RMSE " << summary.rmse.mean << " +/- " << summary.rmse.sd
            << " mm (baseline " << summary.baseline_rmse.mean << ")";
        log.line(msg.str());
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_reconstruct(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = resolve_experiment_config(opts);
        const ExperimentLayout layout{require_out(opts)};
        const MotionDataset dataset = load_dataset(dataset_path(opts, config));
        const FoldAssignment folds = make_folds(dataset.size(), config.n_folds, config.fold_seed);
        const std::string& pid = dataset.participant_id;
        std::size_t written = 0;
        for (int fold : parse_fold_spec(opts.fold, config.n_folds)) {
            const fs::path path = layout.checkpoint(pid, fold);
            if (!fs::exists(path)) throw IoError("missing checkpoint for " + fold_name(fold));
            const auto predictions = checkpoint_precision(path) == Precision::Float64
                                         ? reconstruct_checkpoint<double>(path, dataset, folds, fold)
                                         : reconstruct_checkpoint<float>(path, dataset, folds, fold);
            const fs::path dir = layout.reconstruction_dir(pid, fold);
            json index = {{"participant_id", pid},
                          {"fold", fold},
                          {"joint_schema", to_json(dataset.joint_schema)},
                          {"trials", json::array()}};
            for (const auto& p : predictions) {
                write_trial_csv(dir / (p.trial_id + "_predicted.csv"), p.predicted, dataset.joint_schema);
                write_trial_csv(dir / (p.trial_id + "_truth.csv"), p.truth, dataset.joint_schema);
                write_latent_csv(dir / (p.trial_id + "_latent.csv"), p.latent_path);
                index["trials"].push_back(p.trial_id);
                ++written;
            }
            write_json(dir / "index.json", index);
        }
        out << "wrote " << written << " reconstructions under " << (layout.root / "reconstructions").string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

namespace {

std::size_t plot_reports(const std::vector<EvalReport>& reports, const fs::path& dir, const std::string& tag,
                         std::ostream& out) {
    const ParticipantSummary s = summarize(reports);
    const std::string suffix = reports.size() == 1 ? " (fold " + std::to_string(reports[0].fold_id) + ")"
                                                   : " (mean +/- SD over " + std::to_string(reports.size()) +
                                                         " folds)";
    auto rmse = plot_band_curves(dir / (tag + "_rmse.svg"), "RMSE " + s.participant_id + suffix, "RMSE [mm]",
                                 {{"model", "", s.rmse_curve}, {"mean baseline", "#7f7f7f", s.baseline_rmse_curve}});
    auto r2 = plot_band_curves(dir / (tag + "_r2.svg"), "R2 " + s.participant_id + suffix, "R2",
                               {{"model", "", s.r2_curve}, {"mean baseline", "#7f7f7f", s.baseline_r2_curve}});
    out << "wrote " << rmse.path.string() << '\n' << "wrote " << r2.path.string() << '\n';
    return 2;
}

}  // namespace

int cmd_plot(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        if (opts.data.empty()) throw ConfigurationError("--data must name a run directory or a report file");
        std::size_t emitted = 0;
        if (fs::is_regular_file(opts.data)) {
            const fs::path dir = opts.out.empty() ? opts.data.parent_path() : opts.out;
            const EvalReport report = eval_report_from_json(read_json(opts.data));
            emitted += plot_reports({report}, dir, opts.data.stem().string(), out);
        } else {
            const ExperimentLayout layout{opts.data};
            const fs::path plots = opts.out.empty() ? layout.plots_dir() : opts.out;
            const fs::path reports_root = layout.root / "reports";
            const fs::path recon_root = layout.root / "reconstructions";
            std::vector<fs::path> participants;
            if (fs::exists(reports_root)) {
                for (const auto& entry : fs::directory_iterator(reports_root)) {
                    if (entry.is_directory()) participants.push_back(entry.path());
                }
            }
            std::sort(participants.begin(), participants.end());
            for (const auto& pdir : participants) {
                std::vector<fs::path> files;
                for (const auto& entry : fs::directory_iterator(pdir)) {
                    const std::string name = entry.path().filename().string();
                    if (name.rfind("fold_", 0) == 0 && entry.path().extension() == ".json") {
                        files.push_back(entry.path());
                    }
                }
                std::sort(files.begin(), files.end());
                std::vector<EvalReport> reports;
                for (const auto& f : files) reports.push_back(eval_report_from_json(read_json(f)));
                if (!reports.empty()) emitted += plot_reports(reports, plots / pdir.filename(), "summary", out);
            }

            std::vector<fs::path> recon_dirs;
            if (fs::exists(recon_root)) {
                for (const auto& entry : fs::recursive_directory_iterator(recon_root)) {
                    if (entry.path().filename() == "index.json") recon_dirs.push_back(entry.path().parent_path());
                }
            }
            std::sort(recon_dirs.begin(), recon_dirs.end());
            for (const auto& dir : recon_dirs) {
                const json index = read_json(dir / "index.json");
                const JointSchema schema = joint_schema_from_json(index.at("joint_schema"));
                const std::string pid = index.at("participant_id").get<std::string>();
                const std::string fold = fold_name(index.at("fold").get<int>());
                std::vector<MotionMatrix> paths;
                std::vector<std::string> ids;
                for (const auto& id : index.at("trials")) {
                    ids.push_back(id.get<std::string>());
                    paths.push_back(read_latent_csv(dir / (ids.back() + "_latent.csv")));
                }
                if (paths.empty()) continue;
                const auto latent = plot_latent_paths(plots / pid / (fold + "_latent.svg"), paths, ids);
                out << "wrote " << latent.path.string() << '\n';
                ++emitted;

                Prediction p;
                p.trial_id = ids.front();
                p.predicted = read_trial_csv(dir / (ids.front() + "_predicted.csv"), schema);
                p.truth = read_trial_csv(dir / (ids.front() + "_truth.csv"), schema);
                const Eigen::Index t = p.truth.rows();
                std::vector<Eigen::Index> frames;
                for (int q = 0; q <= 4; ++q) {
                    const Eigen::Index f = (t - 1) * q / 4;
                    if (frames.empty() || frames.back() != f) frames.push_back(f);
                }
                const auto stick = plot_stick_frames(plots / pid / (fold + "_" + p.trial_id + "_frames.svg"), p,
                                                     schema, frames);
                out << "wrote " << stick.path.string() << '\n';
                ++emitted;
            }
        }
        if (emitted == 0) {
            err << "error: nothing to plot under " << opts.data.string() << '\n';
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace latentmotion
