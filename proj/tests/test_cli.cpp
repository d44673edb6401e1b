#include "latentmotion/artifacts.hpp"
#include "latentmotion/commands.hpp"
#include "latentmotion/dataset_io.hpp"
#include "latentmotion/plot.hpp"

#include "test_support.hpp"

#include <fstream>
#include <sstream>

using namespace latentmotion;
namespace fs = std::filesystem;

namespace {

/// Raw pitch whose events are known in closed form: the knee rises linearly
/// from frame `rise` (detected onset rise - 3 under the 5-frame smoothing)
/// and the wrist speed is a symmetric bump centred on `release`.
MotionMatrix scripted_pitch(Eigen::Index frames, Eigen::Index rise, Eigen::Index release) {
    const JointSchema schema = JointSchema::pitching_default();
    MotionMatrix m = MotionMatrix::Zero(frames, 45);
    for (int j = 0; j < 15; ++j) m.col(3 * j + schema.vertical_axis).setConstant(100.0 * j);
    const int knee = 3 * schema.joint_index(schema.lead_knee) + schema.vertical_axis;
    const int wrist = 3 * schema.joint_index(schema.throwing_wrist);
    const Eigen::Index peak = rise + 100;
    for (Eigen::Index t = 0; t < frames; ++t) {
        double h = 0.0;
        if (t > rise && t <= peak) h = 4.0 * static_cast<double>(t - rise);
        if (t > peak) h = std::max(0.0, 400.0 - 2.0 * static_cast<double>(t - peak));
        m(t, knee) = 500.0 + h;
        m(t, wrist) = 1000.0 * std::tanh(static_cast<double>(t - release) / 10.0);
    }
    return m;
}

fs::path write_ingest_fixture(const fs::path& dir, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& events,
                              Eigen::Index frames) {
    const JointSchema schema = JointSchema::pitching_default();
    IngestManifest manifest;
    manifest.participant_id = "sub01";
    for (std::size_t i = 0; i < events.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%03zu.csv", i);
        const fs::path file = dir / "raw" / name;
        write_trial_csv(file, scripted_pitch(frames, events[i].first, events[i].second), schema);
        manifest.trial_files.push_back(file);
    }
    write_ingest_manifest(dir / "raw" / "manifest.json", manifest);
    return dir / "raw" / "manifest.json";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
}

const char* kTinyExperiment = R"({
  "n_folds": 4,
  "model": {
    "encoder": {"n_layers": 1, "n_heads": 2, "model_dim": 8, "feedforward_dim": 16, "n_tokens": 3},
    "vector_field": {"hidden_dims": [8, 8]},
    "decoder": {"hidden_dims": [8, 8]}
  },
  "training": {"epochs": 20, "batch_size": 8, "learning_rate": 0.003, "seed": 3}
})";

struct SynthRun {
    fs::path root;
    fs::path data;
    fs::path config;
};

SynthRun synth_run(const std::string& name) {
    SynthRun r;
    r.root = testing::scratch_dir(name);
    r.data = r.root / "data";
    r.config = write_text(r.root / "experiment.json", kTinyExperiment);
    const fs::path synth_cfg = write_text(r.root / "synth.json", R"({"n_trials": 24, "n_frames": 16})");
    std::ostringstream out, err;
    CommandOptions o;
    o.config = synth_cfg;
    o.out = r.data;
    o.seed = 1;
    REQUIRE(cmd_synth(o, out, err) == 0);
    return r;
}

CommandOptions run_options(const SynthRun& r, const std::string& fold) {
    CommandOptions o;
    o.config = r.config;
    o.data = r.data;
    o.out = r.root / "run";
    o.fold = fold;
    o.workers = 1;
    return o;
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
    if (!fs::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        const std::string s = e.path().filename().string();
        n += s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest of two trials prints the events table") {
    const auto dir = testing::scratch_dir("cli_ingest2");
    const fs::path manifest = write_ingest_fixture(dir, {{30, 200}, {40, 230}}, 300);
    CommandOptions o;
    o.data = manifest;
    o.out = dir / "archive";
    std::ostringstream out, err;
    REQUIRE(cmd_ingest(o, out, err) == 0);
    const DatasetArchive a = read_archive(dir / "archive");
    REQUIRE(a.events.size() == 2);
    CHECK(a.events[0].onset_frame == 27);
    CHECK(a.events[0].release_frame == 200);
    CHECK(a.events[1].onset_frame == 37);
    CHECK(a.events[1].release_frame == 230);
    CHECK(a.dataset.window_length() == 230 - 37 + 1);
    CHECK(out.str().find("trial_000,130,27,200,0") != std::string::npos);
    CHECK(out.str().find("T = 194") != std::string::npos);
    CHECK(fs::exists(dir / "archive" / "run_manifest.json"));
}

TEST_CASE("ingest rejects a trial with a NaN sample and names it") {
    const auto dir = testing::scratch_dir("cli_ingest_nan");
    const fs::path manifest = write_ingest_fixture(dir, {{30, 200}, {40, 230}}, 300);
    std::string text = slurp(dir / "raw" / "trial_001.csv");
    const auto pos = text.find("\n5,");
    REQUIRE(pos != std::string::npos);
    const auto comma = text.find(',', pos + 3);
    text.replace(pos + 3, comma - pos - 3, "nan");
    write_text(dir / "raw" / "trial_001.csv", text);
    CommandOptions o;
    o.data = manifest;
    o.out = dir / "archive";
    std::ostringstream out, err;
    CHECK(cmd_ingest(o, out, err) != 0);
    CHECK(err.str().find("trial_001") != std::string::npos);
    CHECK(err.str().find("trial_000") == std::string::npos);
}

TEST_CASE("ingest of a 105-trial participant reports T = 450") {
    const auto dir = testing::scratch_dir("cli_ingest105");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> events;
    for (Eigen::Index i = 0; i < 105; ++i) {
        const Eigen::Index rise = 40 + i % 7;
        events.push_back({rise, rise + 400 + i % 47});  // longest window: 446 + 3 + 1
    }
    const fs::path manifest = write_ingest_fixture(dir, events, 500);
    CommandOptions o;
    o.data = manifest;
    o.out = dir / "archive";
    std::ostringstream out, err;
    REQUIRE(cmd_ingest(o, out, err) == 0);
    CHECK(out.str().find("105 trials, window length T = 450") != std::string::npos);
    const DatasetArchive a = read_archive(dir / "archive");
    CHECK(a.dataset.size() == 105);
    CHECK(a.dataset.window_length() == 450);
    REQUIRE(a.folds.has_value());
    CHECK(a.folds->n_folds == 10);
}

TEST_CASE("synth is byte-identical for the same seed") {
    const auto dir = testing::scratch_dir("cli_synth");
    const fs::path cfg = write_text(dir / "synth.json", R"({"n_trials": 12, "n_frames": 10})");
    for (const char* name : {"a", "b"}) {
        CommandOptions o;
        o.config = cfg;
        o.out = dir / name;
        o.seed = 9;
        std::ostringstream out, err;
        REQUIRE(cmd_synth(o, out, err) == 0);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), dir / "a");
        CHECK(slurp(e.path()) == slurp(dir / "b" / rel));
        ++compared;
    }
    CHECK(compared >= 15);
    CHECK(fs::exists(dir / "a" / "ground_truth.json"));
}

TEST_CASE("train, eval, reconstruct and plot on a tiny synthetic run") {
    const SynthRun r = synth_run("cli_pipeline");
    std::ostringstream out, err;

    REQUIRE(cmd_train(run_options(r, "0"), out, err) == 0);
    CHECK(count_files(r.root / "run" / "checkpoints", ".json") == 1);
    CHECK(fs::exists(r.root / "run" / "checkpoints" / "synthetic" / "fold_00.json"));
    CHECK(fs::exists(r.root / "run" / "histories" / "synthetic" / "fold_00.csv"));
    CHECK(slurp(r.root / "run" / "run.log").find("config") != std::string::npos);
    const nlohmann::json manifest = read_json(r.root / "run" / "run_manifest.json");
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest["seed"] == 3);

    // Evaluating every fold before they exist names the first missing one.
    std::ostringstream eout, eerr;
    CHECK(cmd_eval(run_options(r, "all"), eout, eerr) != 0);
    CHECK(eerr.str().find("fold_01") != std::string::npos);

    REQUIRE(cmd_train(run_options(r, "all"), out, err) == 0);
    CHECK(count_files(r.root / "run" / "checkpoints", ".json") == 4);
    CHECK(count_files(r.root / "run" / "histories", ".csv") == 4);

    REQUIRE(cmd_eval(run_options(r, "all"), out, err) == 0);
    const nlohmann::json summary = read_json(r.root / "run" / "reports" / "synthetic" / "summary.json");
    CHECK(summary.contains("mean_r2_full"));
    CHECK(summary.contains("mean_r2_latter_half"));
    CHECK(summary.contains("generalization_gap"));
    CHECK(summary["diagnostics"].contains("latent_recovery_r2"));
    CHECK(count_files(r.root / "run" / "reports", "_curves.csv") == 5);  // four folds and the summary

    REQUIRE(cmd_reconstruct(run_options(r, "2"), out, err) == 0);
    const fs::path recon = r.root / "run" / "reconstructions" / "synthetic" / "fold_02";
    CHECK(fs::exists(recon / "index.json"));
    CHECK(count_files(recon, "_predicted.csv") == 6);

    CommandOptions p;
    p.data = r.root / "run";
    REQUIRE(cmd_plot(p, out, err) == 0);
    CHECK(count_files(r.root / "run" / "plots", ".svg") == 4);

    // One report file in, two images out.
    CommandOptions single;
    single.data = r.root / "run" / "reports" / "synthetic" / "fold_00.json";
    single.out = r.root / "single";
    REQUIRE(cmd_plot(single, out, err) == 0);
    CHECK(count_files(r.root / "single", ".svg") >= 2);

    CommandOptions broken;
    broken.data = write_text(r.root / "broken.json", "{\"fold_id\": ");
    CHECK(cmd_plot(broken, out, err) != 0);
}

TEST_CASE("plots are deterministic") {
    const SynthRun r = synth_run("cli_plot_det");
    std::ostringstream out, err;
    REQUIRE(cmd_train(run_options(r, "1"), out, err) == 0);
    REQUIRE(cmd_eval(run_options(r, "1"), out, err) == 0);
    REQUIRE(cmd_reconstruct(run_options(r, "1"), out, err) == 0);
    CommandOptions p;
    p.data = r.root / "run";
    p.out = r.root / "p1";
    REQUIRE(cmd_plot(p, out, err) == 0);
    p.out = r.root / "p2";
    REQUIRE(cmd_plot(p, out, err) == 0);
    for (const auto& e : fs::recursive_directory_iterator(r.root / "p1")) {
        if (e.is_regular_file()) CHECK(slurp(e.path()) == slurp(r.root / "p2" / fs::relative(e.path(), r.root / "p1")));
    }
}

TEST_CASE("a zero vector field plots each latent path as one point") {
    const SynthRun r = synth_run("cli_zero_field");
    std::ostringstream out, err;
    REQUIRE(cmd_train(run_options(r, "0"), out, err) == 0);
    const fs::path ckpt = r.root / "run" / "checkpoints" / "synthetic" / "fold_00.json";
    nlohmann::json j = read_json(ckpt);
    for (const char* name : {"vector_field.layer3.weight", "vector_field.layer3.bias"}) {
        auto& data = j["parameters"][name]["data"];
        for (auto& v : data) v = 0.0;
    }
    write_json(ckpt, j);
    REQUIRE(cmd_reconstruct(run_options(r, "0"), out, err) == 0);

    const fs::path recon = r.root / "run" / "reconstructions" / "synthetic" / "fold_00";
    const nlohmann::json index = read_json(recon / "index.json");
    std::vector<MotionMatrix> paths;
    std::vector<std::string> ids;
    for (const auto& id : index["trials"]) {
        ids.push_back(id.get<std::string>());
        paths.push_back(read_latent_csv(recon / (ids.back() + "_latent.csv")));
        CHECK((paths.back().rowwise() - paths.back().row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
    const PlotInfo info = plot_latent_paths(r.root / "zero.svg", paths, ids);
    REQUIRE(info.distinct_points.size() == paths.size());
    for (std::size_t n : info.distinct_points) CHECK(n == 1);
}

TEST_CASE("fold specs and worker resolution") {
    CHECK(parse_fold_spec("all", 3) == std::vector<int>{0, 1, 2});
    CHECK(parse_fold_spec("2", 3) == std::vector<int>{2});
    CHECK_THROWS(parse_fold_spec("3", 3));
    CHECK_THROWS(parse_fold_spec("x", 3));
    CHECK(resolve_workers(4, 1) == 4);
    const ExperimentLayout layout{"/runs/x"};
    CHECK(layout.checkpoint("p1", 3) == fs::path("/runs/x/checkpoints/p1/fold_03.json"));
    CHECK(layout.report("p1", 3) == fs::path("/runs/x/reports/p1/fold_03.json"));
    CHECK(layout.checkpoint("p1", 3) == ExperimentLayout{"/runs/x"}.checkpoint("p1", 3));
}

TEST_CASE("missing inputs give a nonzero exit") {
    std::ostringstream out, err;
    CommandOptions o;
    o.data = "/nonexistent/latentmotion";
    o.out = testing::scratch_dir("cli_missing") / "run";
    CHECK(cmd_train(o, out, err) != 0);
    CHECK(cmd_ingest(o, out, err) != 0);
    CommandOptions none;
    CHECK(cmd_synth(none, out, err) != 0);
    CHECK(!err.str().empty());
}

}  // TEST_SUITE
