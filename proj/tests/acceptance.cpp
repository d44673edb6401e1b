// Desk-scale acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "latentmotion/artifacts.hpp"
#include "latentmotion/commands.hpp"
#include "latentmotion/config.hpp"
#include "latentmotion/data_pipeline.hpp"
#include "latentmotion/dataset_io.hpp"
#include "latentmotion/evaluation.hpp"
#include "latentmotion/latent_dynamics.hpp"
#include "latentmotion/model.hpp"
#include "latentmotion/random.hpp"
#include "latentmotion/synthetic.hpp"
#include "latentmotion/training.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace latentmotion;
namespace fs = std::filesystem;

namespace {

using MatD = nn::Mat<double>;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

MatD random_mat(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    MatD m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * standard_normal(rng);
    return m;
}

ModelConfig tiny_model(int tokens, int latent, int model_dim) {
    ModelConfig c;
    c.encoder.n_layers = 1;
    c.encoder.n_heads = 2;
    c.encoder.model_dim = model_dim;
    c.encoder.feedforward_dim = 2 * model_dim;
    c.encoder.latent_dim = latent;
    c.encoder.n_tokens = tokens;
    c.encoder.input_dim = 45;
    c.vector_field.latent_dim = latent;
    c.vector_field.hidden_dims = {8, 8};
    c.decoder.latent_dim = latent;
    c.decoder.hidden_dims = {8, 8};
    c.decoder.output_dim = 45;
    return c;
}

fs::path fresh_dir(const fs::path& root, const std::string& name) {
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// 1. RK4 on dz/dt = -z

struct DecayField {
    using Scalar = double;
    struct Cache {};
    MatD forward(const MatD& z, double, Cache*) const { return -z; }
    MatD backward(const Cache&, const MatD& d) const { return -d; }
};

double decay_error(int steps) {
    const DecayField f;
    const auto states = Rk4Integrator<DecayField>::integrate(f, MatD::Ones(1, 1), TimeGrid::uniform(steps + 1), nullptr);
    return std::abs(states.back()(0, 0) - std::exp(-1.0));
}

Outcome rk4_correctness() {
    const double err = decay_error(100);
    std::vector<double> lx, ly;
    for (int steps : {25, 50, 100, 200}) {
        lx.push_back(std::log(1.0 / steps));
        ly.push_back(std::log(decay_error(steps)));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        mx += lx[i] / 4.0;
        my += ly[i] / 4.0;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    const double order = num / den;
    return {err < 1e-8 && order >= 3.9 && order <= 4.1,
            "terminal error " + fmt(err) + " (< 1e-8), fitted order " + fmt(order) + " (in [3.9, 4.1])"};
}

// ---------------------------------------------------------------------------
// 2. End-to-end gradients

// Relative error uses max(|a|, |n|, floor) as denominator. Parameters whose
// true gradient is exactly zero (key biases) then compare round-off to the floor.
constexpr double kGradFloor = 1e-7;

Outcome gradient_check() {
    LatentOdeModel<double> model(tiny_model(3, 2, 8));
    model.initialize(10);
    auto data_rng = make_rng(11);
    std::vector<MatD> batch;
    for (int i = 0; i < 2; ++i) batch.push_back(random_mat(12, 45, data_rng));
    TrainConfig cfg;
    cfg.lambda_kl = 0.1;

    model.zero_grad();
    auto rng = make_rng(12);
    total_loss<double>(model, batch, cfg, rng, true);
    auto loss = [&] {
        auto r = make_rng(12);
        return total_loss<double>(model, batch, cfg, r, false).total;
    };

    const auto params = model.parameters();
    std::size_t total = 0;
    for (const auto* p : params) total += static_cast<std::size_t>(p->value.size());
    auto pick = make_rng(13, 77);
    std::set<std::size_t> chosen;
    while (chosen.size() < 40) chosen.insert(uniform_index(pick, total));

    std::size_t checked = 0, nonzero = 0, failed = 0;
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t flat : chosen) {
        for (auto* p : params) {
            const auto n = static_cast<std::size_t>(p->value.size());
            if (flat >= n) {
                flat -= n;
                continue;
            }
            double& w = p->value.data()[flat];
            const double saved = w;
            w = saved + h;
            const double up = loss();
            w = saved - h;
            const double down = loss();
            w = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p->grad.data()[flat];
            const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
            worst = std::max(worst, rel);
            ++checked;
            if (std::abs(analytic) > kGradFloor) ++nonzero;
            if (!(rel < 1e-3)) ++failed;
            break;
        }
    }
    return {checked >= 20 && nonzero >= 20 && failed == 0,
            std::to_string(checked) + " parameters (" + std::to_string(nonzero) + " with |grad| > 1e-7), worst rel. error " +
                fmt(worst) + " (< 1e-3)"};
}

// ---------------------------------------------------------------------------
// 3. KL against Monte Carlo

double log_normal_pdf(double x, double mean, double var) {
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + (x - mean) * (x - mean) / var);
}

Outcome kl_oracle() {
    auto rng = make_rng(3);
    int within = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        GaussianToken<double> tok;
        tok.mean.resize(3);
        tok.log_var.resize(3);
        for (int j = 0; j < 3; ++j) tok.mean(j) = standard_normal(rng);
        for (int j = 0; j < 3; ++j) tok.log_var(j) = standard_normal(rng);
        const std::vector<GaussianToken<double>> one{tok};
        const double closed = kl_loss<double>(one);

        const int n = 100000;
        double sum = 0.0, sq = 0.0;
        for (int s = 0; s < n; ++s) {
            double log_ratio = 0.0;
            for (int j = 0; j < 3; ++j) {
                const double var = std::exp(tok.log_var(j));
                const double z = tok.mean(j) + std::sqrt(var) * standard_normal(rng);
                log_ratio += log_normal_pdf(z, tok.mean(j), var) - log_normal_pdf(z, 0.0, 1.0);
            }
            sum += log_ratio;
            sq += log_ratio * log_ratio;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sq / n - mean * mean) / n);
        const double z = std::abs(mean - closed) / se;
        worst = std::max(worst, z);
        if (z < 3.0) ++within;
    }
    return {within == 10, std::to_string(within) + "/10 tokens within 3 SE, worst " + fmt(worst, 3) + " SE"};
}

// ---------------------------------------------------------------------------
// 4. Causality

Outcome causality() {
    const ModelConfig mc = tiny_model(4, 3, 8);
    LatentOdeModel<double> model(mc);
    model.initialize(21);
    LatentOdeModel<float> model_f(mc);
    model_f.initialize(21);
    const StandardizationStats stats{Eigen::VectorXd::Zero(45), Eigen::VectorXd::Ones(45)};
    auto rng = make_rng(22);
    int token_failures = 0, predict_failures = 0, comparisons = 0;
    for (int c = 0; c < 20; ++c) {
        const Eigen::Index frames = 12 + static_cast<Eigen::Index>(uniform_index(rng, 20));
        const MatD x = random_mat(frames, 45, rng);
        const auto base = model.encoder.encode(x);
        for (int k = 0; k + 1 < mc.encoder.n_tokens; ++k) {
            const Eigen::Index end = base[static_cast<std::size_t>(k)].segment_end;
            MatD y = x;
            y.bottomRows(frames - end) = random_mat(frames - end, 45, rng, 10.0);
            const auto moved = model.encoder.encode(y);
            for (int j = 0; j <= k; ++j) {
                ++comparisons;
                const auto& a = base[static_cast<std::size_t>(j)];
                const auto& b = moved[static_cast<std::size_t>(j)];
                if (a.mean != b.mean || a.log_var != b.log_var) ++token_failures;
            }
            if (k == 0) {
                const MotionMatrix xm = x;
                const MotionMatrix ym = y;
                if (predict(model, xm, stats).predicted != predict(model, ym, stats).predicted) ++predict_failures;
                if (predict(model_f, xm, stats).predicted != predict(model_f, ym, stats).predicted) ++predict_failures;
            }
        }
    }
    return {token_failures == 0 && predict_failures == 0,
            std::to_string(comparisons) + " token comparisons, " + std::to_string(token_failures) +
                " differ; " + std::to_string(predict_failures) + "/40 predictions differ"};
}

// ---------------------------------------------------------------------------
// 5. Metric oracles

oracle::Trial to_trial(const MotionMatrix& m) {
    oracle::Trial t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) t[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    }
    return t;
}

Outcome metric_oracles() {
    auto rng = make_rng(31);
    int mismatches = 0, cases = 0;
    for (int c = 0; c < 50; ++c) {
        const auto n = static_cast<std::size_t>(2 + uniform_index(rng, 2));
        const auto dim = static_cast<Eigen::Index>(1 + uniform_index(rng, 2));
        const auto frames = static_cast<Eigen::Index>(1 + uniform_index(rng, 4));
        std::vector<MotionMatrix> truth, pred;
        std::vector<oracle::Trial> ot, op;
        for (std::size_t i = 0; i < n; ++i) {
            truth.push_back(random_mat(frames, dim, rng, 10.0));
            pred.push_back(random_mat(frames, dim, rng, 10.0));
            ot.push_back(to_trial(truth.back()));
            op.push_back(to_trial(pred.back()));
        }
        const auto rmse = rmse_curve(truth, pred);
        const auto r2 = r2_curve(truth, pred);
        const auto rmse_ref = oracle::rmse_curve(ot, op);
        const auto r2_ref = oracle::r2_curve(ot, op);
        for (std::size_t t = 0; t < static_cast<std::size_t>(frames); ++t) {
            if (rmse.per_frame[t] != rmse_ref[t]) ++mismatches;
            if (r2.values[t] != r2_ref[t] && !(std::isnan(r2.values[t]) && std::isnan(r2_ref[t]))) ++mismatches;
        }
        ++cases;
    }

    int bad_special = 0;
    std::vector<MotionMatrix> truth;
    for (int i = 0; i < 3; ++i) truth.push_back(random_mat(4, 2, rng));
    for (double v : r2_curve(truth, truth).values) bad_special += v == 1.0 ? 0 : 1;
    // Dyadic values keep the test mean exact.
    std::vector<MotionMatrix> dyadic;
    for (int i = 0; i < 4; ++i) {
        MotionMatrix m(4, 2);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<double>(uniform_index(rng, 64)) / 8.0;
        dyadic.push_back(m);
    }
    MotionMatrix mean = MotionMatrix::Zero(4, 2);
    for (const auto& m : dyadic) mean += m;
    mean /= 4.0;
    const std::vector<MotionMatrix> mean_pred(4, mean);
    for (double v : r2_curve(dyadic, mean_pred).values) bad_special += (std::isnan(v) || v == 0.0) ? 0 : 1;
    return {mismatches == 0 && bad_special == 0,
            std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatching values; " +
                std::to_string(bad_special) + " perfect/test-mean frames off"};
}

// ---------------------------------------------------------------------------
// 6. Event detection

// Knee rises by random dyadic increments with a random stall, peaks, then
// falls. Values are on a 1/64 grid so shifts and power-of-two scales are exact.
Eigen::VectorXd random_knee(Eigen::Index frames, Rng& rng) {
    const Eigen::Index rise_start = 5 + static_cast<Eigen::Index>(uniform_index(rng, 20));
    const Eigen::Index peak = rise_start + 20 + static_cast<Eigen::Index>(uniform_index(rng, 30));
    Eigen::VectorXd z(frames);
    double h = static_cast<double>(uniform_index(rng, 64)) / 64.0;
    for (Eigen::Index t = 0; t < frames; ++t) {
        if (t > 0) {
            if (t < rise_start) {
                h += (static_cast<double>(uniform_index(rng, 3)) - 1.0) / 64.0;
            } else if (t <= peak) {
                h += static_cast<double>(1 + uniform_index(rng, 32)) / 64.0;
            } else {
                h -= static_cast<double>(uniform_index(rng, 16)) / 64.0;
            }
        }
        z(t) = h;
    }
    return z;
}

MotionMatrix random_wrist(Eigen::Index frames, Rng& rng) {
    MotionMatrix w = MotionMatrix::Zero(frames, 3);
    for (Eigen::Index t = 1; t < frames; ++t) {
        for (int c = 0; c < 3; ++c) {
            w(t, c) = w(t - 1, c) + (static_cast<double>(uniform_index(rng, 128)) - 48.0) / 32.0;
        }
    }
    return w;
}

Outcome event_oracle() {
    auto rng = make_rng(41);
    int mismatches = 0, invariance = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index frames = 90 + static_cast<Eigen::Index>(uniform_index(rng, 40));
        const int window = trial % 2 == 0 ? 5 : 1;
        EventOptions opts;
        opts.smoothing_window = window;
        const Eigen::VectorXd knee = random_knee(frames, rng);
        const MotionMatrix wrist = random_wrist(frames, rng);

        const TrialEvents onset = detect_onset(knee, 200.0, opts);
        const Eigen::Index release = detect_release(wrist, 200.0, opts);
        const oracle::Onset ref = oracle::onset(oracle::Series(knee.data(), knee.data() + knee.size()), 200.0, window, 0.05);
        std::vector<std::array<double, 3>> w3;
        for (Eigen::Index t = 0; t < frames; ++t) w3.push_back({wrist(t, 0), wrist(t, 1), wrist(t, 2)});
        const std::size_t ref_release = oracle::release(w3, 200.0, window);
        if (static_cast<std::size_t>(onset.onset_frame) != ref.onset ||
            static_cast<std::size_t>(onset.max_knee_height_frame) != ref.peak || onset.onset_warning != ref.warning ||
            static_cast<std::size_t>(release) != ref_release) {
            ++mismatches;
        }

        for (double shift : {-1024.0, 3.0, 4096.0}) {
            const TrialEvents moved = detect_onset((knee.array() + shift).matrix(), 200.0, opts);
            const MotionMatrix w2 = wrist.array() + shift;
            if (moved.onset_frame != onset.onset_frame || detect_release(w2, 200.0, opts) != release) ++invariance;
        }
        for (double scale : {0.25, 2.0, 8.0}) {
            const TrialEvents scaled = detect_onset(knee * scale, 200.0, opts);
            if (scaled.onset_frame != onset.onset_frame || detect_release(wrist * scale, 200.0, opts) != release) {
                ++invariance;
            }
        }
    }
    return {mismatches == 0 && invariance == 0,
            "100 trajectories, " + std::to_string(mismatches) + " oracle mismatches, " + std::to_string(invariance) +
                "/600 invariance failures"};
}

// ---------------------------------------------------------------------------
// 7. Synthetic end-to-end

struct Paths {
    fs::path work;
    fs::path desk_config;
    fs::path synth_config;
};

Outcome synthetic_end_to_end(const Paths& paths) {
    const fs::path root = fresh_dir(paths.work, "synthetic");
    std::ostringstream out, err;
    CommandOptions s;
    s.config = paths.synth_config;
    s.out = root / "data";
    s.seed = 0;
    if (cmd_synth(s, out, err) != 0) return {false, "synth failed: " + err.str()};

    CommandOptions t;
    t.config = paths.desk_config;
    t.data = root / "data";
    t.out = root / "run";
    t.workers = 1;
    if (cmd_train(t, out, err) != 0) return {false, "train failed: " + err.str()};
    if (cmd_eval(t, out, err) != 0) return {false, "eval failed: " + err.str()};

    const ExperimentConfig config = load_experiment_config(paths.desk_config);
    const ExperimentLayout layout{root / "run"};
    std::vector<double> r2;
    double model_sq = 0.0, base_sq = 0.0;
    std::size_t count = 0;
    for (int fold = 0; fold < config.n_folds; ++fold) {
        const EvalReport r = eval_report_from_json(read_json(layout.report("synthetic", fold)));
        r2.push_back(r.mean_r2_latter_half);
        for (std::size_t i = latter_half_start(r.rmse_curve.size()); i < r.rmse_curve.size(); ++i) {
            model_sq += r.rmse_curve[i] * r.rmse_curve[i];
            base_sq += r.baseline_rmse_curve[i] * r.baseline_rmse_curve[i];
            ++count;
        }
    }
    const MeanSd r2_stats = mean_sd(r2);
    const double model_rmse = std::sqrt(model_sq / static_cast<double>(count));
    const double base_rmse = std::sqrt(base_sq / static_cast<double>(count));
    const double reduction = 1.0 - model_rmse / base_rmse;
    return {r2_stats.mean > 0.8 && reduction >= 0.3,
            std::to_string(config.n_folds) + " folds, latter-half R2 " + fmt(r2_stats.mean) + " +/- " +
                fmt(r2_stats.sd, 2) + " (> 0.8), late RMSE " + fmt(model_rmse) + " vs baseline " + fmt(base_rmse) +
                " (" + fmt(100.0 * reduction, 3) + "% lower, >= 30%)"};
}

// ---------------------------------------------------------------------------
// 8. Determinism

std::string last_total(const fs::path& history) {
    std::ifstream in(history);
    std::string line, last;
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    const auto a = last.find(',');
    const auto b = last.find(',', a + 1);
    return last.substr(a + 1, b - a - 1);
}

Outcome determinism(const Paths& paths) {
    const fs::path root = fresh_dir(paths.work, "determinism");
    std::ostringstream out, err;
    std::ofstream(root / "synth.json") << R"({"n_trials": 30, "n_frames": 20})";
    std::ofstream(root / "experiment.json") << R"({
  "n_folds": 3,
  "model": {
    "encoder": {"n_layers": 1, "n_heads": 2, "model_dim": 8, "feedforward_dim": 16, "n_tokens": 3},
    "vector_field": {"hidden_dims": [8, 8]},
    "decoder": {"hidden_dims": [8, 8]}
  },
  "training": {"epochs": 15, "batch_size": 8, "learning_rate": 0.003, "seed": 5}
})";
    CommandOptions s;
    s.config = root / "synth.json";
    s.out = root / "data";
    s.seed = 2;
    if (cmd_synth(s, out, err) != 0) return {false, "synth failed: " + err.str()};

    std::vector<std::string> finals;
    for (const char* run : {"run_a", "run_b"}) {
        CommandOptions t;
        t.config = root / "experiment.json";
        t.data = root / "data";
        t.out = root / run;
        t.fold = "1";
        t.workers = 1;
        if (cmd_train(t, out, err) != 0) return {false, std::string("train failed: ") + err.str()};
        finals.push_back(last_total(ExperimentLayout{root / run}.history("synthetic", 1)));
    }

    const ExperimentConfig config = load_experiment_config(root / "experiment.json");
    const MotionDataset data = read_archive(root / "data").dataset;
    const FoldAssignment folds = make_folds(data.size(), config.n_folds, config.fold_seed);
    const auto ckpt = load_checkpoint<float>(ExperimentLayout{root / "run_a"}.checkpoint("synthetic", 1));
    if (!ckpt.validation) return {false, "checkpoint has no validation metrics"};
    const EvalReport again = evaluate_fold(ckpt.trained, data, folds, config.evaluation);
    double drift = std::max(std::abs(again.rmse_overall - ckpt.validation->rmse_overall),
                            std::abs(again.mean_r2_latter_half - ckpt.validation->mean_r2_latter_half));
    drift = std::max(drift, std::abs(again.mean_r2_full - ckpt.validation->mean_r2_full));
    return {finals[0] == finals[1] && drift < 1e-6,
            "final loss " + finals[0] + " vs " + finals[1] + " (bit-identical), reload drift " + fmt(drift) +
                " (< 1e-6)"};
}

// ---------------------------------------------------------------------------
// 9. Standardization hygiene

Outcome standardization_hygiene() {
    SynthConfig sc;
    sc.n_trials = 40;
    sc.n_frames = 16;
    const MotionDataset data = synth_generate(sc, 9).dataset;
    const FoldAssignment folds = make_folds(data.size(), 10, 4);
    const ModelConfig mc = tiny_model(3, 3, 8);
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 8;
    int leaks = 0;
    for (int fold = 0; fold < 10; ++fold) {
        MotionDataset mutated = data;
        for (std::size_t i : folds.test_indices(fold)) {
            mutated.trials[i].array() += 1000.0 * static_cast<double>(i + 1);
            mutated.trials[i].col(0) *= -3.0;
        }
        const auto a = train_fold<double>(data, folds, fold, tc, mc);
        const auto b = train_fold<double>(mutated, folds, fold, tc, mc);
        if (a.trained.stats.mean != b.trained.stats.mean || a.trained.stats.std != b.trained.stats.std) ++leaks;
    }
    return {leaks == 0, "10 folds, " + std::to_string(leaks) + " with stats changed by held-out mutation"};
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale acceptance checks"};
    std::vector<int> only;
    Paths paths;
    paths.work = fs::temp_directory_path() / "latentmotion_acceptance";
    paths.desk_config = LATENTMOTION_DESK_CONFIG;
    paths.synth_config = LATENTMOTION_SYNTH_CONFIG;
    app.add_option("--only", only, "Criterion numbers to run (default: all)");
    app.add_option("--work-dir", paths.work, "Scratch directory for generated runs");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "rk4 correctness", 1.0, rk4_correctness},
        {2, "gradient check", 30.0, gradient_check},
        {3, "kl oracle", 10.0, kl_oracle},
        {4, "causality", 30.0, causality},
        {5, "metric oracles", 0.0, metric_oracles},
        {6, "event oracle", 0.0, event_oracle},
        {7, "synthetic end-to-end", 1800.0, [&] { return synthetic_end_to_end(paths); }},
        {8, "determinism", 0.0, [&] { return determinism(paths); }},
        {9, "standardization hygiene", 0.0, standardization_hygiene},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = o.pass;
        std::string timing = fmt(seconds, 3) + " s";
        if (c.budget_seconds > 0.0) {
            timing += " (budget " + fmt(c.budget_seconds, 4) + " s)";
            pass = pass && seconds < c.budget_seconds;
        }
        if (!pass) ++failures;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << "; " << timing
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
