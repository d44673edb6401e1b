#include "latentmotion/errors.hpp"
#include "latentmotion/synthetic.hpp"
#include "latentmotion/training.hpp"

#include "test_support.hpp"

#include <numbers>

using namespace latentmotion;
using testing::MatD;

namespace {

std::vector<MatD> random_batch(int trials, Eigen::Index frames, Rng& rng) {
    std::vector<MatD> out;
    for (int i = 0; i < trials; ++i) out.push_back(testing::random_matrix(frames, 45, rng));
    return out;
}

GaussianToken<double> token(std::initializer_list<double> mean, std::initializer_list<double> log_var) {
    GaussianToken<double> t;
    t.mean = Eigen::Map<const Eigen::VectorXd>(mean.begin(), static_cast<Eigen::Index>(mean.size()));
    t.log_var = Eigen::Map<const Eigen::VectorXd>(log_var.begin(), static_cast<Eigen::Index>(log_var.size()));
    return t;
}

double log_normal_pdf(double x, double mean, double var) {
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + (x - mean) * (x - mean) / var);
}

TrainConfig quick_config(int epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 8;
    c.learning_rate = 3e-3;
    c.seed = 5;
    return c;
}

MotionDataset small_synthetic(int trials, int frames, std::uint64_t seed, double noise = 0.02) {
    SynthConfig cfg;
    cfg.n_trials = trials;
    cfg.n_frames = frames;
    cfg.noise_std = noise;
    return synth_generate(cfg, seed).dataset;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("reconstruction loss examples") {
    MatD x = MatD::Zero(2, 2);
    MatD y(2, 2);
    y << 1, 0, 0, 2;
    CHECK(recon_loss<double>(y, x) == 1.25);
    CHECK(recon_loss<double>(x, x) == 0.0);
    auto rng = make_rng(1);
    const MatD r = testing::random_matrix(5, 45, rng);
    CHECK(recon_loss<double>((r.array() + 1.0).matrix(), r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(recon_loss<double>(MatD::Zero(2, 3), x), ContractError);
}

TEST_CASE("KL examples") {
    const std::vector<GaussianToken<double>> prior{token({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0})};
    CHECK(kl_loss<double>(prior) == 0.0);
    const std::vector<GaussianToken<double>> shifted{token({2.0}, {0.0})};
    CHECK(kl_loss<double>(shifted) == 2.0);
    // Averaged over tokens, summed over dims.
    const std::vector<GaussianToken<double>> two{token({2.0, 0.0}, {0.0, 0.0}), token({0.0, 0.0}, {0.0, 0.0})};
    CHECK(kl_loss<double>(two) == 1.0);
}

TEST_CASE("KL is non-negative and vanishes only at the prior") {
    auto rng = make_rng(2);
    for (int i = 0; i < 200; ++i) {
        const double m = 2.0 * standard_normal(rng);
        const double lv = 3.0 * standard_normal(rng);
        const std::vector<GaussianToken<double>> t{token({m, 0.1}, {lv, -0.2})};
        CHECK(kl_loss<double>(t) > 0.0);
    }
}

TEST_CASE("KL agrees with a Monte Carlo estimate") {
    auto rng = make_rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const double m0 = standard_normal(rng), m1 = standard_normal(rng), m2 = standard_normal(rng);
        const double l0 = standard_normal(rng), l1 = standard_normal(rng), l2 = standard_normal(rng);
        const auto tok = token({m0, m1, m2}, {l0, l1, l2});
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
        CHECK(std::abs(mean - closed) < 3.0 * se);
    }
}

TEST_CASE("total loss is the weighted sum of its components") {
    LatentOdeModel<double> model(testing::tiny_model_config());
    model.initialize(4);
    auto rng = make_rng(5);
    const auto batch = random_batch(3, 12, rng);
    TrainConfig cfg;
    cfg.lambda_recon = 0.7;
    cfg.lambda_kl = 0.3;
    const LossComponents l = total_loss<double>(model, batch, cfg, rng, false);
    CHECK(std::abs(l.total - (0.7 * l.recon + 0.3 * l.kl)) < 1e-12);
    CHECK(l.kl >= 0.0);

    cfg.lambda_kl = 0.0;
    cfg.lambda_recon = 1.0;
    const LossComponents r = total_loss<double>(model, batch, cfg, rng, false);
    CHECK(r.total == r.recon);
}

TEST_CASE("mean-only training mode is deterministic in the loss") {
    LatentOdeModel<double> model(testing::tiny_model_config());
    model.initialize(6);
    auto data_rng = make_rng(7);
    const auto batch = random_batch(2, 12, data_rng);
    TrainConfig cfg;
    cfg.sample_initial_state = false;
    auto r1 = make_rng(1);
    auto r2 = make_rng(2);
    CHECK(total_loss<double>(model, batch, cfg, r1, false).total ==
          total_loss<double>(model, batch, cfg, r2, false).total);
}

TEST_CASE("without the reconstruction term the decoder gets no gradient") {
    LatentOdeModel<double> model(testing::tiny_model_config());
    model.initialize(8);
    auto rng = make_rng(9);
    const auto batch = random_batch(2, 12, rng);
    TrainConfig cfg;
    cfg.lambda_recon = 0.0;
    cfg.lambda_kl = 1.0;
    model.zero_grad();
    total_loss<double>(model, batch, cfg, rng, true);
    nn::ParameterList<double> dec;
    model.decoder.collect(dec);
    for (const auto* p : dec) CHECK(p->grad.isZero(0.0));
    nn::ParameterList<double> enc;
    model.encoder.collect(enc);
    CHECK(enc.back()->grad.norm() > 0.0);
}

TEST_CASE("end-to-end gradients match finite differences") {
    for (bool consistency : {false, true}) {
        CAPTURE(consistency);
        LatentOdeModel<double> model(testing::tiny_model_config(3, 2, 8));
        model.initialize(10);
        auto data_rng = make_rng(11);
        const auto batch = random_batch(2, 12, data_rng);
        TrainConfig cfg;
        cfg.lambda_kl = 0.1;
        cfg.lambda_consistency = consistency ? 0.5 : 0.0;

        model.zero_grad();
        auto rng = make_rng(12);
        total_loss<double>(model, batch, cfg, rng, true);
        auto loss = [&] {
            auto r = make_rng(12);
            return total_loss<double>(model, batch, cfg, r, false).total;
        };
        const auto samples = testing::finite_difference_check(model.parameters(), loss, 40, 13);
        REQUIRE(samples.size() >= 20);
        for (const auto& s : samples) {
            INFO(s.name << "[" << s.index << "] analytic " << s.analytic << " numeric " << s.numeric);
            CHECK((testing::rel_error(s.analytic, s.numeric) < 1e-3 || std::abs(s.analytic - s.numeric) < 1e-9));
        }
    }
}

TEST_CASE("Adam with zero learning rate leaves parameters unchanged") {
    LatentOdeModel<double> model(testing::tiny_model_config());
    model.initialize(14);
    auto rng = make_rng(15);
    const auto batch = random_batch(2, 12, rng);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    std::vector<MatD> before;
    for (auto* p : model.parameters()) before.push_back(p->value);
    AdamOptimizer<double> opt(model.parameters(), cfg);
    model.zero_grad();
    total_loss<double>(model, batch, cfg, rng, true);
    opt.step();
    const auto after = model.parameters();
    for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i]->value == before[i]);
    CHECK(opt.steps_taken() == 1);
}

TEST_CASE("first Adam step moves each weight by about the learning rate") {
    nn::Parameter<double> p{"w", MatD::Zero(1, 3), MatD::Zero(1, 3)};
    p.grad << 2.0, -0.5, 0.0;
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    AdamOptimizer<double> opt({&p}, cfg);
    opt.step();
    CHECK(p.value(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p.value(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(p.value(0, 2) == 0.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
    const MotionDataset data = small_synthetic(20, 12, 16);
    const FoldAssignment folds = make_folds(data.size(), 4, 0);
    const ModelConfig mc = testing::tiny_model_config(3, 3, 8);
    const TrainConfig tc = quick_config(3);
    auto a = train_fold<float>(data, folds, 1, tc, mc);
    auto b = train_fold<float>(data, folds, 1, tc, mc);
    REQUIRE(a.history.epochs.size() == 3);
    CHECK(a.history.epochs.back().total == b.history.epochs.back().total);
    const auto pa = a.trained.model.parameters();
    const auto pb = b.trained.model.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);

    TrainConfig other = tc;
    other.seed = 6;
    auto c = train_fold<float>(data, folds, 1, other, mc);
    CHECK(c.history.epochs.back().total != a.history.epochs.back().total);
}

TEST_CASE("standardization ignores the held-out fold") {
    const MotionDataset data = small_synthetic(20, 12, 17);
    const FoldAssignment folds = make_folds(data.size(), 5, 3);
    const ModelConfig mc = testing::tiny_model_config(3, 3, 8);
    const TrainConfig tc = quick_config(0);
    MotionDataset mutated = data;
    for (std::size_t i : folds.test_indices(2)) mutated.trials[i].array() += 1000.0 * static_cast<double>(i + 1);
    const auto a = train_fold<double>(data, folds, 2, tc, mc);
    const auto b = train_fold<double>(mutated, folds, 2, tc, mc);
    CHECK(a.trained.stats.mean == b.trained.stats.mean);
    CHECK(a.trained.stats.std == b.trained.stats.std);
    // Mutating a training trial must change them.
    MotionDataset touched = data;
    touched.trials[folds.train_indices(2).front()].array() += 1.0;
    const auto c = train_fold<double>(touched, folds, 2, tc, mc);
    CHECK(c.trained.stats.mean != a.trained.stats.mean);
}

TEST_CASE("training loss falls on noiseless linear dynamics") {
    const MotionDataset data = small_synthetic(40, 20, 18, 0.0);
    const FoldAssignment folds = make_folds(data.size(), 10, 0);
    ModelConfig mc = testing::tiny_model_config(3, 3, 16);
    mc.vector_field.hidden_dims = {32, 32};
    mc.decoder.hidden_dims = {32, 32};
    TrainConfig tc = quick_config(150);
    tc.batch_size = 12;
    const auto r = train_fold<float>(data, folds, 0, tc, mc);
    const double first = r.history.epochs.front().total;
    const double last = r.history.epochs.back().total;
    MESSAGE("loss " << first << " -> " << last);
    CHECK(last < first / 10.0);
}

TEST_CASE("train config validation and fold bounds") {
    TrainConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = TrainConfig{};
    c.lambda_kl = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    CHECK_THROWS_AS(precision_from_string("half"), ConfigurationError);
    CHECK(precision_from_string(to_string(Precision::Float64)) == Precision::Float64);

    const MotionDataset data = small_synthetic(10, 8, 19);
    const FoldAssignment folds = make_folds(data.size(), 5, 0);
    CHECK_THROWS_AS(train_fold<float>(data, folds, 5, quick_config(1), testing::tiny_model_config()),
                    ConfigurationError);
}

TEST_CASE("fold seeds are distinct") {
    CHECK(fold_seed(0, 0) != fold_seed(0, 1));
    CHECK(fold_seed(1, 0) != fold_seed(0, 1));
}

}  // TEST_SUITE
