#include "latentmotion/training.hpp"

#include "latentmotion/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace latentmotion {

std::string to_string(Precision precision) {
    return precision == Precision::Float32 ? "float32" : "float64";
}

Precision precision_from_string(const std::string& name) {
    if (name == "float32") return Precision::Float32;
    if (name == "float64") return Precision::Float64;
    throw ConfigurationError("unknown precision '" + name + "'");
}

void TrainConfig::validate() const {
    if (!(lambda_recon >= 0.0) || !(lambda_kl >= 0.0) || !(lambda_consistency >= 0.0)) {
        throw ConfigurationError("loss weights must be non-negative");
    }
    if (!(learning_rate >= 0.0)) throw ConfigurationError("learning_rate must be non-negative");
    if (batch_size < 1) throw ConfigurationError("batch_size must be at least 1");
    if (epochs < 0) throw ConfigurationError("epochs must be non-negative");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ConfigurationError("Adam betas must be in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw ConfigurationError("adam_epsilon must be positive");
    if (!(lr_decay > 0.0)) throw ConfigurationError("lr_decay must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigurationError("weight_decay must be non-negative");
    if (!(grad_clip_norm >= 0.0)) throw ConfigurationError("grad_clip_norm must be non-negative");
    if (early_stopping_patience < 0) {
        throw ConfigurationError("early_stopping_patience must be non-negative");
    }
}

template <typename Scalar>
double recon_loss(const nn::Mat<Scalar>& predicted, const nn::Mat<Scalar>& truth) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
        throw ContractError("recon_loss: shape mismatch");
    }
    if (predicted.size() == 0) throw ContractError("recon_loss: empty input");
    const Eigen::MatrixXd diff = (predicted - truth).template cast<double>();
    return diff.squaredNorm() / static_cast<double>(diff.size());
}

template <typename Scalar>
double kl_loss(std::span<const GaussianToken<Scalar>> tokens) {
    if (tokens.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& tok : tokens) {
        for (Eigen::Index j = 0; j < tok.mean.size(); ++j) {
            const double mu = tok.mean(j);
            const double lv = tok.log_var(j);
            sum += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
        }
    }
    return sum / static_cast<double>(tokens.size());
}

template <typename Scalar>
LossComponents total_loss(LatentOdeModel<Scalar>& model, std::span<const nn::Mat<Scalar>> batch,
                          const TrainConfig& config, Rng& rng, bool compute_gradients,
                          Rng* dropout_rng) {
    using MatS = nn::Mat<Scalar>;
    if (batch.empty()) throw ContractError("total_loss: empty batch");
    const Eigen::Index b_count = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index frames = batch.front().rows();
    const Eigen::Index dim = batch.front().cols();
    MatS stacked(b_count * frames, dim);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        const MatS& trial = batch[static_cast<std::size_t>(b)];
        if (trial.rows() != frames || trial.cols() != dim) {
            throw ContractError("total_loss: trials in a batch must share their shape");
        }
        stacked.middleRows(b * frames, frames) = trial;
    }

    const int tokens = model.encoder.config().n_tokens;
    const int d = model.encoder.config().latent_dim;
    typename TransformerEncoder<Scalar>::Cache enc_cache;
    const auto enc = model.encoder.forward(stacked, b_count, frames,
                                           compute_gradients ? &enc_cache : nullptr, dropout_rng);

    MatS mu0(b_count, d), lv0(b_count, d), eps = MatS::Zero(b_count, d);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        mu0.row(b) = enc.means.row(b * tokens);
        lv0.row(b) = enc.log_vars.row(b * tokens);
    }
    MatS z0 = mu0;
    if (config.sample_initial_state) {
        for (Eigen::Index b = 0; b < b_count; ++b) {
            for (int j = 0; j < d; ++j) {
                eps(b, j) = static_cast<Scalar>(standard_normal(rng));
                z0(b, j) = mu0(b, j) + std::exp(lv0(b, j) / Scalar(2)) * eps(b, j);
            }
        }
    }

    using Solver = Rk4Integrator<VectorField<Scalar>>;
    const TimeGrid grid = TimeGrid::uniform(frames);
    typename Solver::Tape tape;
    const std::vector<MatS> states =
        Solver::integrate(model.field, z0, grid, compute_gradients ? &tape : nullptr);

    MatS latent(b_count * frames, d);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        for (Eigen::Index i = 0; i < frames; ++i) {
            latent.row(b * frames + i) = states[static_cast<std::size_t>(i)].row(b);
        }
    }
    typename MlpDecoder<Scalar>::Cache dec_cache;
    const MatS recon = model.decoder.forward(latent, compute_gradients ? &dec_cache : nullptr);

    LossComponents loss;
    const MatS diff = recon - stacked;
    const double n_values = static_cast<double>(diff.size());
    loss.recon = diff.template cast<double>().squaredNorm() / n_values;

    const double n_tokens_total = static_cast<double>(b_count * tokens);
    double kl_sum = 0.0;
    for (Eigen::Index r = 0; r < enc.means.rows(); ++r) {
        for (int j = 0; j < d; ++j) {
            const double mu = enc.means(r, j);
            const double lv = enc.log_vars(r, j);
            kl_sum += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
        }
    }
    loss.kl = kl_sum / n_tokens_total;

    const auto segments = segment_bounds(frames, tokens);
    if (config.lambda_consistency > 0.0) {
        double sum = 0.0;
        for (Eigen::Index b = 0; b < b_count; ++b) {
            for (int k = 0; k < tokens; ++k) {
                const Segment& s = segments[static_cast<std::size_t>(k)];
                const Eigen::Index mid = s.begin + (s.size() - 1) / 2;
                const auto r = (enc.means.row(b * tokens + k) -
                                states[static_cast<std::size_t>(mid)].row(b))
                                   .template cast<double>();
                sum += r.squaredNorm();
            }
        }
        loss.consistency = sum / n_tokens_total;
    }
    loss.total = config.lambda_recon * loss.recon + config.lambda_kl * loss.kl +
                 config.lambda_consistency * loss.consistency;

    if (!compute_gradients) return loss;

    const MatS d_recon = diff * static_cast<Scalar>(2.0 * config.lambda_recon / n_values);
    const MatS d_latent = model.decoder.backward(dec_cache, d_recon);
    std::vector<MatS> d_states(static_cast<std::size_t>(frames), MatS(b_count, d));
    for (Eigen::Index b = 0; b < b_count; ++b) {
        for (Eigen::Index i = 0; i < frames; ++i) {
            d_states[static_cast<std::size_t>(i)].row(b) = d_latent.row(b * frames + i);
        }
    }

    const Scalar kl_scale = static_cast<Scalar>(config.lambda_kl / n_tokens_total);
    MatS d_means = enc.means * kl_scale;
    MatS d_log_vars =
        ((enc.log_vars.array().exp() - Scalar(1)) * (Scalar(0.5) * kl_scale)).matrix();

    if (config.lambda_consistency > 0.0) {
        const Scalar c_scale = static_cast<Scalar>(2.0 * config.lambda_consistency / n_tokens_total);
        for (Eigen::Index b = 0; b < b_count; ++b) {
            for (int k = 0; k < tokens; ++k) {
                const Segment& s = segments[static_cast<std::size_t>(k)];
                const Eigen::Index mid = s.begin + (s.size() - 1) / 2;
                const auto r = (enc.means.row(b * tokens + k) -
                                states[static_cast<std::size_t>(mid)].row(b))
                                   .eval();
                d_means.row(b * tokens + k) += c_scale * r;
                d_states[static_cast<std::size_t>(mid)].row(b) -= c_scale * r;
            }
        }
    }

    const MatS dz0 = Solver::backward(model.field, tape, d_states);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        d_means.row(b * tokens) += dz0.row(b);
        if (config.sample_initial_state) {
            for (int j = 0; j < d; ++j) {
                d_log_vars(b * tokens, j) +=
                    dz0(b, j) * eps(b, j) * Scalar(0.5) * std::exp(lv0(b, j) / Scalar(2));
            }
        }
    }
    model.encoder.backward(enc_cache, d_means, d_log_vars);
    return loss;
}

template <typename Scalar>
AdamOptimizer<Scalar>::AdamOptimizer(nn::ParameterList<Scalar> parameters,
                                     const TrainConfig& config)
    : params_(std::move(parameters)),
      learning_rate_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      epsilon_(config.adam_epsilon),
      weight_decay_(config.weight_decay) {
    for (auto* p : params_) {
        m_.push_back(nn::Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(nn::Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
}

template <typename Scalar>
void AdamOptimizer<Scalar>::step() {
    ++step_;
    const Scalar b1 = static_cast<Scalar>(beta1_);
    const Scalar b2 = static_cast<Scalar>(beta2_);
    const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(beta1_, static_cast<double>(step_)));
    const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(beta2_, static_cast<double>(step_)));
    const Scalar lr = static_cast<Scalar>(learning_rate_);
    const Scalar eps = static_cast<Scalar>(epsilon_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        nn::Mat<Scalar> g = p.grad;
        if (weight_decay_ > 0.0) g += static_cast<Scalar>(weight_decay_) * p.value;
        m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
        v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseAbs2();
        const auto m_hat = (m_[i].array() / correction1).eval();
        const auto v_hat = (v_[i].array() / correction2).eval();
        p.value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

template <typename Scalar>
double gradient_norm(const nn::ParameterList<Scalar>& params) {
    double sum = 0.0;
    for (const auto* p : params) sum += p->grad.template cast<double>().squaredNorm();
    return std::sqrt(sum);
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
    return seed * 1000003ULL + static_cast<std::uint64_t>(fold);
}

template <typename Scalar>
std::vector<nn::Mat<Scalar>> to_precision(std::span<const MotionMatrix> trials) {
    std::vector<nn::Mat<Scalar>> out;
    out.reserve(trials.size());
    for (const auto& t : trials) out.push_back(t.template cast<Scalar>());
    return out;
}

template <typename Scalar>
FoldResult<Scalar> train_fold(const MotionDataset& dataset, const FoldAssignment& folds, int fold,
                              const TrainConfig& train_config, const ModelConfig& model_config,
                              const EpochCallback& on_epoch) {
    train_config.validate();
    model_config.validate();
    if (fold < 0 || fold >= folds.n_folds) {
        throw ConfigurationError("fold " + std::to_string(fold) + " is out of range");
    }
    if (folds.fold_of_trial.size() != dataset.size()) {
        throw ConfigurationError("fold assignment does not match the dataset size");
    }
    const auto train_idx = folds.train_indices(fold);
    if (train_idx.empty()) throw ConfigurationError("fold has no training trials");

    FoldResult<Scalar> result;
    TrainedModel<Scalar>& trained = result.trained;
    trained.stats = fit_stats(dataset, train_idx);
    trained.train_config = train_config;
    trained.fold = fold;
    trained.participant_id = dataset.participant_id;

    std::vector<nn::Mat<Scalar>> train_trials;
    train_trials.reserve(train_idx.size());
    for (std::size_t i : train_idx) {
        train_trials.push_back(standardize(dataset.trials[i], trained.stats).template cast<Scalar>());
    }

    const std::uint64_t seed = fold_seed(train_config.seed, fold);
    trained.model = LatentOdeModel<Scalar>(model_config);
    trained.model.initialize(seed);
    auto params = trained.model.parameters();
    AdamOptimizer<Scalar> optimizer(params, train_config);
    Rng rng = make_rng(seed, 0x7a1);
    Rng dropout_rng = make_rng(seed, 0xd80);

    std::vector<std::size_t> order(train_trials.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;
    double lr = train_config.learning_rate;

    for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        shuffle(order, rng);
        EpochRecord record;
        record.epoch = epoch;
        std::size_t seen = 0;
        int step = 0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(train_config.batch_size), ++step) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(train_config.batch_size));
            std::vector<nn::Mat<Scalar>> batch;
            batch.reserve(end - begin);
            for (std::size_t j = begin; j < end; ++j) batch.push_back(train_trials[order[j]]);

            trained.model.zero_grad();
            LossComponents loss;
            try {
                loss = total_loss<Scalar>(trained.model, batch, train_config, rng, true, &dropout_rng);
            } catch (const Error& e) {
                throw DivergenceError(epoch, step,
                                      "training diverged at epoch " + std::to_string(epoch) +
                                          ", step " + std::to_string(step) + ": " + e.what());
            }
            if (!std::isfinite(loss.total)) {
                throw DivergenceError(epoch, step,
                                      "non-finite loss at epoch " + std::to_string(epoch) +
                                          ", step " + std::to_string(step));
            }
            if (train_config.grad_clip_norm > 0.0) {
                const double norm = gradient_norm(params);
                if (norm > train_config.grad_clip_norm) {
                    const Scalar factor = static_cast<Scalar>(train_config.grad_clip_norm / norm);
                    for (auto* p : params) p->grad *= factor;
                }
            }
            optimizer.step();

            const double weight = static_cast<double>(end - begin);
            record.total += loss.total * weight;
            record.recon += loss.recon * weight;
            record.kl += loss.kl * weight;
            seen += end - begin;
        }
        record.total /= static_cast<double>(seen);
        record.recon /= static_cast<double>(seen);
        record.kl /= static_cast<double>(seen);
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.epochs.push_back(record);
        if (on_epoch) on_epoch(record);

        if (train_config.lr_decay != 1.0) {
            lr *= train_config.lr_decay;
            optimizer.set_learning_rate(lr);
        }
        if (train_config.early_stopping_patience > 0) {
            if (record.total < best_loss - train_config.early_stopping_min_delta) {
                best_loss = record.total;
                stale_epochs = 0;
            } else if (++stale_epochs >= train_config.early_stopping_patience) {
                break;
            }
        }
    }
    return result;
}

template double recon_loss<float>(const nn::Mat<float>&, const nn::Mat<float>&);
template double recon_loss<double>(const nn::Mat<double>&, const nn::Mat<double>&);
template double kl_loss<float>(std::span<const GaussianToken<float>>);
template double kl_loss<double>(std::span<const GaussianToken<double>>);
template LossComponents total_loss<float>(LatentOdeModel<float>&, std::span<const nn::Mat<float>>,
                                          const TrainConfig&, Rng&, bool, Rng*);
template LossComponents total_loss<double>(LatentOdeModel<double>&,
                                           std::span<const nn::Mat<double>>, const TrainConfig&,
                                           Rng&, bool, Rng*);
template class AdamOptimizer<float>;
template class AdamOptimizer<double>;
template double gradient_norm<float>(const nn::ParameterList<float>&);
template double gradient_norm<double>(const nn::ParameterList<double>&);
template std::vector<nn::Mat<float>> to_precision<float>(std::span<const MotionMatrix>);
template std::vector<nn::Mat<double>> to_precision<double>(std::span<const MotionMatrix>);
template FoldResult<float> train_fold<float>(const MotionDataset&, const FoldAssignment&, int,
                                             const TrainConfig&, const ModelConfig&,
                                             const EpochCallback&);
template FoldResult<double> train_fold<double>(const MotionDataset&, const FoldAssignment&, int,
                                               const TrainConfig&, const ModelConfig&,
                                               const EpochCallback&);

}  // namespace latentmotion
