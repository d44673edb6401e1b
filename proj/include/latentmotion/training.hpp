#pragma once

#include "latentmotion/data_pipeline.hpp"
#include "latentmotion/model.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace latentmotion {

enum class Precision { Float32, Float64 };

std::string to_string(Precision precision);
Precision precision_from_string(const std::string& name);

struct TrainConfig {
    double lambda_recon = 1.0;
    double lambda_kl = 1e-3;
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 1500;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    /// Reparameterized draw of z0 during training; false trains on the mean.
    bool sample_initial_state = true;

    // Off by default.
    /// Extension: penalizes ||token k mean - path at segment k midpoint||^2.
    double lambda_consistency = 0.0;
    /// Multiplicative learning-rate decay applied after every epoch.
    double lr_decay = 1.0;
    double weight_decay = 0.0;
    /// Global gradient-norm clip; 0 disables.
    double grad_clip_norm = 0.0;
    /// Stop after this many epochs without training-loss improvement; 0 disables.
    int early_stopping_patience = 0;
    double early_stopping_min_delta = 0.0;

    Precision precision = Precision::Float32;

    void validate() const;
};

struct LossComponents {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
    double consistency = 0.0;
};

/// Mean squared error over all frames and features.
template <typename Scalar>
double recon_loss(const nn::Mat<Scalar>& predicted, const nn::Mat<Scalar>& truth);

/// KL(N(mu, diag sigma^2) || N(0, I)) summed over dims, averaged over tokens.
template <typename Scalar>
double kl_loss(std::span<const GaussianToken<Scalar>> tokens);

/// Encode, draw z0, integrate, decode, and score one batch of standardized
/// trials (uniform length). When `compute_gradients` is set the parameter
/// gradients of the total are accumulated into the model.
template <typename Scalar>
LossComponents total_loss(LatentOdeModel<Scalar>& model, std::span<const nn::Mat<Scalar>> batch,
                          const TrainConfig& config, Rng& rng, bool compute_gradients,
                          Rng* dropout_rng = nullptr);

template <typename Scalar>
class AdamOptimizer {
public:
    AdamOptimizer(nn::ParameterList<Scalar> parameters, const TrainConfig& config);

    void step();
    void set_learning_rate(double lr) { learning_rate_ = lr; }
    double learning_rate() const { return learning_rate_; }
    long steps_taken() const { return step_; }

private:
    nn::ParameterList<Scalar> params_;
    std::vector<nn::Mat<Scalar>> m_;
    std::vector<nn::Mat<Scalar>> v_;
    double learning_rate_;
    double beta1_, beta2_, epsilon_, weight_decay_;
    long step_ = 0;
};

/// Global L2 norm of all gradients.
template <typename Scalar>
double gradient_norm(const nn::ParameterList<Scalar>& params);

struct EpochRecord {
    int epoch = 0;
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

template <typename Scalar>
struct TrainedModel {
    LatentOdeModel<Scalar> model;
    StandardizationStats stats;
    TrainConfig train_config;
    int fold = 0;
    std::string participant_id;
};

template <typename Scalar>
struct FoldResult {
    TrainedModel<Scalar> trained;
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Seed actually used for fold `fold` of a run with base seed `seed`.
std::uint64_t fold_seed(std::uint64_t seed, int fold);

/// Fits standardization on the training folds, then optimizes with Adam on
/// shuffled mini-batches. `dataset` is in millimetres.
template <typename Scalar>
FoldResult<Scalar> train_fold(const MotionDataset& dataset, const FoldAssignment& folds, int fold,
                              const TrainConfig& train_config, const ModelConfig& model_config,
                              const EpochCallback& on_epoch = {});

/// Converts standardized double trials into the training precision.
template <typename Scalar>
std::vector<nn::Mat<Scalar>> to_precision(std::span<const MotionMatrix> trials);

}  // namespace latentmotion
