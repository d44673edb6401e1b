#pragma once

#include "latentmotion/data_pipeline.hpp"
#include "latentmotion/training.hpp"

#include <span>
#include <string>
#include <vector>

namespace latentmotion {

/// Test-time output for one trial, in millimetres.
struct Prediction {
    std::string trial_id;
    MotionMatrix predicted;
    MotionMatrix truth;
    MotionMatrix latent_path;  // T x d
};

/// Encodes, takes the token-0 mean as z0, integrates, decodes and
/// unstandardizes. `x` is standardized with `stats`.
template <typename Scalar>
Prediction predict(const LatentOdeModel<Scalar>& model, const MotionMatrix& x,
                   const StandardizationStats& stats, std::string trial_id = {});

struct RmseResult {
    std::vector<double> per_frame;
    /// Empty unless the feature dimension is a multiple of 3.
    std::vector<double> per_joint;
    /// Raw sums for pooling across folds.
    std::vector<double> per_joint_sse;
    double per_joint_count = 0.0;
    double total_sse = 0.0;
    double total_count = 0.0;
    double overall() const;
};

RmseResult rmse_curve(std::span<const MotionMatrix> truth, std::span<const MotionMatrix> predicted);
RmseResult rmse_curve(std::span<const Prediction> predictions);

/// Per-frame, per-feature mean of the training trials.
MotionMatrix baseline_predict(std::span<const MotionMatrix> train_trials);

enum class R2Centering {
    /// SS_ori about the test-set per-frame mean.
    TestMean,
    /// SS_ori about a supplied reference mean (e.g. the training mean).
    Reference,
};

struct R2Curve {
    /// NaN where SS_ori(t) == 0.
    std::vector<double> values;
    std::vector<double> ss_res;
    std::vector<double> ss_ori;
    std::size_t undefined_count() const;
    /// Mean over defined frames t >= first_frame.
    double mean_from(std::size_t first_frame) const;
};

R2Curve r2_curve(std::span<const MotionMatrix> truth, std::span<const MotionMatrix> predicted,
                 R2Centering centering = R2Centering::TestMean,
                 const MotionMatrix* reference_mean = nullptr);
R2Curve r2_curve(std::span<const Prediction> predictions,
                 R2Centering centering = R2Centering::TestMean,
                 const MotionMatrix* reference_mean = nullptr);

/// First frame of the latter half, ceil(T / 2).
std::size_t latter_half_start(std::size_t frames);

struct EvalReport {
    int fold_id = 0;
    std::string participant_id;
    std::size_t n_test_trials = 0;
    std::vector<double> rmse_curve;
    std::vector<double> per_joint_rmse;
    std::vector<double> per_joint_sse;
    double per_joint_count = 0.0;
    double total_sse = 0.0;
    double total_count = 0.0;
    double rmse_overall = 0.0;
    std::vector<double> r2_curve;
    double mean_r2_full = 0.0;
    double mean_r2_latter_half = 0.0;
    std::size_t undefined_r2_frames = 0;
    std::vector<double> baseline_rmse_curve;
    double baseline_rmse_overall = 0.0;
    std::vector<double> baseline_r2_curve;
    double baseline_mean_r2_full = 0.0;
    double baseline_mean_r2_latter_half = 0.0;
    std::string r2_centering = "test_mean";
};

struct EvalOptions {
    R2Centering centering = R2Centering::TestMean;
};

/// Scores model predictions and the training-mean baseline on one test set.
EvalReport build_report(std::span<const Prediction> predictions,
                        std::span<const MotionMatrix> train_trials_mm, int fold_id,
                        const std::string& participant_id, const EvalOptions& options = {});

/// Predicts every trial in `indices` (dataset in mm, standardized internally).
template <typename Scalar>
std::vector<Prediction> predict_trials(const TrainedModel<Scalar>& trained,
                                       const MotionDataset& dataset,
                                       std::span<const std::size_t> indices);

/// Predicts the held-out fold and builds its report.
template <typename Scalar>
EvalReport evaluate_fold(const TrainedModel<Scalar>& trained, const MotionDataset& dataset,
                         const FoldAssignment& folds, const EvalOptions& options = {},
                         std::vector<Prediction>* predictions_out = nullptr);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

/// Population convention (divide by N).
MeanSd mean_sd(std::span<const double> values);

struct ParticipantSummary {
    std::string participant_id;
    std::size_t n_folds = 0;
    MeanSd mean_r2_full;
    MeanSd mean_r2_latter_half;
    MeanSd rmse;
    MeanSd baseline_rmse;
    MeanSd baseline_mean_r2_full;
    MeanSd baseline_mean_r2_latter_half;
    double pooled_rmse = 0.0;
    std::vector<double> per_joint_rmse;
    std::vector<MeanSd> rmse_curve;
    std::vector<MeanSd> r2_curve;
    std::vector<MeanSd> baseline_rmse_curve;
    std::vector<MeanSd> baseline_r2_curve;
    std::string sd_convention = "population";
};

ParticipantSummary summarize(std::span<const EvalReport> reports);

/// Latent identifiability diagnostic for synthetic data: R^2 of the best
/// affine map from estimated to true latent paths, averaged over true dims.
/// The latent space is only defined up to such a map.
double latent_recovery_r2(std::span<const MotionMatrix> estimated, std::span<const MotionMatrix> truth);

}  // namespace latentmotion
