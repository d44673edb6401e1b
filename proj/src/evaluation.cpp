#include "latentmotion/evaluation.hpp"

#include "latentmotion/errors.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace latentmotion {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pairs(std::span<const MotionMatrix> truth, std::span<const MotionMatrix> predicted,
                 const char* what) {
    if (truth.empty()) throw ContractError(std::string(what) + ": empty prediction set");
    if (truth.size() != predicted.size()) {
        throw ContractError(std::string(what) + ": truth and prediction counts differ");
    }
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (truth[n].rows() != truth[0].rows() || truth[n].cols() != truth[0].cols() ||
            predicted[n].rows() != truth[0].rows() || predicted[n].cols() != truth[0].cols()) {
            throw ContractError(std::string(what) + ": shape mismatch");
        }
    }
}

void split(std::span<const Prediction> predictions, std::vector<MotionMatrix>& truth,
           std::vector<MotionMatrix>& predicted) {
    truth.reserve(predictions.size());
    predicted.reserve(predictions.size());
    for (const auto& p : predictions) {
        truth.push_back(p.truth);
        predicted.push_back(p.predicted);
    }
}

}  // namespace

template <typename Scalar>
Prediction predict(const LatentOdeModel<Scalar>& model, const MotionMatrix& x,
                   const StandardizationStats& stats, std::string trial_id) {
    const nn::Mat<Scalar> input = x.template cast<Scalar>();
    const auto tokens = model.encoder.encode(input);
    const LatentPath<Scalar> path =
        integrate<Scalar>(tokens.front().mean, TimeGrid::uniform(x.rows()), model.field);
    const nn::Mat<Scalar> decoded = model.decoder.decode(path.states);

    Prediction out;
    out.trial_id = std::move(trial_id);
    out.predicted = unstandardize(decoded.template cast<double>(), stats);
    out.truth = unstandardize(x, stats);
    out.latent_path = path.states.template cast<double>();
    return out;
}

double RmseResult::overall() const {
    return total_count > 0.0 ? std::sqrt(total_sse / total_count) : kNaN;
}

RmseResult rmse_curve(std::span<const MotionMatrix> truth, std::span<const MotionMatrix> predicted) {
    check_pairs(truth, predicted, "rmse_curve");
    const Eigen::Index frames = truth[0].rows();
    const Eigen::Index dim = truth[0].cols();
    const double n_trials = static_cast<double>(truth.size());
    RmseResult out;
    out.per_frame.resize(static_cast<std::size_t>(frames));
    for (Eigen::Index t = 0; t < frames; ++t) {
        double sse = 0.0;
        for (std::size_t n = 0; n < truth.size(); ++n) {
            for (Eigen::Index f = 0; f < dim; ++f) {
                const double e = truth[n](t, f) - predicted[n](t, f);
                sse += e * e;
            }
        }
        out.per_frame[static_cast<std::size_t>(t)] = std::sqrt(sse / (n_trials * static_cast<double>(dim)));
        out.total_sse += sse;
    }
    out.total_count = n_trials * static_cast<double>(frames * dim);

    if (dim % 3 == 0) {
        const Eigen::Index joints = dim / 3;
        out.per_joint_sse.assign(static_cast<std::size_t>(joints), 0.0);
        out.per_joint.resize(static_cast<std::size_t>(joints));
        out.per_joint_count = n_trials * static_cast<double>(frames) * 3.0;
        for (Eigen::Index j = 0; j < joints; ++j) {
            double sse = 0.0;
            for (std::size_t n = 0; n < truth.size(); ++n) {
                for (Eigen::Index t = 0; t < frames; ++t) {
                    for (Eigen::Index c = 0; c < 3; ++c) {
                        const double e = truth[n](t, 3 * j + c) - predicted[n](t, 3 * j + c);
                        sse += e * e;
                    }
                }
            }
            out.per_joint_sse[static_cast<std::size_t>(j)] = sse;
            out.per_joint[static_cast<std::size_t>(j)] = std::sqrt(sse / out.per_joint_count);
        }
    }
    return out;
}

RmseResult rmse_curve(std::span<const Prediction> predictions) {
    std::vector<MotionMatrix> truth, predicted;
    split(predictions, truth, predicted);
    return rmse_curve(truth, predicted);
}

MotionMatrix baseline_predict(std::span<const MotionMatrix> train_trials) {
    if (train_trials.empty()) throw ContractError("baseline_predict: no training trials");
    MotionMatrix sum = MotionMatrix::Zero(train_trials[0].rows(), train_trials[0].cols());
    for (const auto& trial : train_trials) {
        if (trial.rows() != sum.rows() || trial.cols() != sum.cols()) {
            throw ContractError("baseline_predict: trials differ in shape");
        }
        sum += trial;
    }
    return sum / static_cast<double>(train_trials.size());
}

std::size_t R2Curve::undefined_count() const {
    std::size_t n = 0;
    for (double v : values) n += std::isnan(v) ? 1 : 0;
    return n;
}

double R2Curve::mean_from(std::size_t first_frame) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = first_frame; t < values.size(); ++t) {
        if (!std::isnan(values[t])) {
            sum += values[t];
            ++n;
        }
    }
    return n > 0 ? sum / static_cast<double>(n) : kNaN;
}

R2Curve r2_curve(std::span<const MotionMatrix> truth, std::span<const MotionMatrix> predicted,
                 R2Centering centering, const MotionMatrix* reference_mean) {
    check_pairs(truth, predicted, "r2_curve");
    if (centering == R2Centering::TestMean && truth.size() < 2) {
        throw ContractError("r2_curve: at least two test trials are required");
    }
    if (centering == R2Centering::Reference &&
        (reference_mean == nullptr || reference_mean->rows() != truth[0].rows() ||
         reference_mean->cols() != truth[0].cols())) {
        throw ContractError("r2_curve: reference centering needs a matching reference mean");
    }
    const Eigen::Index frames = truth[0].rows();
    const Eigen::Index dim = truth[0].cols();
    const double n_trials = static_cast<double>(truth.size());

    R2Curve out;
    out.values.resize(static_cast<std::size_t>(frames));
    out.ss_res.resize(static_cast<std::size_t>(frames));
    out.ss_ori.resize(static_cast<std::size_t>(frames));
    std::vector<double> centre(static_cast<std::size_t>(dim));
    for (Eigen::Index t = 0; t < frames; ++t) {
        for (Eigen::Index f = 0; f < dim; ++f) {
            if (centering == R2Centering::TestMean) {
                double sum = 0.0;
                for (std::size_t n = 0; n < truth.size(); ++n) sum += truth[n](t, f);
                centre[static_cast<std::size_t>(f)] = sum / n_trials;
            } else {
                centre[static_cast<std::size_t>(f)] = (*reference_mean)(t, f);
            }
        }
        double ss_ori = 0.0;
        double ss_res = 0.0;
        for (std::size_t n = 0; n < truth.size(); ++n) {
            for (Eigen::Index f = 0; f < dim; ++f) {
                const double dev = truth[n](t, f) - centre[static_cast<std::size_t>(f)];
                const double res = truth[n](t, f) - predicted[n](t, f);
                ss_ori += dev * dev;
                ss_res += res * res;
            }
        }
        const auto ti = static_cast<std::size_t>(t);
        out.ss_ori[ti] = ss_ori;
        out.ss_res[ti] = ss_res;
        out.values[ti] = ss_ori > 0.0 ? 1.0 - ss_res / ss_ori : kNaN;
    }
    return out;
}

R2Curve r2_curve(std::span<const Prediction> predictions, R2Centering centering,
                 const MotionMatrix* reference_mean) {
    std::vector<MotionMatrix> truth, predicted;
    split(predictions, truth, predicted);
    return r2_curve(truth, predicted, centering, reference_mean);
}

std::size_t latter_half_start(std::size_t frames) {
    return (frames + 1) / 2;
}

EvalReport build_report(std::span<const Prediction> predictions,
                        std::span<const MotionMatrix> train_trials_mm, int fold_id,
                        const std::string& participant_id, const EvalOptions& options) {
    std::vector<MotionMatrix> truth, predicted;
    split(predictions, truth, predicted);
    const MotionMatrix baseline = baseline_predict(train_trials_mm);
    const std::vector<MotionMatrix> baseline_pred(truth.size(), baseline);
    const MotionMatrix* reference = options.centering == R2Centering::Reference ? &baseline : nullptr;

    EvalReport report;
    report.fold_id = fold_id;
    report.participant_id = participant_id;
    report.n_test_trials = predictions.size();
    report.r2_centering = options.centering == R2Centering::TestMean ? "test_mean" : "train_mean";

    const RmseResult rmse = rmse_curve(truth, predicted);
    report.rmse_curve = rmse.per_frame;
    report.per_joint_rmse = rmse.per_joint;
    report.per_joint_sse = rmse.per_joint_sse;
    report.per_joint_count = rmse.per_joint_count;
    report.total_sse = rmse.total_sse;
    report.total_count = rmse.total_count;
    report.rmse_overall = rmse.overall();

    const R2Curve r2 = r2_curve(truth, predicted, options.centering, reference);
    const std::size_t half = latter_half_start(r2.values.size());
    report.r2_curve = r2.values;
    report.mean_r2_full = r2.mean_from(0);
    report.mean_r2_latter_half = r2.mean_from(half);
    report.undefined_r2_frames = r2.undefined_count();

    const RmseResult base_rmse = rmse_curve(truth, baseline_pred);
    report.baseline_rmse_curve = base_rmse.per_frame;
    report.baseline_rmse_overall = base_rmse.overall();
    const R2Curve base_r2 = r2_curve(truth, baseline_pred, options.centering, reference);
    report.baseline_r2_curve = base_r2.values;
    report.baseline_mean_r2_full = base_r2.mean_from(0);
    report.baseline_mean_r2_latter_half = base_r2.mean_from(half);
    return report;
}

template <typename Scalar>
std::vector<Prediction> predict_trials(const TrainedModel<Scalar>& trained,
                                       const MotionDataset& dataset,
                                       std::span<const std::size_t> indices) {
    std::vector<Prediction> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(predict(trained.model, standardize(dataset.trials.at(i), trained.stats),
                              trained.stats, dataset.trial_ids.at(i)));
    }
    return out;
}

template <typename Scalar>
EvalReport evaluate_fold(const TrainedModel<Scalar>& trained, const MotionDataset& dataset,
                         const FoldAssignment& folds, const EvalOptions& options,
                         std::vector<Prediction>* predictions_out) {
    const auto test_idx = folds.test_indices(trained.fold);
    const auto train_idx = folds.train_indices(trained.fold);
    std::vector<Prediction> predictions = predict_trials(trained, dataset, test_idx);
    std::vector<MotionMatrix> train_trials;
    train_trials.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_trials.push_back(dataset.trials[i]);
    EvalReport report =
        build_report(predictions, train_trials, trained.fold, dataset.participant_id, options);
    if (predictions_out != nullptr) *predictions_out = std::move(predictions);
    return report;
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd out;
    std::size_t n = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            out.mean += v;
            ++n;
        }
    }
    if (n == 0) return {kNaN, kNaN};
    out.mean /= static_cast<double>(n);
    double sq = 0.0;
    for (double v : values) {
        if (!std::isnan(v)) sq += (v - out.mean) * (v - out.mean);
    }
    out.sd = std::sqrt(sq / static_cast<double>(n));
    return out;
}

namespace {

std::vector<MeanSd> curve_stats(std::span<const EvalReport> reports,
                                std::vector<double> EvalReport::*member) {
    std::size_t len = 0;
    for (const auto& r : reports) len = std::max(len, (r.*member).size());
    std::vector<MeanSd> out(len);
    std::vector<double> column;
    for (std::size_t t = 0; t < len; ++t) {
        column.clear();
        for (const auto& r : reports) {
            if (t < (r.*member).size()) column.push_back((r.*member)[t]);
        }
        out[t] = mean_sd(column);
    }
    return out;
}

MeanSd scalar_stats(std::span<const EvalReport> reports, double EvalReport::*member) {
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.*member);
    return mean_sd(values);
}

}  // namespace

ParticipantSummary summarize(std::span<const EvalReport> reports) {
    if (reports.empty()) throw ContractError("summarize: no reports");
    ParticipantSummary s;
    s.participant_id = reports.front().participant_id;
    s.n_folds = reports.size();
    s.mean_r2_full = scalar_stats(reports, &EvalReport::mean_r2_full);
    s.mean_r2_latter_half = scalar_stats(reports, &EvalReport::mean_r2_latter_half);
    s.rmse = scalar_stats(reports, &EvalReport::rmse_overall);
    s.baseline_rmse = scalar_stats(reports, &EvalReport::baseline_rmse_overall);
    s.baseline_mean_r2_full = scalar_stats(reports, &EvalReport::baseline_mean_r2_full);
    s.baseline_mean_r2_latter_half =
        scalar_stats(reports, &EvalReport::baseline_mean_r2_latter_half);

    double sse = 0.0;
    double count = 0.0;
    for (const auto& r : reports) {
        sse += r.total_sse;
        count += r.total_count;
    }
    s.pooled_rmse = count > 0.0 ? std::sqrt(sse / count) : kNaN;

    const std::size_t joints = reports.front().per_joint_sse.size();
    if (joints > 0) {
        s.per_joint_rmse.resize(joints);
        for (std::size_t j = 0; j < joints; ++j) {
            double joint_sse = 0.0;
            double joint_count = 0.0;
            for (const auto& r : reports) {
                if (j < r.per_joint_sse.size()) {
                    joint_sse += r.per_joint_sse[j];
                    joint_count += r.per_joint_count;
                }
            }
            s.per_joint_rmse[j] = std::sqrt(joint_sse / joint_count);
        }
    }
    s.rmse_curve = curve_stats(reports, &EvalReport::rmse_curve);
    s.r2_curve = curve_stats(reports, &EvalReport::r2_curve);
    s.baseline_rmse_curve = curve_stats(reports, &EvalReport::baseline_rmse_curve);
    s.baseline_r2_curve = curve_stats(reports, &EvalReport::baseline_r2_curve);
    return s;
}

template Prediction predict<float>(const LatentOdeModel<float>&, const MotionMatrix&,
                                   const StandardizationStats&, std::string);
template Prediction predict<double>(const LatentOdeModel<double>&, const MotionMatrix&,
                                    const StandardizationStats&, std::string);
template std::vector<Prediction> predict_trials<float>(const TrainedModel<float>&,
                                                       const MotionDataset&,
                                                       std::span<const std::size_t>);
template std::vector<Prediction> predict_trials<double>(const TrainedModel<double>&,
                                                        const MotionDataset&,
                                                        std::span<const std::size_t>);
template EvalReport evaluate_fold<float>(const TrainedModel<float>&, const MotionDataset&,
                                         const FoldAssignment&, const EvalOptions&,
                                         std::vector<Prediction>*);
template EvalReport evaluate_fold<double>(const TrainedModel<double>&, const MotionDataset&,
                                          const FoldAssignment&, const EvalOptions&,
                                          std::vector<Prediction>*);

double latent_recovery_r2(std::span<const MotionMatrix> estimated, std::span<const MotionMatrix> truth) {
    if (estimated.size() != truth.size() || estimated.empty()) {
        throw ContractError("latent_recovery_r2 needs matching, non-empty path lists");
    }
    Eigen::Index rows = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (estimated[i].rows() != truth[i].rows()) throw ContractError("latent path lengths differ");
        rows += truth[i].rows();
    }
    const Eigen::Index d_est = estimated.front().cols();
    const Eigen::Index d_true = truth.front().cols();
    Eigen::MatrixXd x(rows, d_est + 1);
    Eigen::MatrixXd y(rows, d_true);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Eigen::Index n = truth[i].rows();
        x.block(r, 0, n, d_est) = estimated[i];
        x.block(r, d_est, n, 1).setOnes();
        y.middleRows(r, n) = truth[i];
        r += n;
    }
    const Eigen::MatrixXd coef = x.colPivHouseholderQr().solve(y);
    const Eigen::MatrixXd resid = y - x * coef;
    double total = 0.0;
    for (Eigen::Index c = 0; c < d_true; ++c) {
        const double ss_tot = (y.col(c).array() - y.col(c).mean()).square().sum();
        const double ss_res = resid.col(c).squaredNorm();
        total += ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    }
    return total / static_cast<double>(d_true);
}

}  // namespace latentmotion
