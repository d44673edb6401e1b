#include "latentmotion/data_pipeline.hpp"

#include "latentmotion/errors.hpp"
#include "latentmotion/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace latentmotion {

JointSchema JointSchema::pitching_default() {
    JointSchema schema;
    schema.joint_names = {"head",       "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
                          "l_wrist",    "r_wrist",    "l_hip",      "r_hip",   "l_knee",
                          "r_knee",     "l_heel",     "r_heel",     "l_toe",   "r_toe"};
    schema.lead_knee = "l_knee";
    schema.throwing_wrist = "r_wrist";
    schema.vertical_axis = 2;
    return schema;
}

void JointSchema::validate() const {
    if (joint_names.size() != kJointCount) {
        throw ConfigurationError("joint schema must list exactly 15 joints, got " +
                                 std::to_string(joint_names.size()));
    }
    std::set<std::string> unique(joint_names.begin(), joint_names.end());
    if (unique.size() != joint_names.size()) {
        throw ConfigurationError("joint schema contains duplicate joint names");
    }
    if (!unique.contains(lead_knee)) {
        throw ConfigurationError("lead knee '" + lead_knee + "' is not in the joint schema");
    }
    if (!unique.contains(throwing_wrist)) {
        throw ConfigurationError("throwing wrist '" + throwing_wrist +
                                 "' is not in the joint schema");
    }
    if (vertical_axis < 0 || vertical_axis > 2) {
        throw ConfigurationError("vertical axis must be 0, 1 or 2");
    }
}

int JointSchema::joint_index(const std::string& name) const {
    const auto it = std::find(joint_names.begin(), joint_names.end(), name);
    if (it == joint_names.end()) {
        throw ConfigurationError("unknown joint '" + name + "'");
    }
    return static_cast<int>(it - joint_names.begin());
}

void RawTrial::validate() const {
    if (frames.rows() < 2) {
        throw InputTooShortError("trial " + trial_id + " has fewer than 2 frames");
    }
    if (frames.cols() != kFeatureDim) {
        throw ConfigurationError("trial " + trial_id + " has " + std::to_string(frames.cols()) +
                                 " columns, expected 45");
    }
    if (!(frame_rate > 0.0)) {
        throw ConfigurationError("trial " + trial_id + " has a non-positive frame rate");
    }
    if (!frames.allFinite()) {
        throw ConfigurationError("trial " + trial_id + " contains non-finite samples");
    }
}

void MotionDataset::validate() const {
    if (trials.size() != trial_ids.size()) {
        throw ConfigurationError("dataset trial ids and matrices differ in count");
    }
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].rows() != window_length() || trials[i].cols() != trials.front().cols()) {
            throw ConfigurationError("trial " + trial_ids[i] + " does not match the dataset shape");
        }
        if (!trials[i].allFinite()) {
            throw ConfigurationError("trial " + trial_ids[i] + " contains non-finite samples");
        }
    }
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_trial.size(); ++i) {
        if (fold_of_trial[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_trial.size(); ++i) {
        if (fold_of_trial[i] != fold) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd compute_speed(const MotionMatrix& series, double frame_rate) {
    const Eigen::Index n = series.rows();
    if (n < 3) {
        throw InputTooShortError("speed estimation needs at least 3 frames");
    }
    const double dt = 1.0 / frame_rate;
    MotionMatrix velocity(n, series.cols());
    velocity.row(0) = (series.row(1) - series.row(0)) / dt;
    for (Eigen::Index t = 1; t + 1 < n; ++t) {
        velocity.row(t) = (series.row(t + 1) - series.row(t - 1)) / (2.0 * dt);
    }
    velocity.row(n - 1) = (series.row(n - 1) - series.row(n - 2)) / dt;
    return velocity.rowwise().norm();
}

Eigen::VectorXd compute_velocity(const Eigen::VectorXd& series, double frame_rate) {
    const Eigen::Index n = series.size();
    if (n < 3) {
        throw InputTooShortError("velocity estimation needs at least 3 frames");
    }
    const double dt = 1.0 / frame_rate;
    Eigen::VectorXd velocity(n);
    velocity(0) = (series(1) - series(0)) / dt;
    for (Eigen::Index t = 1; t + 1 < n; ++t) {
        velocity(t) = (series(t + 1) - series(t - 1)) / (2.0 * dt);
    }
    velocity(n - 1) = (series(n - 1) - series(n - 2)) / dt;
    return velocity;
}

Eigen::VectorXd moving_average(const Eigen::VectorXd& values, int window) {
    if (window <= 1) return values;
    const Eigen::Index n = values.size();
    const Eigen::Index half = window / 2;
    Eigen::VectorXd out(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + half);
        double sum = 0.0;
        for (Eigen::Index i = lo; i <= hi; ++i) sum += values(i);
        out(t) = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

TrialEvents onset_from_velocity(const Eigen::VectorXd& upward_velocity, Eigen::Index peak_frame,
                                double fraction) {
    if (peak_frame < 0 || peak_frame >= upward_velocity.size()) {
        throw EventDetectionError("height peak frame is outside the velocity profile");
    }
    double v_max = -std::numeric_limits<double>::infinity();
    Eigen::Index v_peak = 0;
    for (Eigen::Index t = 0; t <= peak_frame; ++t) {
        if (upward_velocity(t) >= v_max) {
            v_max = upward_velocity(t);
            v_peak = t;
        }
    }
    if (!(v_max > 0.0)) {
        throw EventDetectionError("no positive upward velocity before the height peak");
    }
    const double threshold = fraction * v_max;

    TrialEvents events;
    events.max_knee_height_frame = peak_frame;
    for (Eigen::Index t = v_peak; t >= 0; --t) {
        if (upward_velocity(t) < threshold) {
            events.onset_frame = t;
            return events;
        }
    }
    events.onset_frame = 0;
    events.onset_warning = true;
    return events;
}

TrialEvents detect_onset(const Eigen::VectorXd& knee_vertical, double frame_rate,
                         const EventOptions& options) {
    if (knee_vertical.size() < 3) {
        throw InputTooShortError("onset detection needs at least 3 frames");
    }
    Eigen::Index peak = 0;
    knee_vertical.maxCoeff(&peak);  // first occurrence
    const Eigen::VectorXd velocity =
        moving_average(compute_velocity(knee_vertical, frame_rate), options.smoothing_window);
    return onset_from_velocity(velocity, peak, options.onset_fraction);
}

Eigen::Index first_interior_argmax(const Eigen::VectorXd& values) {
    if (values.size() < 3) {
        throw InputTooShortError("argmax over interior frames needs at least 3 frames");
    }
    Eigen::Index best = 1;
    for (Eigen::Index t = 2; t + 1 < values.size(); ++t) {
        if (values(t) > values(best)) best = t;
    }
    return best;
}

Eigen::Index detect_release(const MotionMatrix& wrist, double frame_rate,
                            const EventOptions& options) {
    const Eigen::VectorXd speed =
        moving_average(compute_speed(wrist, frame_rate), options.smoothing_window);
    if (!(speed.maxCoeff() > 0.0)) {
        throw EventDetectionError("wrist speed is zero everywhere");
    }
    return first_interior_argmax(speed);
}

TrialEvents detect_events(const RawTrial& trial, const JointSchema& schema,
                          const EventOptions& options) {
    trial.validate();
    const int knee = schema.joint_index(schema.lead_knee);
    const int wrist = schema.joint_index(schema.throwing_wrist);
    const Eigen::VectorXd knee_vertical = trial.frames.col(3 * knee + schema.vertical_axis);
    TrialEvents events = detect_onset(knee_vertical, trial.frame_rate, options);
    const MotionMatrix wrist_xyz = trial.frames.middleCols(3 * wrist, 3);
    events.release_frame = detect_release(wrist_xyz, trial.frame_rate, options);
    if (!(events.onset_frame <= events.max_knee_height_frame &&
          events.max_knee_height_frame < events.release_frame &&
          events.release_frame < trial.frames.rows())) {
        throw EventDetectionError(
            "trial " + trial.trial_id + ": inconsistent events (onset " +
            std::to_string(events.onset_frame) + ", knee peak " +
            std::to_string(events.max_knee_height_frame) + ", release " +
            std::to_string(events.release_frame) + ")");
    }
    return events;
}

MotionDataset align_and_window(std::span<const RawTrial> raw_trials,
                               std::span<const TrialEvents> events,
                               const JointSchema& schema, std::string participant_id) {
    if (raw_trials.size() != events.size()) {
        throw ContractError("align_and_window: trial and event counts differ");
    }
    if (raw_trials.empty()) {
        throw ContractError("align_and_window: no trials");
    }
    Eigen::Index window = 0;
    for (std::size_t i = 0; i < raw_trials.size(); ++i) {
        if (events[i].onset_frame >= events[i].release_frame) {
            throw WindowingError(raw_trials[i].trial_id,
                                 "trial " + raw_trials[i].trial_id + ": onset is not before release");
        }
        window = std::max(window, events[i].release_frame - events[i].onset_frame + 1);
    }

    MotionDataset dataset;
    dataset.participant_id = std::move(participant_id);
    dataset.joint_schema = schema;
    dataset.frame_rate = raw_trials.front().frame_rate;
    for (std::size_t i = 0; i < raw_trials.size(); ++i) {
        const RawTrial& trial = raw_trials[i];
        const Eigen::Index onset = events[i].onset_frame;
        if (onset + window > trial.frames.rows()) {
            throw WindowingError(trial.trial_id,
                                 "trial " + trial.trial_id + " has " +
                                     std::to_string(trial.frames.rows()) + " frames, window needs " +
                                     std::to_string(onset + window));
        }
        dataset.trial_ids.push_back(trial.trial_id);
        dataset.trials.push_back(trial.frames.middleRows(onset, window));
    }
    return dataset;
}

// ---------------------------------------------------------------------------

StandardizationStats fit_stats(std::span<const MotionMatrix> train_trials) {
    if (train_trials.empty()) {
        throw ContractError("fit_stats: no training trials");
    }
    const Eigen::Index dim = train_trials.front().cols();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    double count = 0.0;
    for (const auto& trial : train_trials) {
        if (trial.cols() != dim) throw ContractError("fit_stats: feature dimension mismatch");
        sum += trial.colwise().sum().transpose();
        count += static_cast<double>(trial.rows());
    }
    StandardizationStats stats;
    stats.mean = sum / count;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
    for (const auto& trial : train_trials) {
        sq += (trial.rowwise() - stats.mean.transpose()).array().square().colwise().sum().matrix().transpose();
    }
    stats.std = (sq / count).cwiseSqrt();
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double scale = std::max(1.0, std::abs(stats.mean(j)));
        if (!(stats.std(j) > 1e-12 * scale)) {
            throw DegenerateFeatureError(static_cast<std::size_t>(j),
                                         "feature " + std::to_string(j) + " has zero variance");
        }
    }
    return stats;
}

StandardizationStats fit_stats(const MotionDataset& dataset, std::span<const std::size_t> indices) {
    std::vector<MotionMatrix> subset;
    subset.reserve(indices.size());
    for (std::size_t i : indices) subset.push_back(dataset.trials.at(i));
    return fit_stats(subset);
}

MotionMatrix standardize(const MotionMatrix& trial, const StandardizationStats& stats) {
    MotionMatrix out = trial.rowwise() - stats.mean.transpose();
    out.array().rowwise() /= stats.std.transpose().array();
    return out;
}

MotionMatrix unstandardize(const MotionMatrix& trial, const StandardizationStats& stats) {
    MotionMatrix out = trial;
    out.array().rowwise() *= stats.std.transpose().array();
    out.rowwise() += stats.mean.transpose();
    return out;
}

MotionDataset standardize(const MotionDataset& dataset, const StandardizationStats& stats) {
    MotionDataset out = dataset;
    for (auto& trial : out.trials) trial = standardize(trial, stats);
    out.units = "standardized";
    return out;
}

MotionDataset unstandardize(const MotionDataset& dataset, const StandardizationStats& stats) {
    MotionDataset out = dataset;
    for (auto& trial : out.trials) trial = unstandardize(trial, stats);
    out.units = "mm";
    return out;
}

FoldAssignment make_folds(std::size_t n_trials, int n_folds, std::uint64_t seed) {
    if (n_folds < 1) {
        throw ConfigurationError("n_folds must be at least 1");
    }
    if (n_trials < static_cast<std::size_t>(n_folds)) {
        throw ConfigurationError("cannot split " + std::to_string(n_trials) + " trials into " +
                                 std::to_string(n_folds) + " folds");
    }
    std::vector<std::size_t> order(n_trials);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 0xf01d);
    shuffle(order, rng);

    FoldAssignment folds;
    folds.n_folds = n_folds;
    folds.seed = seed;
    folds.fold_of_trial.assign(n_trials, 0);
    for (std::size_t pos = 0; pos < n_trials; ++pos) {
        folds.fold_of_trial[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(n_folds));
    }
    return folds;
}

}  // namespace latentmotion
