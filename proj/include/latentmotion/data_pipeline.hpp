#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace latentmotion {

/// Frames along rows, features along columns. Position data is in millimetres.
using MotionMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kJointCount = 15;
inline constexpr int kFeatureDim = kJointCount * 3;

struct JointSchema {
    std::vector<std::string> joint_names;
    std::string lead_knee;
    std::string throwing_wrist;
    int vertical_axis = 2;

    /// Head, shoulders, elbows, wrists, hips, knees, heels, toes; left knee
    /// leads and the right wrist throws (right-handed pitcher), z up.
    static JointSchema pitching_default();

    /// Throws ConfigurationError when the schema is malformed.
    void validate() const;
    int joint_index(const std::string& name) const;
    int feature_dim() const { return static_cast<int>(joint_names.size()) * 3; }
};

struct RawTrial {
    std::string trial_id;
    MotionMatrix frames;
    double frame_rate = 200.0;

    void validate() const;
};

struct TrialEvents {
    Eigen::Index max_knee_height_frame = 0;
    Eigen::Index onset_frame = 0;
    Eigen::Index release_frame = 0;
    /// Set when the onset scan reached frame 0 without crossing the threshold.
    bool onset_warning = false;
};

struct MotionDataset {
    std::vector<std::string> trial_ids;
    std::vector<MotionMatrix> trials;
    std::string participant_id;
    JointSchema joint_schema = JointSchema::pitching_default();
    double frame_rate = 200.0;
    std::string units = "mm";

    std::size_t size() const { return trials.size(); }
    Eigen::Index window_length() const { return trials.empty() ? 0 : trials.front().rows(); }
    void validate() const;
};

struct StandardizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

struct FoldAssignment {
    int n_folds = 10;
    std::vector<int> fold_of_trial;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

struct EventOptions {
    /// Centered moving-average window applied to velocities; 1 disables it.
    int smoothing_window = 5;
    double onset_fraction = 0.05;
};

// ---------------------------------------------------------------------------
// Kinematics and event detection

/// Per-frame speed (norm of the finite-difference velocity) of a T x k series.
Eigen::VectorXd compute_speed(const MotionMatrix& series, double frame_rate);

/// Per-frame signed velocity of a scalar series.
Eigen::VectorXd compute_velocity(const Eigen::VectorXd& series, double frame_rate);

/// Centered moving average with the window truncated at the ends.
Eigen::VectorXd moving_average(const Eigen::VectorXd& values, int window);

/// Onset scan on a precomputed upward-velocity profile. The threshold is
/// `fraction` times the peak upward velocity over [0, peak_frame]; the scan
/// starts at the last frame attaining that peak and walks backward to the
/// first frame with velocity strictly below the threshold.
TrialEvents onset_from_velocity(const Eigen::VectorXd& upward_velocity, Eigen::Index peak_frame,
                                double fraction = 0.05);

/// Fills max_knee_height_frame, onset_frame and onset_warning.
TrialEvents detect_onset(const Eigen::VectorXd& knee_vertical, double frame_rate,
                         const EventOptions& options = {});

/// First maximum over interior frames.
Eigen::Index first_interior_argmax(const Eigen::VectorXd& values);

Eigen::Index detect_release(const MotionMatrix& wrist, double frame_rate,
                            const EventOptions& options = {});

TrialEvents detect_events(const RawTrial& trial, const JointSchema& schema,
                          const EventOptions& options = {});

MotionDataset align_and_window(std::span<const RawTrial> raw_trials,
                               std::span<const TrialEvents> events,
                               const JointSchema& schema, std::string participant_id);

// ---------------------------------------------------------------------------
// Standardization and folds

StandardizationStats fit_stats(std::span<const MotionMatrix> train_trials);
StandardizationStats fit_stats(const MotionDataset& dataset, std::span<const std::size_t> indices);
MotionMatrix standardize(const MotionMatrix& trial, const StandardizationStats& stats);
MotionMatrix unstandardize(const MotionMatrix& trial, const StandardizationStats& stats);
MotionDataset standardize(const MotionDataset& dataset, const StandardizationStats& stats);
MotionDataset unstandardize(const MotionDataset& dataset, const StandardizationStats& stats);

FoldAssignment make_folds(std::size_t n_trials, int n_folds = 10, std::uint64_t seed = 0);

}  // namespace latentmotion
