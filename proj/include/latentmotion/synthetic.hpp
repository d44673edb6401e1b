#pragma once

#include "latentmotion/data_pipeline.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace latentmotion {

enum class DynamicsFamily { Linear, Pendulum };

enum class ObservationMap {
    /// Fixed Gaussian 45x3 map and offset drawn from a constant seed.
    Random,
    /// Identity blocks stacked 15 times, zero offset.
    IdentityBlock,
};

struct SynthConfig {
    std::size_t n_trials = 200;
    Eigen::Index n_frames = 100;
    int latent_dim = 3;
    double noise_std = 0.02;
    DynamicsFamily family = DynamicsFamily::Linear;
    ObservationMap observation = ObservationMap::Random;
    /// Physical duration covered by the frames; frames are spaced duration/(T-1).
    double duration = 1.0;
    /// Reference RK4 substeps per frame interval.
    int substeps = 20;
    double initial_std = 1.0;
    /// System matrix of the linear family. Empty selects the default lightly
    /// damped rotation.
    Eigen::MatrixXd linear_matrix;
    std::string participant_id = "synthetic";
    double frame_rate = 200.0;

    static Eigen::MatrixXd default_linear_matrix();
    void validate() const;
};

struct SynthGroundTruth {
    std::vector<MotionMatrix> latent_paths;  // T x d per trial
    Eigen::MatrixXd observation_matrix;      // 45 x d
    Eigen::VectorXd observation_offset;      // 45
    Eigen::MatrixXd linear_matrix;           // empty for the pendulum family
    DynamicsFamily family = DynamicsFamily::Linear;
    double duration = 1.0;
};

struct SynthResult {
    MotionDataset dataset;
    SynthGroundTruth truth;
};

/// Right-hand side of the generating system.
Eigen::VectorXd synth_vector_field(const SynthConfig& config, const Eigen::VectorXd& z);

/// Fine-step RK4 reference trajectory sampled at `n_frames` uniform points.
MotionMatrix synth_reference_path(const SynthConfig& config, const Eigen::VectorXd& z0);

SynthResult synth_generate(const SynthConfig& config, std::uint64_t seed);

std::string to_string(DynamicsFamily family);
DynamicsFamily dynamics_family_from_string(const std::string& name);
std::string to_string(ObservationMap map);
ObservationMap observation_map_from_string(const std::string& name);

}  // namespace latentmotion
