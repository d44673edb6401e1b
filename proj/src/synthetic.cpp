#include "latentmotion/synthetic.hpp"

#include "latentmotion/errors.hpp"
#include "latentmotion/random.hpp"

#include <cmath>
#include <cstdio>

namespace latentmotion {

namespace {

constexpr std::uint64_t kObservationSeed = 0x0b5e7a11u;

constexpr double kPendulumOmega = 4.0;
constexpr double kPendulumDamping = 0.3;
constexpr double kThirdAxisDecay = 0.5;
constexpr double kThirdAxisCoupling = 1.0;

std::string trial_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial_%04zu", index);
    return buf;
}

}  // namespace

Eigen::MatrixXd SynthConfig::default_linear_matrix() {
    Eigen::MatrixXd m(3, 3);
    m << -0.2, -4.0, 0.0,
          4.0, -0.2, 0.0,
          0.0,  0.0, -0.5;
    return m;
}

void SynthConfig::validate() const {
    if (n_trials < 1) throw ConfigurationError("synthetic config needs at least one trial");
    if (n_frames < 2) throw ConfigurationError("synthetic config needs at least two frames");
    if (latent_dim != 3) throw ConfigurationError("synthetic latent dimension must be 3");
    if (!(noise_std >= 0.0)) throw ConfigurationError("noise_std must be non-negative");
    if (!(duration > 0.0)) throw ConfigurationError("duration must be positive");
    if (substeps < 1) throw ConfigurationError("substeps must be at least 1");
    if (linear_matrix.size() != 0 &&
        (linear_matrix.rows() != latent_dim || linear_matrix.cols() != latent_dim)) {
        throw ConfigurationError("linear_matrix must be 3x3");
    }
}

Eigen::VectorXd synth_vector_field(const SynthConfig& config, const Eigen::VectorXd& z) {
    if (config.family == DynamicsFamily::Linear) {
        const Eigen::MatrixXd m = config.linear_matrix.size() != 0
                                      ? config.linear_matrix
                                      : SynthConfig::default_linear_matrix();
        return m * z;
    }
    Eigen::VectorXd dz(3);
    dz(0) = z(1);
    dz(1) = -kPendulumOmega * kPendulumOmega * std::sin(z(0)) - kPendulumDamping * z(1);
    dz(2) = -kThirdAxisDecay * z(2) + kThirdAxisCoupling * z(0);
    return dz;
}

MotionMatrix synth_reference_path(const SynthConfig& config, const Eigen::VectorXd& z0) {
    const Eigen::Index frames = config.n_frames;
    const double h = config.duration / static_cast<double>(frames - 1) / config.substeps;
    MotionMatrix path(frames, z0.size());
    Eigen::VectorXd z = z0;
    path.row(0) = z.transpose();
    for (Eigen::Index i = 1; i < frames; ++i) {
        for (int s = 0; s < config.substeps; ++s) {
            const Eigen::VectorXd k1 = synth_vector_field(config, z);
            const Eigen::VectorXd k2 = synth_vector_field(config, z + 0.5 * h * k1);
            const Eigen::VectorXd k3 = synth_vector_field(config, z + 0.5 * h * k2);
            const Eigen::VectorXd k4 = synth_vector_field(config, z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!z.allFinite()) {
            throw GenerationError("reference integration diverged at frame " + std::to_string(i));
        }
        path.row(i) = z.transpose();
    }
    return path;
}

SynthResult synth_generate(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    SynthResult result;
    SynthGroundTruth& truth = result.truth;
    truth.family = config.family;
    truth.duration = config.duration;
    if (config.family == DynamicsFamily::Linear) {
        truth.linear_matrix = config.linear_matrix.size() != 0 ? config.linear_matrix
                                                               : SynthConfig::default_linear_matrix();
    }

    const int d = config.latent_dim;
    truth.observation_matrix = Eigen::MatrixXd::Zero(kFeatureDim, d);
    truth.observation_offset = Eigen::VectorXd::Zero(kFeatureDim);
    if (config.observation == ObservationMap::IdentityBlock) {
        for (int j = 0; j < kJointCount; ++j) {
            truth.observation_matrix.block(3 * j, 0, 3, d) = Eigen::MatrixXd::Identity(3, d);
        }
    } else {
        Rng obs_rng = make_rng(kObservationSeed);
        for (int r = 0; r < kFeatureDim; ++r) {
            for (int c = 0; c < d; ++c) truth.observation_matrix(r, c) = standard_normal(obs_rng);
        }
        for (int r = 0; r < kFeatureDim; ++r) truth.observation_offset(r) = standard_normal(obs_rng);
    }

    Rng rng = make_rng(seed, 0x5e7);
    MotionDataset& dataset = result.dataset;
    dataset.participant_id = config.participant_id;
    dataset.frame_rate = config.frame_rate;
    for (std::size_t i = 0; i < config.n_trials; ++i) {
        Eigen::VectorXd z0(d);
        for (int c = 0; c < d; ++c) z0(c) = config.initial_std * standard_normal(rng);
        MotionMatrix path = synth_reference_path(config, z0);
        MotionMatrix obs = path * truth.observation_matrix.transpose();
        obs.rowwise() += truth.observation_offset.transpose();
        if (config.noise_std > 0.0) {
            for (Eigen::Index r = 0; r < obs.rows(); ++r) {
                for (Eigen::Index c = 0; c < obs.cols(); ++c) {
                    obs(r, c) += config.noise_std * standard_normal(rng);
                }
            }
        }
        if (!obs.allFinite()) {
            throw GenerationError("non-finite observation in synthetic trial " + std::to_string(i));
        }
        dataset.trial_ids.push_back(trial_name(i));
        dataset.trials.push_back(std::move(obs));
        truth.latent_paths.push_back(std::move(path));
    }
    return result;
}

std::string to_string(DynamicsFamily family) {
    return family == DynamicsFamily::Linear ? "linear" : "pendulum";
}

DynamicsFamily dynamics_family_from_string(const std::string& name) {
    if (name == "linear") return DynamicsFamily::Linear;
    if (name == "pendulum") return DynamicsFamily::Pendulum;
    throw ConfigurationError("unknown dynamics family '" + name + "'");
}

std::string to_string(ObservationMap map) {
    return map == ObservationMap::Random ? "random" : "identity_block";
}

ObservationMap observation_map_from_string(const std::string& name) {
    if (name == "random") return ObservationMap::Random;
    if (name == "identity_block") return ObservationMap::IdentityBlock;
    throw ConfigurationError("unknown observation map '" + name + "'");
}

}  // namespace latentmotion
