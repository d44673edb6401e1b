#pragma once

#include "latentmotion/evaluation.hpp"
#include "latentmotion/model.hpp"
#include "latentmotion/synthetic.hpp"
#include "latentmotion/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace latentmotion {

inline constexpr int kConfigSchemaVersion = 1;

/// Everything needed to reproduce a cross-validated run.
struct ExperimentConfig {
    ModelConfig model;
    TrainConfig training;
    int n_folds = 10;
    std::uint64_t fold_seed = 0;
    /// Dataset archive directory (output of `ingest` or `synth`).
    std::string dataset;
    /// Ingest manifest, used by `ingest` when no --data flag is given.
    std::string manifest;
    EvalOptions evaluation;
    /// Parallel fold workers for `--fold all`.
    int workers = 1;

    void validate() const;
};

nlohmann::json to_json(const EncoderConfig& c);
nlohmann::json to_json(const VectorFieldConfig& c);
nlohmann::json to_json(const DecoderConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const JointSchema& s);

/// Missing keys keep their defaults; unknown keys are rejected.
EncoderConfig encoder_config_from_json(const nlohmann::json& j);
VectorFieldConfig vector_field_config_from_json(const nlohmann::json& j);
DecoderConfig decoder_config_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SynthConfig synth_config_from_json(const nlohmann::json& j);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
JointSchema joint_schema_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void save_experiment_config(const std::filesystem::path& path, const ExperimentConfig& config);
SynthConfig load_synth_config(const std::filesystem::path& path);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace latentmotion
