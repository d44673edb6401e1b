#pragma once

#include "latentmotion/config.hpp"
#include "latentmotion/evaluation.hpp"
#include "latentmotion/training.hpp"

#include <filesystem>
#include <optional>

namespace latentmotion {

inline constexpr int kCheckpointSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParticipantSummary& summary);
nlohmann::json to_json(const StandardizationStats& stats);
StandardizationStats standardization_stats_from_json(const nlohmann::json& j);

/// frame,rmse_mm,r2,baseline_rmse_mm,baseline_r2
void write_curves_csv(const std::filesystem::path& path, const EvalReport& report);
/// Cross-fold mean and SD of each curve.
void write_summary_curves_csv(const std::filesystem::path& path, const ParticipantSummary& summary);
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);
/// frame,z1,...,zd
void write_latent_csv(const std::filesystem::path& path, const MotionMatrix& path_states);
MotionMatrix read_latent_csv(const std::filesystem::path& path);

template <typename Scalar>
struct LoadedCheckpoint {
    TrainedModel<Scalar> trained;
    std::uint64_t seed = 0;
    std::optional<EvalReport> validation;
};

/// Single JSON document holding the configs, standardization statistics,
/// every named parameter and (optionally) the held-out metrics.
template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const TrainedModel<Scalar>& trained,
                     std::uint64_t seed, const std::optional<EvalReport>& validation = std::nullopt);

/// Parameters are cast to `Scalar` regardless of the stored precision.
template <typename Scalar>
LoadedCheckpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

Precision checkpoint_precision(const std::filesystem::path& path);

}  // namespace latentmotion
