#pragma once

#include "latentmotion/data_pipeline.hpp"
#include "latentmotion/synthetic.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace latentmotion {

inline constexpr int kArchiveSchemaVersion = 1;

/// Formats a double with 17 significant digits (exact round trip).
std::string format_number(double value);

/// Trial table: header `frame,<joint>_x,<joint>_y,<joint>_z,...` in schema
/// order, one row per frame, positions in mm.
MotionMatrix read_trial_csv(const std::filesystem::path& path, const JointSchema& schema);
void write_trial_csv(const std::filesystem::path& path, const MotionMatrix& frames,
                     const JointSchema& schema);

/// Per-participant ingest manifest.
struct IngestManifest {
    std::string participant_id;
    double frame_rate = 200.0;
    JointSchema joint_schema = JointSchema::pitching_default();
    std::vector<std::filesystem::path> trial_files;  // resolved against the manifest directory
};

IngestManifest read_ingest_manifest(const std::filesystem::path& path);
void write_ingest_manifest(const std::filesystem::path& path, const IngestManifest& manifest);

/// Windowed dataset persisted as a directory: manifest.json, trials/*.csv,
/// events.csv and folds.csv.
struct DatasetArchive {
    MotionDataset dataset;
    /// One row per trial for ingested data; empty for synthetic archives.
    std::vector<TrialEvents> events;
    std::optional<FoldAssignment> folds;
};

void write_archive(const std::filesystem::path& dir, const DatasetArchive& archive);
DatasetArchive read_archive(const std::filesystem::path& dir);

/// Sidecar written next to synthetic archives.
void write_ground_truth(const std::filesystem::path& path, const SynthGroundTruth& truth,
                        const std::vector<std::string>& trial_ids);
SynthGroundTruth read_ground_truth(const std::filesystem::path& path);

}  // namespace latentmotion
