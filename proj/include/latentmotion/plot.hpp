#pragma once

#include "latentmotion/data_pipeline.hpp"
#include "latentmotion/evaluation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace latentmotion {

/// Summary of an emitted SVG, independent of pixel content.
struct PlotInfo {
    std::filesystem::path path;
    int width = 0;
    int height = 0;
    std::size_t series = 0;
    /// Distinct plotted points per series, in drawing order.
    std::vector<std::size_t> distinct_points;
};

struct BandSeries {
    std::string label;
    std::string color;
    std::vector<MeanSd> values;
};

/// Mean line with a +/- SD band per series, frame index on the x axis.
/// NaN entries break the line.
PlotInfo plot_band_curves(const std::filesystem::path& path, const std::string& title,
                          const std::string& y_label, const std::vector<BandSeries>& series);

/// Three pairwise projections (z1-z2, z1-z3, z2-z3) of latent paths. A path
/// that never moves is drawn as a single marker.
PlotInfo plot_latent_paths(const std::filesystem::path& path, const std::vector<MotionMatrix>& paths,
                           const std::vector<std::string>& labels);

/// Stick figures of truth (grey) and prediction (red) at the given frames,
/// projected onto the forward/vertical plane.
PlotInfo plot_stick_frames(const std::filesystem::path& path, const Prediction& prediction,
                           const JointSchema& schema, const std::vector<Eigen::Index>& frames);

/// Bones drawn between named joints that are present in the schema.
std::vector<std::pair<std::size_t, std::size_t>> skeleton_edges(const JointSchema& schema);

}  // namespace latentmotion
