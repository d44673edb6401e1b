#include "latentmotion/artifacts.hpp"

#include "latentmotion/dataset_io.hpp"
#include "latentmotion/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace latentmotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// NaN is stored as null.
json number_array(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) {
        if (std::isfinite(v)) {
            out.push_back(v);
        } else {
            out.push_back(nullptr);
        }
    }
    return out;
}

std::vector<double> number_vector(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        out.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return out;
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json mean_sd_json(const MeanSd& m) {
    return {{"mean", number_or_null(m.mean)}, {"sd", number_or_null(m.sd)}};
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string cell(double v) {
    return std::isfinite(v) ? format_number(v) : std::string("nan");
}

}  // namespace

json to_json(const EvalReport& r) {
    return {{"schema_version", kReportSchemaVersion},
            {"fold_id", r.fold_id},
            {"participant_id", r.participant_id},
            {"n_test_trials", r.n_test_trials},
            {"rmse_curve", number_array(r.rmse_curve)},
            {"per_joint_rmse", number_array(r.per_joint_rmse)},
            {"per_joint_sse", number_array(r.per_joint_sse)},
            {"per_joint_count", r.per_joint_count},
            {"total_sse", r.total_sse},
            {"total_count", r.total_count},
            {"rmse_overall", number_or_null(r.rmse_overall)},
            {"r2_curve", number_array(r.r2_curve)},
            {"mean_r2_full", number_or_null(r.mean_r2_full)},
            {"mean_r2_latter_half", number_or_null(r.mean_r2_latter_half)},
            {"undefined_r2_frames", r.undefined_r2_frames},
            {"baseline_rmse_curve", number_array(r.baseline_rmse_curve)},
            {"baseline_rmse_overall", number_or_null(r.baseline_rmse_overall)},
            {"baseline_r2_curve", number_array(r.baseline_r2_curve)},
            {"baseline_mean_r2_full", number_or_null(r.baseline_mean_r2_full)},
            {"baseline_mean_r2_latter_half", number_or_null(r.baseline_mean_r2_latter_half)},
            {"r2_centering", r.r2_centering}};
}

EvalReport eval_report_from_json(const json& j) {
    EvalReport r;
    try {
        r.fold_id = j.at("fold_id").get<int>();
        r.participant_id = j.at("participant_id").get<std::string>();
        r.n_test_trials = j.at("n_test_trials").get<std::size_t>();
        r.rmse_curve = number_vector(j.at("rmse_curve"));
        r.per_joint_rmse = number_vector(j.at("per_joint_rmse"));
        r.per_joint_sse = number_vector(j.at("per_joint_sse"));
        r.per_joint_count = j.at("per_joint_count").get<double>();
        r.total_sse = j.at("total_sse").get<double>();
        r.total_count = j.at("total_count").get<double>();
        r.rmse_overall = number_from(j.at("rmse_overall"));
        r.r2_curve = number_vector(j.at("r2_curve"));
        r.mean_r2_full = number_from(j.at("mean_r2_full"));
        r.mean_r2_latter_half = number_from(j.at("mean_r2_latter_half"));
        r.undefined_r2_frames = j.at("undefined_r2_frames").get<std::size_t>();
        r.baseline_rmse_curve = number_vector(j.at("baseline_rmse_curve"));
        r.baseline_rmse_overall = number_from(j.at("baseline_rmse_overall"));
        r.baseline_r2_curve = number_vector(j.at("baseline_r2_curve"));
        r.baseline_mean_r2_full = number_from(j.at("baseline_mean_r2_full"));
        r.baseline_mean_r2_latter_half = number_from(j.at("baseline_mean_r2_latter_half"));
        r.r2_centering = j.value("r2_centering", std::string("test_mean"));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed evaluation report: ") + e.what());
    }
    return r;
}

json to_json(const ParticipantSummary& s) {
    auto curve = [](const std::vector<MeanSd>& c) {
        json out = json::array();
        for (const auto& m : c) out.push_back(mean_sd_json(m));
        return out;
    };
    return {{"participant_id", s.participant_id},
            {"n_folds", s.n_folds},
            {"mean_r2_full", mean_sd_json(s.mean_r2_full)},
            {"mean_r2_latter_half", mean_sd_json(s.mean_r2_latter_half)},
            {"rmse", mean_sd_json(s.rmse)},
            {"baseline_rmse", mean_sd_json(s.baseline_rmse)},
            {"baseline_mean_r2_full", mean_sd_json(s.baseline_mean_r2_full)},
            {"baseline_mean_r2_latter_half", mean_sd_json(s.baseline_mean_r2_latter_half)},
            {"pooled_rmse", number_or_null(s.pooled_rmse)},
            {"per_joint_rmse", number_array(s.per_joint_rmse)},
            {"rmse_curve", curve(s.rmse_curve)},
            {"r2_curve", curve(s.r2_curve)},
            {"baseline_rmse_curve", curve(s.baseline_rmse_curve)},
            {"baseline_r2_curve", curve(s.baseline_r2_curve)},
            {"sd_convention", s.sd_convention}};
}

json to_json(const StandardizationStats& stats) {
    return {{"mean", std::vector<double>(stats.mean.data(), stats.mean.data() + stats.mean.size())},
            {"std", std::vector<double>(stats.std.data(), stats.std.data() + stats.std.size())}};
}

StandardizationStats standardization_stats_from_json(const json& j) {
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto sd = j.at("std").get<std::vector<double>>();
    if (mean.size() != sd.size()) throw IoError("standardization mean/std size mismatch");
    StandardizationStats stats;
    stats.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    stats.std = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    return stats;
}

void write_curves_csv(const fs::path& path, const EvalReport& r) {
    auto out = open_out(path);
    out << "frame,rmse_mm,r2,baseline_rmse_mm,baseline_r2\n";
    for (std::size_t t = 0; t < r.rmse_curve.size(); ++t) {
        out << t << ',' << cell(r.rmse_curve[t]) << ',' << cell(r.r2_curve.at(t)) << ','
            << cell(r.baseline_rmse_curve.at(t)) << ',' << cell(r.baseline_r2_curve.at(t)) << '\n';
    }
}

void write_summary_curves_csv(const fs::path& path, const ParticipantSummary& s) {
    auto out = open_out(path);
    out << "frame,rmse_mean,rmse_sd,r2_mean,r2_sd,baseline_rmse_mean,baseline_rmse_sd,"
           "baseline_r2_mean,baseline_r2_sd\n";
    for (std::size_t t = 0; t < s.rmse_curve.size(); ++t) {
        out << t << ',' << cell(s.rmse_curve[t].mean) << ',' << cell(s.rmse_curve[t].sd) << ','
            << cell(s.r2_curve.at(t).mean) << ',' << cell(s.r2_curve.at(t).sd) << ','
            << cell(s.baseline_rmse_curve.at(t).mean) << ',' << cell(s.baseline_rmse_curve.at(t).sd)
            << ',' << cell(s.baseline_r2_curve.at(t).mean) << ',' << cell(s.baseline_r2_curve.at(t).sd)
            << '\n';
    }
}

void write_history_csv(const fs::path& path, const TrainHistory& history) {
    auto out = open_out(path);
    out << "epoch,total,recon,kl,seconds\n";
    for (const auto& e : history.epochs) {
        out << e.epoch << ',' << cell(e.total) << ',' << cell(e.recon) << ',' << cell(e.kl) << ','
            << cell(e.seconds) << '\n';
    }
}

void write_latent_csv(const fs::path& path, const MotionMatrix& states) {
    auto out = open_out(path);
    out << "frame";
    for (Eigen::Index c = 0; c < states.cols(); ++c) out << ",z" << (c + 1);
    out << '\n';
    for (Eigen::Index r = 0; r < states.rows(); ++r) {
        out << r;
        for (Eigen::Index c = 0; c < states.cols(); ++c) out << ',' << format_number(states(r, c));
        out << '\n';
    }
}

MotionMatrix read_latent_csv(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    if (!in || !std::getline(in, line)) throw IoError("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string c;
        std::vector<double> row;
        std::getline(ss, c, ',');
        while (std::getline(ss, c, ',')) row.push_back(std::stod(c));
        rows.push_back(std::move(row));
    }
    const auto cols = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
    MotionMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols) throw IoError("ragged rows in " + path.string());
        for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    return m;
}

template <typename Scalar>
void save_checkpoint(const fs::path& path, const TrainedModel<Scalar>& trained, std::uint64_t seed,
                     const std::optional<EvalReport>& validation) {
    // parameters() only hands out pointers; nothing below mutates them.
    auto& model = const_cast<LatentOdeModel<Scalar>&>(trained.model);
    json params = json::object();
    for (const auto* p : model.parameters()) {
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(p->value.size()));
        for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
            for (Eigen::Index c = 0; c < p->value.cols(); ++c) data.push_back(static_cast<double>(p->value(r, c)));
        }
        params[p->name] = {{"shape", {p->value.rows(), p->value.cols()}}, {"data", data}};
    }
    json j = {{"format", "latentmotion-checkpoint"},
              {"schema_version", kCheckpointSchemaVersion},
              {"precision", to_string(trained.train_config.precision)},
              {"participant_id", trained.participant_id},
              {"fold", trained.fold},
              {"seed", seed},
              {"model", to_json(model.config())},
              {"training", to_json(trained.train_config)},
              {"standardization", to_json(trained.stats)},
              {"parameters", params}};
    if (validation) j["validation"] = to_json(*validation);
    write_json(path, j);
}

template <typename Scalar>
LoadedCheckpoint<Scalar> load_checkpoint(const fs::path& path) {
    const json j = read_json(path);
    LoadedCheckpoint<Scalar> out;
    try {
        if (j.at("format") != "latentmotion-checkpoint") {
            throw IoError(path.string() + " is not a checkpoint");
        }
        if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
            throw IoError("unsupported checkpoint schema_version in " + path.string());
        }
        const ModelConfig mc = model_config_from_json(j.at("model"));
        TrainedModel<Scalar>& t = out.trained;
        t.model = LatentOdeModel<Scalar>(mc);
        t.train_config = train_config_from_json(j.at("training"));
        t.stats = standardization_stats_from_json(j.at("standardization"));
        t.fold = j.at("fold").get<int>();
        t.participant_id = j.at("participant_id").get<std::string>();
        out.seed = j.at("seed").get<std::uint64_t>();
        const json& params = j.at("parameters");
        std::size_t matched = 0;
        for (auto* p : t.model.parameters()) {
            if (!params.contains(p->name)) throw IoError("checkpoint is missing parameter " + p->name);
            const json& entry = params.at(p->name);
            const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
            if (shape.size() != 2 || shape[0] != p->value.rows() || shape[1] != p->value.cols()) {
                throw IoError("shape mismatch for parameter " + p->name);
            }
            const auto data = entry.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != p->value.size()) {
                throw IoError("size mismatch for parameter " + p->name);
            }
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
                for (Eigen::Index c = 0; c < p->value.cols(); ++c) p->value(r, c) = static_cast<Scalar>(data[k++]);
            }
            p->grad.setZero(p->value.rows(), p->value.cols());
            ++matched;
        }
        if (matched != params.size()) throw IoError("checkpoint has unexpected parameters");
        if (j.contains("validation")) out.validation = eval_report_from_json(j.at("validation"));
    } catch (const json::exception& e) {
        throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    return out;
}

Precision checkpoint_precision(const fs::path& path) {
    const json j = read_json(path);
    try {
        return precision_from_string(j.at("precision").get<std::string>());
    } catch (const json::exception& e) {
        throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

template void save_checkpoint<float>(const fs::path&, const TrainedModel<float>&, std::uint64_t,
                                     const std::optional<EvalReport>&);
template void save_checkpoint<double>(const fs::path&, const TrainedModel<double>&, std::uint64_t,
                                      const std::optional<EvalReport>&);
template LoadedCheckpoint<float> load_checkpoint<float>(const fs::path&);
template LoadedCheckpoint<double> load_checkpoint<double>(const fs::path&);

}  // namespace latentmotion
