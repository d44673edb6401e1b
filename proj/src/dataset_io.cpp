#include "latentmotion/dataset_io.hpp"

#include "latentmotion/config.hpp"
#include "latentmotion/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace latentmotion {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line_no) {
    if (text.empty()) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": empty value");
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + text + "'");
    }
    return v;
}

std::vector<std::string> expected_header(const JointSchema& schema) {
    std::vector<std::string> header{"frame"};
    for (const auto& name : schema.joint_names) {
        header.push_back(name + "_x");
        header.push_back(name + "_y");
        header.push_back(name + "_z");
    }
    return header;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

MotionMatrix read_trial_csv(const fs::path& path, const JointSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trial file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("trial file " + path.string() + " is empty");
    const auto header = split_csv(line);
    if (header != expected_header(schema)) {
        throw IoError("trial file " + path.string() + " header does not match the joint schema");
    }
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " columns");
        }
        std::vector<double> row;
        row.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_double(cells[c], path, line_no));
        rows.push_back(std::move(row));
    }
    MotionMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_trial_csv(const fs::path& path, const MotionMatrix& frames, const JointSchema& schema) {
    auto out = open_out(path);
    const auto header = expected_header(schema);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (Eigen::Index r = 0; r < frames.rows(); ++r) {
        out << r;
        for (Eigen::Index c = 0; c < frames.cols(); ++c) out << ',' << format_number(frames(r, c));
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

IngestManifest read_ingest_manifest(const fs::path& path) {
    const json j = read_json(path);
    IngestManifest m;
    try {
        m.participant_id = j.at("participant_id").get<std::string>();
        m.frame_rate = j.value("frame_rate", 200.0);
        JointSchema schema = JointSchema::pitching_default();
        if (j.contains("joint_names")) schema.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        if (j.contains("lead_knee")) schema.lead_knee = j.at("lead_knee").get<std::string>();
        if (j.contains("throwing_wrist")) schema.throwing_wrist = j.at("throwing_wrist").get<std::string>();
        if (j.contains("vertical_axis")) schema.vertical_axis = j.at("vertical_axis").get<int>();
        schema.validate();
        m.joint_schema = schema;
        const fs::path base = path.parent_path();
        for (const auto& f : j.at("trials")) m.trial_files.push_back(base / f.get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigurationError("invalid ingest manifest " + path.string() + ": " + e.what());
    }
    if (!(m.frame_rate > 0.0)) throw ConfigurationError("manifest frame_rate must be positive");
    return m;
}

void write_ingest_manifest(const fs::path& path, const IngestManifest& manifest) {
    json trials = json::array();
    for (const auto& f : manifest.trial_files) {
        trials.push_back(fs::relative(f, path.parent_path().empty() ? fs::path(".") : path.parent_path())
                             .generic_string());
    }
    json j = {{"participant_id", manifest.participant_id},
              {"frame_rate", manifest.frame_rate},
              {"joint_names", manifest.joint_schema.joint_names},
              {"lead_knee", manifest.joint_schema.lead_knee},
              {"throwing_wrist", manifest.joint_schema.throwing_wrist},
              {"vertical_axis", manifest.joint_schema.vertical_axis},
              {"trials", trials}};
    write_json(path, j);
}

void write_archive(const fs::path& dir, const DatasetArchive& archive) {
    const MotionDataset& ds = archive.dataset;
    ds.validate();
    fs::create_directories(dir / "trials");
    json trials = json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::string file = "trials/" + ds.trial_ids[i] + ".csv";
        write_trial_csv(dir / file, ds.trials[i], ds.joint_schema);
        trials.push_back({{"id", ds.trial_ids[i]}, {"file", file}});
    }
    json manifest = {{"format", "latentmotion-dataset"},
                     {"schema_version", kArchiveSchemaVersion},
                     {"participant_id", ds.participant_id},
                     {"frame_rate", ds.frame_rate},
                     {"units", ds.units},
                     {"window_length", ds.window_length()},
                     {"n_trials", ds.size()},
                     {"joint_schema", to_json(ds.joint_schema)},
                     {"trials", trials}};
    if (archive.folds) {
        manifest["folds"] = {{"n_folds", archive.folds->n_folds}, {"seed", archive.folds->seed}};
    }
    write_json(dir / "manifest.json", manifest);

    {
        auto out = open_out(dir / "events.csv");
        out << "trial_id,max_knee_height_frame,onset_frame,release_frame,onset_warning\n";
        for (std::size_t i = 0; i < archive.events.size(); ++i) {
            const TrialEvents& e = archive.events[i];
            out << ds.trial_ids.at(i) << ',' << e.max_knee_height_frame << ',' << e.onset_frame << ','
                << e.release_frame << ',' << (e.onset_warning ? 1 : 0) << '\n';
        }
    }
    if (archive.folds) {
        auto out = open_out(dir / "folds.csv");
        out << "trial_id,fold\n";
        for (std::size_t i = 0; i < ds.size(); ++i) {
            out << ds.trial_ids[i] << ',' << archive.folds->fold_of_trial.at(i) << '\n';
        }
    }
}

DatasetArchive read_archive(const fs::path& dir) {
    const json manifest = read_json(dir / "manifest.json");
    DatasetArchive archive;
    MotionDataset& ds = archive.dataset;
    try {
        if (manifest.at("format") != "latentmotion-dataset") {
            throw IoError(dir.string() + " is not a dataset archive");
        }
        if (manifest.at("schema_version").get<int>() != kArchiveSchemaVersion) {
            throw IoError("unsupported dataset archive schema_version in " + dir.string());
        }
        ds.participant_id = manifest.at("participant_id").get<std::string>();
        ds.frame_rate = manifest.at("frame_rate").get<double>();
        ds.units = manifest.at("units").get<std::string>();
        ds.joint_schema = joint_schema_from_json(manifest.at("joint_schema"));
        for (const auto& t : manifest.at("trials")) {
            ds.trial_ids.push_back(t.at("id").get<std::string>());
            ds.trials.push_back(read_trial_csv(dir / t.at("file").get<std::string>(), ds.joint_schema));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed archive manifest in " + dir.string() + ": " + e.what());
    }
    ds.validate();

    std::ifstream events(dir / "events.csv");
    std::string line;
    if (events && std::getline(events, line)) {
        while (std::getline(events, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv(line);
            if (cells.size() != 5) throw IoError("malformed events.csv in " + dir.string());
            TrialEvents e;
            e.max_knee_height_frame = std::stol(cells[1]);
            e.onset_frame = std::stol(cells[2]);
            e.release_frame = std::stol(cells[3]);
            e.onset_warning = cells[4] == "1";
            archive.events.push_back(e);
        }
    }

    if (manifest.contains("folds")) {
        FoldAssignment folds;
        folds.n_folds = manifest["folds"].at("n_folds").get<int>();
        folds.seed = manifest["folds"].at("seed").get<std::uint64_t>();
        std::ifstream in(dir / "folds.csv");
        if (!in || !std::getline(in, line)) throw IoError("missing folds.csv in " + dir.string());
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv(line);
            if (cells.size() != 2) throw IoError("malformed folds.csv in " + dir.string());
            folds.fold_of_trial.push_back(std::stoi(cells[1]));
        }
        if (folds.fold_of_trial.size() != ds.size()) {
            throw IoError("folds.csv does not cover every trial in " + dir.string());
        }
        archive.folds = std::move(folds);
    }
    return archive;
}

namespace {

json matrix_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

}  // namespace

void write_ground_truth(const fs::path& path, const SynthGroundTruth& truth,
                        const std::vector<std::string>& trial_ids) {
    json paths = json::object();
    for (std::size_t i = 0; i < truth.latent_paths.size(); ++i) {
        paths[trial_ids.at(i)] = matrix_json(truth.latent_paths[i]);
    }
    json j = {{"format", "latentmotion-ground-truth"},
              {"schema_version", kArchiveSchemaVersion},
              {"family", to_string(truth.family)},
              {"duration", truth.duration},
              {"observation_matrix", matrix_json(truth.observation_matrix)},
              {"observation_offset", std::vector<double>(truth.observation_offset.data(),
                                                         truth.observation_offset.data() +
                                                             truth.observation_offset.size())},
              {"trial_order", trial_ids},
              {"latent_paths", paths}};
    if (truth.linear_matrix.size() != 0) j["linear_matrix"] = matrix_json(truth.linear_matrix);
    write_json(path, j);
}

SynthGroundTruth read_ground_truth(const fs::path& path) {
    const json j = read_json(path);
    SynthGroundTruth truth;
    try {
        truth.family = dynamics_family_from_string(j.at("family").get<std::string>());
        truth.duration = j.at("duration").get<double>();
        truth.observation_matrix = matrix_from(j.at("observation_matrix"));
        const auto offset = j.at("observation_offset").get<std::vector<double>>();
        truth.observation_offset = Eigen::Map<const Eigen::VectorXd>(offset.data(),
                                                                     static_cast<Eigen::Index>(offset.size()));
        if (j.contains("linear_matrix")) truth.linear_matrix = matrix_from(j.at("linear_matrix"));
        for (const auto& id : j.at("trial_order")) {
            truth.latent_paths.push_back(matrix_from(j.at("latent_paths").at(id.get<std::string>())));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed ground-truth sidecar " + path.string() + ": " + e.what());
    }
    return truth;
}

}  // namespace latentmotion
