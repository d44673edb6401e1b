#include "latentmotion/config.hpp"

#include "latentmotion/errors.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace latentmotion {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigurationError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) {
            throw ConfigurationError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigurationError(std::string("invalid value for '") + key + "': " + e.what());
        }
    }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (row.size() != static_cast<std::size_t>(m.cols())) {
            throw ConfigurationError("ragged matrix in configuration");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace

json to_json(const EncoderConfig& c) {
    return {{"n_layers", c.n_layers},   {"n_heads", c.n_heads},
            {"model_dim", c.model_dim}, {"latent_dim", c.latent_dim},
            {"n_tokens", c.n_tokens},   {"feedforward_dim", c.feedforward_dim},
            {"dropout", c.dropout},     {"input_dim", c.input_dim}};
}

json to_json(const VectorFieldConfig& c) {
    return {{"latent_dim", c.latent_dim},
            {"hidden_dims", c.hidden_dims},
            {"activation", "tanh"},
            {"time_input", c.time_input}};
}

json to_json(const DecoderConfig& c) {
    return {{"latent_dim", c.latent_dim},
            {"hidden_dims", c.hidden_dims},
            {"activation", "relu"},
            {"output_dim", c.output_dim}};
}

json to_json(const ModelConfig& c) {
    return {{"encoder", to_json(c.encoder)},
            {"vector_field", to_json(c.vector_field)},
            {"decoder", to_json(c.decoder)}};
}

json to_json(const TrainConfig& c) {
    return {{"lambda_recon", c.lambda_recon},
            {"lambda_kl", c.lambda_kl},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"optimizer", "adam"},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_epsilon", c.adam_epsilon},
            {"seed", c.seed},
            {"sample_initial_state", c.sample_initial_state},
            {"lambda_consistency", c.lambda_consistency},
            {"lr_decay", c.lr_decay},
            {"weight_decay", c.weight_decay},
            {"grad_clip_norm", c.grad_clip_norm},
            {"early_stopping_patience", c.early_stopping_patience},
            {"early_stopping_min_delta", c.early_stopping_min_delta},
            {"precision", to_string(c.precision)}};
}

json to_json(const SynthConfig& c) {
    json j = {{"n_trials", c.n_trials},
              {"n_frames", c.n_frames},
              {"latent_dim", c.latent_dim},
              {"noise_std", c.noise_std},
              {"family", to_string(c.family)},
              {"observation", to_string(c.observation)},
              {"duration", c.duration},
              {"substeps", c.substeps},
              {"initial_std", c.initial_std},
              {"participant_id", c.participant_id},
              {"frame_rate", c.frame_rate}};
    if (c.linear_matrix.size() != 0) j["linear_matrix"] = matrix_to_json(c.linear_matrix);
    return j;
}

json to_json(const ExperimentConfig& c) {
    return {{"schema_version", kConfigSchemaVersion},
            {"model", to_json(c.model)},
            {"training", to_json(c.training)},
            {"n_folds", c.n_folds},
            {"fold_seed", c.fold_seed},
            {"data", {{"dataset", c.dataset}, {"manifest", c.manifest}}},
            {"evaluation",
             {{"r2_centering",
               c.evaluation.centering == R2Centering::TestMean ? "test_mean" : "train_mean"}}},
            {"workers", c.workers}};
}

json to_json(const JointSchema& s) {
    return {{"joint_names", s.joint_names},
            {"lead_knee", s.lead_knee},
            {"throwing_wrist", s.throwing_wrist},
            {"vertical_axis", s.vertical_axis}};
}

EncoderConfig encoder_config_from_json(const json& j) {
    reject_unknown(j,
                   {"n_layers", "n_heads", "model_dim", "latent_dim", "n_tokens", "feedforward_dim",
                    "dropout", "input_dim"},
                   "encoder config");
    EncoderConfig c;
    read_opt(j, "n_layers", c.n_layers);
    read_opt(j, "n_heads", c.n_heads);
    read_opt(j, "model_dim", c.model_dim);
    read_opt(j, "latent_dim", c.latent_dim);
    read_opt(j, "n_tokens", c.n_tokens);
    c.feedforward_dim = 4 * c.model_dim;
    read_opt(j, "feedforward_dim", c.feedforward_dim);
    read_opt(j, "dropout", c.dropout);
    read_opt(j, "input_dim", c.input_dim);
    c.validate();
    return c;
}

VectorFieldConfig vector_field_config_from_json(const json& j) {
    reject_unknown(j, {"latent_dim", "hidden_dims", "activation", "time_input"},
                   "vector field config");
    VectorFieldConfig c;
    read_opt(j, "latent_dim", c.latent_dim);
    read_opt(j, "hidden_dims", c.hidden_dims);
    read_opt(j, "time_input", c.time_input);
    if (j.contains("activation") && j.at("activation") != "tanh") {
        throw ConfigurationError("vector field activation must be tanh");
    }
    c.validate();
    return c;
}

DecoderConfig decoder_config_from_json(const json& j) {
    reject_unknown(j, {"latent_dim", "hidden_dims", "activation", "output_dim"}, "decoder config");
    DecoderConfig c;
    read_opt(j, "latent_dim", c.latent_dim);
    read_opt(j, "hidden_dims", c.hidden_dims);
    read_opt(j, "output_dim", c.output_dim);
    if (j.contains("activation") && j.at("activation") != "relu") {
        throw ConfigurationError("decoder activation must be relu");
    }
    c.validate();
    return c;
}

ModelConfig model_config_from_json(const json& j) {
    reject_unknown(j, {"encoder", "vector_field", "decoder"}, "model config");
    ModelConfig c;
    if (j.contains("encoder")) c.encoder = encoder_config_from_json(j.at("encoder"));
    if (j.contains("vector_field")) {
        c.vector_field = vector_field_config_from_json(j.at("vector_field"));
    }
    if (j.contains("decoder")) c.decoder = decoder_config_from_json(j.at("decoder"));
    c.validate();
    return c;
}

TrainConfig train_config_from_json(const json& j) {
    reject_unknown(j,
                   {"lambda_recon", "lambda_kl", "learning_rate", "batch_size", "epochs", "optimizer",
                    "adam_beta1", "adam_beta2", "adam_epsilon", "seed", "sample_initial_state",
                    "lambda_consistency", "lr_decay", "weight_decay", "grad_clip_norm",
                    "early_stopping_patience", "early_stopping_min_delta", "precision"},
                   "training config");
    TrainConfig c;
    read_opt(j, "lambda_recon", c.lambda_recon);
    read_opt(j, "lambda_kl", c.lambda_kl);
    read_opt(j, "learning_rate", c.learning_rate);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "epochs", c.epochs);
    if (j.contains("optimizer") && j.at("optimizer") != "adam") {
        throw ConfigurationError("only the adam optimizer is supported");
    }
    read_opt(j, "adam_beta1", c.adam_beta1);
    read_opt(j, "adam_beta2", c.adam_beta2);
    read_opt(j, "adam_epsilon", c.adam_epsilon);
    read_opt(j, "seed", c.seed);
    read_opt(j, "sample_initial_state", c.sample_initial_state);
    read_opt(j, "lambda_consistency", c.lambda_consistency);
    read_opt(j, "lr_decay", c.lr_decay);
    read_opt(j, "weight_decay", c.weight_decay);
    read_opt(j, "grad_clip_norm", c.grad_clip_norm);
    read_opt(j, "early_stopping_patience", c.early_stopping_patience);
    read_opt(j, "early_stopping_min_delta", c.early_stopping_min_delta);
    if (j.contains("precision")) c.precision = precision_from_string(j.at("precision").get<std::string>());
    c.validate();
    return c;
}

SynthConfig synth_config_from_json(const json& j) {
    reject_unknown(j,
                   {"n_trials", "n_frames", "latent_dim", "noise_std", "family", "observation",
                    "duration", "substeps", "initial_std", "participant_id", "frame_rate",
                    "linear_matrix"},
                   "synthetic config");
    SynthConfig c;
    read_opt(j, "n_trials", c.n_trials);
    read_opt(j, "n_frames", c.n_frames);
    read_opt(j, "latent_dim", c.latent_dim);
    read_opt(j, "noise_std", c.noise_std);
    if (j.contains("family")) c.family = dynamics_family_from_string(j.at("family").get<std::string>());
    if (j.contains("observation")) {
        c.observation = observation_map_from_string(j.at("observation").get<std::string>());
    }
    read_opt(j, "duration", c.duration);
    read_opt(j, "substeps", c.substeps);
    read_opt(j, "initial_std", c.initial_std);
    read_opt(j, "participant_id", c.participant_id);
    read_opt(j, "frame_rate", c.frame_rate);
    if (j.contains("linear_matrix")) c.linear_matrix = matrix_from_json(j.at("linear_matrix"));
    c.validate();
    return c;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    reject_unknown(j,
                   {"schema_version", "model", "training", "n_folds", "fold_seed", "data",
                    "evaluation", "workers"},
                   "experiment config");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kConfigSchemaVersion) {
        throw ConfigurationError("unsupported config schema_version");
    }
    ExperimentConfig c;
    if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
    if (j.contains("training")) c.training = train_config_from_json(j.at("training"));
    read_opt(j, "n_folds", c.n_folds);
    read_opt(j, "fold_seed", c.fold_seed);
    read_opt(j, "workers", c.workers);
    if (j.contains("data")) {
        const json& d = j.at("data");
        reject_unknown(d, {"dataset", "manifest"}, "data section");
        read_opt(d, "dataset", c.dataset);
        read_opt(d, "manifest", c.manifest);
    }
    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        reject_unknown(e, {"r2_centering"}, "evaluation section");
        if (e.contains("r2_centering")) {
            const auto name = e.at("r2_centering").get<std::string>();
            if (name == "test_mean") {
                c.evaluation.centering = R2Centering::TestMean;
            } else if (name == "train_mean") {
                c.evaluation.centering = R2Centering::Reference;
            } else {
                throw ConfigurationError("r2_centering must be test_mean or train_mean");
            }
        }
    }
    c.validate();
    return c;
}

JointSchema joint_schema_from_json(const json& j) {
    JointSchema s = JointSchema::pitching_default();
    read_opt(j, "joint_names", s.joint_names);
    read_opt(j, "lead_knee", s.lead_knee);
    read_opt(j, "throwing_wrist", s.throwing_wrist);
    read_opt(j, "vertical_axis", s.vertical_axis);
    s.validate();
    return s;
}

void ExperimentConfig::validate() const {
    model.validate();
    training.validate();
    if (n_folds < 2) throw ConfigurationError("n_folds must be at least 2");
    if (workers < 1) throw ConfigurationError("workers must be at least 1");
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    try {
        return experiment_config_from_json(read_json(path));
    } catch (const json::exception& e) {
        throw ConfigurationError("invalid experiment config " + path.string() + ": " + e.what());
    }
}

void save_experiment_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    write_json(path, to_json(config));
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    try {
        return synth_config_from_json(read_json(path));
    } catch (const json::exception& e) {
        throw ConfigurationError("invalid synthetic config " + path.string() + ": " + e.what());
    }
}

std::string config_hash(const json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace latentmotion
