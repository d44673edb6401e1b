#include "latentmotion/encoder.hpp"

#include "latentmotion/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace latentmotion {

void EncoderConfig::validate() const {
    if (n_layers < 1) throw ConfigurationError("encoder needs at least one layer");
    if (n_heads < 1 || model_dim < 1) throw ConfigurationError("encoder dims must be positive");
    if (model_dim % n_heads != 0) {
        throw ConfigurationError("model_dim " + std::to_string(model_dim) +
                                 " is not divisible by n_heads " + std::to_string(n_heads));
    }
    if (latent_dim < 1) throw ConfigurationError("latent_dim must be at least 1");
    if (n_tokens < 1) throw ConfigurationError("n_tokens must be at least 1");
    if (feedforward_dim < 1) throw ConfigurationError("feedforward_dim must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigurationError("dropout must be in [0, 1)");
    if (input_dim < 1) throw ConfigurationError("input_dim must be positive");
}

CausalMask causal_frame_mask(Eigen::Index frames) {
    CausalMask mask(frames, frames);
    for (Eigen::Index t = 0; t < frames; ++t) {
        for (Eigen::Index j = 0; j < frames; ++j) mask(t, j) = j <= t;
    }
    return mask;
}

std::vector<Segment> segment_bounds(Eigen::Index frames, int n_tokens) {
    if (n_tokens < 1 || n_tokens > frames) {
        throw ConfigurationError("cannot pool " + std::to_string(frames) + " frames into " +
                                 std::to_string(n_tokens) + " tokens");
    }
    const Eigen::Index base = frames / n_tokens;
    const Eigen::Index extra = frames % n_tokens;
    std::vector<Segment> segments(static_cast<std::size_t>(n_tokens));
    Eigen::Index begin = 0;
    for (int k = 0; k < n_tokens; ++k) {
        const Eigen::Index len = base + (k < extra ? 1 : 0);
        segments[static_cast<std::size_t>(k)] = {begin, begin + len};
        begin += len;
    }
    return segments;
}

template <typename Scalar>
nn::Mat<Scalar> segment_pool(const nn::Mat<Scalar>& frame_states, int n_tokens) {
    const auto segments = segment_bounds(frame_states.rows(), n_tokens);
    nn::Mat<Scalar> pooled(n_tokens, frame_states.cols());
    for (int k = 0; k < n_tokens; ++k) {
        const Segment& s = segments[static_cast<std::size_t>(k)];
        pooled.row(k) = frame_states.middleRows(s.begin, s.size()).colwise().sum() /
                        static_cast<Scalar>(s.size());
    }
    return pooled;
}

template <typename Scalar>
nn::Mat<Scalar> sinusoidal_encoding(Eigen::Index frames, Eigen::Index dim) {
    nn::Mat<Scalar> pe(frames, dim);
    for (Eigen::Index t = 0; t < frames; ++t) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double rate =
                std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
            const double angle = static_cast<double>(t) * rate;
            pe(t, i) = static_cast<Scalar>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
        }
    }
    return pe;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> initial_state(const GaussianToken<Scalar>& token,
                                                        InitialStateMode mode, Rng& rng) {
    if (mode == InitialStateMode::Mean) return token.mean;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z(token.mean.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const Scalar eps = static_cast<Scalar>(standard_normal(rng));
        z(j) = token.mean(j) + std::exp(token.log_var(j) / Scalar(2)) * eps;
    }
    return z;
}

namespace {

template <typename Mat>
void check_finite(const Mat& m, const std::string& stage) {
    if (!m.allFinite()) {
        throw NumericError(stage, "non-finite activations in " + stage);
    }
}

template <typename Scalar>
nn::Mat<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    nn::Mat<Scalar> mask(rows, cols);
    const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - rate));
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            mask(r, c) = uniform01(rng) >= rate ? keep : Scalar(0);
        }
    }
    return mask;
}

}  // namespace

template <typename Scalar>
TransformerEncoder<Scalar>::TransformerEncoder(const EncoderConfig& config) : config_(config) {
    config_.validate();
    const int dm = config_.model_dim;
    input_projection = nn::Linear<Scalar>("encoder.input_projection", config_.input_dim, dm);
    blocks.resize(static_cast<std::size_t>(config_.n_layers));
    for (int l = 0; l < config_.n_layers; ++l) {
        const std::string p = "encoder.layers." + std::to_string(l);
        Block& b = blocks[static_cast<std::size_t>(l)];
        b.query = nn::Linear<Scalar>(p + ".attn.query", dm, dm);
        b.key = nn::Linear<Scalar>(p + ".attn.key", dm, dm);
        b.value = nn::Linear<Scalar>(p + ".attn.value", dm, dm);
        b.out = nn::Linear<Scalar>(p + ".attn.out", dm, dm);
        b.norm1 = nn::LayerNorm<Scalar>(p + ".norm1", dm);
        b.ff1 = nn::Linear<Scalar>(p + ".ff1", dm, config_.feedforward_dim);
        b.ff2 = nn::Linear<Scalar>(p + ".ff2", config_.feedforward_dim, dm);
        b.norm2 = nn::LayerNorm<Scalar>(p + ".norm2", dm);
    }
    mean_head = nn::Linear<Scalar>("encoder.mean_head", dm, config_.latent_dim);
    log_var_head = nn::Linear<Scalar>("encoder.log_var_head", dm, config_.latent_dim);
}

template <typename Scalar>
void TransformerEncoder<Scalar>::initialize(Rng& rng) {
    input_projection.initialize(rng);
    for (Block& b : blocks) {
        b.query.initialize(rng);
        b.key.initialize(rng);
        b.value.initialize(rng);
        b.out.initialize(rng);
        b.ff1.initialize(rng);
        b.ff2.initialize(rng);
    }
    mean_head.initialize(rng);
    log_var_head.initialize(rng);
}

template <typename Scalar>
typename TransformerEncoder<Scalar>::MatS TransformerEncoder<Scalar>::run_blocks(
    const MatS& stacked, Eigen::Index batch, Eigen::Index frames, Cache* cache,
    Rng* dropout_rng) const {
    const int dm = config_.model_dim;
    const int heads = config_.n_heads;
    const int dh = dm / heads;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
    const bool use_dropout = dropout_rng != nullptr && config_.dropout > 0.0;
    const CausalMask mask = causal_frame_mask(frames);

    MatS h = input_projection.forward(stacked);
    const MatS pe = sinusoidal_encoding<Scalar>(frames, dm);
    for (Eigen::Index b = 0; b < batch; ++b) h.middleRows(b * frames, frames) += pe;
    check_finite(h, "encoder input projection");

    if (cache != nullptr) {
        cache->batch = batch;
        cache->frames = frames;
        cache->input = stacked;
        cache->layers.assign(blocks.size(), LayerCache{});
    }

    for (std::size_t l = 0; l < blocks.size(); ++l) {
        const Block& blk = blocks[l];
        MatS q = blk.query.forward(h);
        MatS k = blk.key.forward(h);
        MatS v = blk.value.forward(h);
        MatS concat(h.rows(), dm);
        std::vector<MatS> probs;
        if (cache != nullptr) probs.reserve(static_cast<std::size_t>(batch * heads));

        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int hd = 0; hd < heads; ++hd) {
                const auto qh = q.block(b * frames, hd * dh, frames, dh);
                const auto kh = k.block(b * frames, hd * dh, frames, dh);
                const auto vh = v.block(b * frames, hd * dh, frames, dh);
                MatS p = (qh * kh.transpose()) * scale;
                for (Eigen::Index t = 0; t < frames; ++t) {
                    Scalar row_max = -std::numeric_limits<Scalar>::infinity();
                    for (Eigen::Index j = 0; j < frames; ++j) {
                        if (mask(t, j)) row_max = std::max(row_max, p(t, j));
                    }
                    Scalar total = 0;
                    for (Eigen::Index j = 0; j < frames; ++j) {
                        if (mask(t, j)) {
                            p(t, j) = std::exp(p(t, j) - row_max);
                            total += p(t, j);
                        } else {
                            p(t, j) = Scalar(0);
                        }
                    }
                    p.row(t).head(t + 1) /= total;
                }
                concat.block(b * frames, hd * dh, frames, dh).noalias() =
                    p.template triangularView<Eigen::Lower>() * vh;
                if (cache != nullptr) probs.push_back(std::move(p));
            }
        }

        MatS attn = blk.out.forward(concat);
        MatS attn_mask;
        if (use_dropout) {
            attn_mask = dropout_mask<Scalar>(attn.rows(), attn.cols(), config_.dropout, *dropout_rng);
            attn.array() *= attn_mask.array();
        }
        typename nn::LayerNorm<Scalar>::Cache norm1_cache;
        MatS h1 = blk.norm1.forward(h + attn, cache != nullptr ? &norm1_cache : nullptr);

        MatS ff_act = nn::relu<Scalar>(blk.ff1.forward(h1));
        MatS ff = blk.ff2.forward(ff_act);
        MatS ff_mask;
        if (use_dropout) {
            ff_mask = dropout_mask<Scalar>(ff.rows(), ff.cols(), config_.dropout, *dropout_rng);
            ff.array() *= ff_mask.array();
        }
        typename nn::LayerNorm<Scalar>::Cache norm2_cache;
        MatS h2 = blk.norm2.forward(h1 + ff, cache != nullptr ? &norm2_cache : nullptr);
        check_finite(h2, "encoder layer " + std::to_string(l));

        if (cache != nullptr) {
            LayerCache& lc = cache->layers[l];
            lc.input = std::move(h);
            lc.q = std::move(q);
            lc.k = std::move(k);
            lc.v = std::move(v);
            lc.probs = std::move(probs);
            lc.attn_concat = std::move(concat);
            lc.attn_mask = std::move(attn_mask);
            lc.norm1 = std::move(norm1_cache);
            lc.hidden1 = std::move(h1);
            lc.ff_act = std::move(ff_act);
            lc.ff_mask = std::move(ff_mask);
            lc.norm2 = std::move(norm2_cache);
        }
        h = std::move(h2);
    }
    return h;
}

template <typename Scalar>
typename TransformerEncoder<Scalar>::Output TransformerEncoder<Scalar>::forward(
    const MatS& stacked, Eigen::Index batch, Eigen::Index frames, Cache* cache,
    Rng* dropout_rng) const {
    if (stacked.rows() != batch * frames || stacked.cols() != config_.input_dim) {
        throw ContractError("encoder input has shape " + std::to_string(stacked.rows()) + "x" +
                            std::to_string(stacked.cols()) + ", expected " +
                            std::to_string(batch * frames) + "x" +
                            std::to_string(config_.input_dim));
    }
    if (config_.n_tokens > frames) {
        throw ConfigurationError("n_tokens " + std::to_string(config_.n_tokens) +
                                 " exceeds sequence length " + std::to_string(frames));
    }
    if (!stacked.allFinite()) {
        throw NumericError("encoder input", "non-finite encoder input");
    }
    const MatS states = run_blocks(stacked, batch, frames, cache, dropout_rng);

    const int tokens = config_.n_tokens;
    MatS pooled(batch * tokens, config_.model_dim);
    for (Eigen::Index b = 0; b < batch; ++b) {
        pooled.middleRows(b * tokens, tokens) =
            segment_pool<Scalar>(states.middleRows(b * frames, frames), tokens);
    }
    Output out;
    out.means = mean_head.forward(pooled);
    out.log_vars = log_var_head.forward(pooled);
    check_finite(out.means, "encoder mean head");
    check_finite(out.log_vars, "encoder log-variance head");
    if (cache != nullptr) cache->pooled = std::move(pooled);
    return out;
}

template <typename Scalar>
void TransformerEncoder<Scalar>::backward(const Cache& cache, const MatS& d_means,
                                          const MatS& d_log_vars) {
    const Eigen::Index batch = cache.batch;
    const Eigen::Index frames = cache.frames;
    const int tokens = config_.n_tokens;
    const int dm = config_.model_dim;
    const int heads = config_.n_heads;
    const int dh = dm / heads;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));

    MatS d_pooled = mean_head.backward(cache.pooled, d_means);
    d_pooled += log_var_head.backward(cache.pooled, d_log_vars);

    const auto segments = segment_bounds(frames, tokens);
    MatS dh_states = MatS::Zero(batch * frames, dm);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (int k = 0; k < tokens; ++k) {
            const Segment& s = segments[static_cast<std::size_t>(k)];
            const auto share = (d_pooled.row(b * tokens + k) / static_cast<Scalar>(s.size())).eval();
            for (Eigen::Index t = s.begin; t < s.end; ++t) dh_states.row(b * frames + t) = share;
        }
    }

    for (std::size_t li = blocks.size(); li-- > 0;) {
        Block& blk = blocks[li];
        const LayerCache& lc = cache.layers[li];

        const MatS d_res2 = blk.norm2.backward(lc.norm2, dh_states);
        MatS d_ff = d_res2;
        if (lc.ff_mask.size() != 0) d_ff.array() *= lc.ff_mask.array();
        MatS d_act = blk.ff2.backward(lc.ff_act, d_ff);
        d_act = nn::relu_backward<Scalar>(lc.ff_act, d_act);
        MatS d_h1 = d_res2 + blk.ff1.backward(lc.hidden1, d_act);

        const MatS d_res1 = blk.norm1.backward(lc.norm1, d_h1);
        MatS d_attn = d_res1;
        if (lc.attn_mask.size() != 0) d_attn.array() *= lc.attn_mask.array();
        const MatS d_concat = blk.out.backward(lc.attn_concat, d_attn);

        MatS dq(d_concat.rows(), dm);
        MatS dk(d_concat.rows(), dm);
        MatS dv(d_concat.rows(), dm);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int hd = 0; hd < heads; ++hd) {
                const MatS& p = lc.probs[static_cast<std::size_t>(b * heads + hd)];
                const auto d_out = d_concat.block(b * frames, hd * dh, frames, dh);
                const auto qh = lc.q.block(b * frames, hd * dh, frames, dh);
                const auto kh = lc.k.block(b * frames, hd * dh, frames, dh);
                const auto vh = lc.v.block(b * frames, hd * dh, frames, dh);
                dv.block(b * frames, hd * dh, frames, dh).noalias() = p.transpose() * d_out;
                MatS dp = d_out * vh.transpose();
                const auto row_dot = (dp.array() * p.array()).rowwise().sum().eval();
                MatS ds = (p.array() * (dp.array().colwise() - row_dot)).matrix() * scale;
                dq.block(b * frames, hd * dh, frames, dh).noalias() = ds * kh;
                dk.block(b * frames, hd * dh, frames, dh).noalias() = ds.transpose() * qh;
            }
        }
        MatS d_input = d_res1;
        d_input += blk.query.backward(lc.input, dq);
        d_input += blk.key.backward(lc.input, dk);
        d_input += blk.value.backward(lc.input, dv);
        dh_states = std::move(d_input);
    }
    input_projection.backward_params(cache.input, dh_states);
}

template <typename Scalar>
std::vector<GaussianToken<Scalar>> TransformerEncoder<Scalar>::encode(const MatS& x) const {
    const Output out = forward(x, 1, x.rows(), nullptr);
    const auto segments = segment_bounds(x.rows(), config_.n_tokens);
    std::vector<GaussianToken<Scalar>> tokens(static_cast<std::size_t>(config_.n_tokens));
    for (int k = 0; k < config_.n_tokens; ++k) {
        auto& tok = tokens[static_cast<std::size_t>(k)];
        tok.mean = out.means.row(k).transpose();
        tok.log_var = out.log_vars.row(k).transpose();
        tok.token_index = k;
        tok.segment_begin = segments[static_cast<std::size_t>(k)].begin;
        tok.segment_end = segments[static_cast<std::size_t>(k)].end;
    }
    return tokens;
}

template <typename Scalar>
typename TransformerEncoder<Scalar>::MatS TransformerEncoder<Scalar>::frame_states(
    const MatS& x) const {
    return run_blocks(x, 1, x.rows(), nullptr, nullptr);
}

template <typename Scalar>
void TransformerEncoder<Scalar>::collect(nn::ParameterList<Scalar>& out) {
    input_projection.collect(out);
    for (Block& b : blocks) {
        b.query.collect(out);
        b.key.collect(out);
        b.value.collect(out);
        b.out.collect(out);
        b.norm1.collect(out);
        b.ff1.collect(out);
        b.ff2.collect(out);
        b.norm2.collect(out);
    }
    mean_head.collect(out);
    log_var_head.collect(out);
}

template nn::Mat<float> segment_pool<float>(const nn::Mat<float>&, int);
template nn::Mat<double> segment_pool<double>(const nn::Mat<double>&, int);
template nn::Mat<float> sinusoidal_encoding<float>(Eigen::Index, Eigen::Index);
template nn::Mat<double> sinusoidal_encoding<double>(Eigen::Index, Eigen::Index);
template Eigen::Matrix<float, Eigen::Dynamic, 1> initial_state<float>(
    const GaussianToken<float>&, InitialStateMode, Rng&);
template Eigen::Matrix<double, Eigen::Dynamic, 1> initial_state<double>(
    const GaussianToken<double>&, InitialStateMode, Rng&);
template class TransformerEncoder<float>;
template class TransformerEncoder<double>;

}  // namespace latentmotion
