#pragma once

#include "latentmotion/nn.hpp"
#include "latentmotion/random.hpp"

#include <Eigen/Core>

#include <vector>

namespace latentmotion {

struct EncoderConfig {
    int n_layers = 3;
    int n_heads = 8;
    int model_dim = 256;
    int latent_dim = 3;
    int n_tokens = 12;
    int feedforward_dim = 1024;
    double dropout = 0.0;
    int input_dim = 45;

    void validate() const;
};

/// Diagonal Gaussian posterior for one latent token. Token 0 is the initial
/// condition of the latent flow.
template <typename Scalar>
struct GaussianToken {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_var;
    int token_index = 0;
    /// Frames [segment_begin, segment_end) pooled into this token.
    Eigen::Index segment_begin = 0;
    Eigen::Index segment_end = 0;
};

using CausalMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// mask(t, j) is true iff position t may attend to position j (j <= t).
CausalMask causal_frame_mask(Eigen::Index frames);

struct Segment {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    Eigen::Index size() const { return end - begin; }
};

/// K contiguous segments whose sizes differ by at most one, longer first.
std::vector<Segment> segment_bounds(Eigen::Index frames, int n_tokens);

/// Mean of the frame states in each segment; returns K x model_dim.
template <typename Scalar>
nn::Mat<Scalar> segment_pool(const nn::Mat<Scalar>& frame_states, int n_tokens);

/// Fixed sinusoidal position encoding, frames x dim.
template <typename Scalar>
nn::Mat<Scalar> sinusoidal_encoding(Eigen::Index frames, Eigen::Index dim);

enum class InitialStateMode { Mean, Sample };

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> initial_state(const GaussianToken<Scalar>& token,
                                                        InitialStateMode mode, Rng& rng);

/// Causal transformer encoder: input projection, sinusoidal positions,
/// post-norm self-attention blocks, segment pooling and Gaussian heads.
template <typename Scalar>
class TransformerEncoder {
public:
    using MatS = nn::Mat<Scalar>;

    struct Output {
        MatS means;     // (batch * K) x d
        MatS log_vars;  // (batch * K) x d
    };

    struct LayerCache {
        MatS input;
        MatS q, k, v;
        std::vector<MatS> probs;  // one T x T matrix per (trial, head)
        MatS attn_concat;
        MatS attn_mask;
        typename nn::LayerNorm<Scalar>::Cache norm1;
        MatS hidden1;
        MatS ff_act;
        MatS ff_mask;
        typename nn::LayerNorm<Scalar>::Cache norm2;
    };

    struct Cache {
        Eigen::Index batch = 0;
        Eigen::Index frames = 0;
        MatS input;
        std::vector<LayerCache> layers;
        MatS pooled;
    };

    TransformerEncoder() = default;
    explicit TransformerEncoder(const EncoderConfig& config);

    void initialize(Rng& rng);

    /// `stacked` holds `batch` trials of `frames` rows each. Dropout is only
    /// applied when `dropout_rng` is non-null and the configured rate is > 0.
    Output forward(const MatS& stacked, Eigen::Index batch, Eigen::Index frames, Cache* cache,
                   Rng* dropout_rng = nullptr) const;

    /// Backpropagates gradients of the token means and log-variances.
    void backward(const Cache& cache, const MatS& d_means, const MatS& d_log_vars);

    /// Single-trial encode returning K tokens.
    std::vector<GaussianToken<Scalar>> encode(const MatS& x) const;

    /// Per-frame states after the last attention block (frames x model_dim).
    MatS frame_states(const MatS& x) const;

    void collect(nn::ParameterList<Scalar>& out);
    const EncoderConfig& config() const { return config_; }

    struct Block {
        nn::Linear<Scalar> query, key, value, out;
        nn::LayerNorm<Scalar> norm1;
        nn::Linear<Scalar> ff1, ff2;
        nn::LayerNorm<Scalar> norm2;
    };

    nn::Linear<Scalar> input_projection;
    std::vector<Block> blocks;
    nn::Linear<Scalar> mean_head;
    nn::Linear<Scalar> log_var_head;

private:
    MatS run_blocks(const MatS& stacked, Eigen::Index batch, Eigen::Index frames, Cache* cache,
                    Rng* dropout_rng) const;

    EncoderConfig config_;
};

}  // namespace latentmotion
