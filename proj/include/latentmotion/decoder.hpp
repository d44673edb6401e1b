#pragma once

#include "latentmotion/nn.hpp"

#include <vector>

namespace latentmotion {

struct DecoderConfig {
    int latent_dim = 3;
    std::vector<int> hidden_dims{256, 256};
    int output_dim = 45;

    void validate() const;
};

/// Frame-wise MLP decoder: latent state -> relu -> relu -> linear.
template <typename Scalar>
class MlpDecoder {
public:
    using MatS = nn::Mat<Scalar>;

    struct Cache {
        MatS input;
        MatS act1;
        MatS act2;
    };

    MlpDecoder() = default;
    explicit MlpDecoder(const DecoderConfig& config);

    void initialize(Rng& rng);

    /// Each row of `latent` is decoded independently.
    MatS forward(const MatS& latent, Cache* cache) const;
    MatS backward(const Cache& cache, const MatS& d_out);

    MatS decode(const MatS& latent) const { return forward(latent, nullptr); }

    void collect(nn::ParameterList<Scalar>& out);
    const DecoderConfig& config() const { return config_; }

    nn::Linear<Scalar> layer1, layer2, layer3;

private:
    DecoderConfig config_;
};

}  // namespace latentmotion
