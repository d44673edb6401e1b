#include "latentmotion/decoder.hpp"

#include "latentmotion/errors.hpp"

namespace latentmotion {

void DecoderConfig::validate() const {
    if (latent_dim < 1) throw ConfigurationError("decoder latent_dim must be positive");
    if (hidden_dims.size() != 2) {
        throw ConfigurationError("decoder must have exactly two hidden layers");
    }
    for (int h : hidden_dims) {
        if (h < 1) throw ConfigurationError("decoder hidden widths must be positive");
    }
    if (output_dim < 1) throw ConfigurationError("decoder output_dim must be positive");
}

template <typename Scalar>
MlpDecoder<Scalar>::MlpDecoder(const DecoderConfig& config) : config_(config) {
    config_.validate();
    layer1 = nn::Linear<Scalar>("decoder.layer1", config_.latent_dim, config_.hidden_dims[0]);
    layer2 = nn::Linear<Scalar>("decoder.layer2", config_.hidden_dims[0], config_.hidden_dims[1]);
    layer3 = nn::Linear<Scalar>("decoder.layer3", config_.hidden_dims[1], config_.output_dim);
}

template <typename Scalar>
void MlpDecoder<Scalar>::initialize(Rng& rng) {
    layer1.initialize(rng);
    layer2.initialize(rng);
    layer3.initialize(rng);
}

template <typename Scalar>
typename MlpDecoder<Scalar>::MatS MlpDecoder<Scalar>::forward(const MatS& latent,
                                                             Cache* cache) const {
    MatS act1 = nn::relu<Scalar>(layer1.forward(latent));
    MatS act2 = nn::relu<Scalar>(layer2.forward(act1));
    MatS out = layer3.forward(act2);
    if (!out.allFinite()) {
        throw NumericError("decoder", "non-finite decoder output");
    }
    if (cache != nullptr) {
        cache->input = latent;
        cache->act1 = std::move(act1);
        cache->act2 = std::move(act2);
    }
    return out;
}

template <typename Scalar>
typename MlpDecoder<Scalar>::MatS MlpDecoder<Scalar>::backward(const Cache& cache,
                                                              const MatS& d_out) {
    MatS d2 = nn::relu_backward<Scalar>(cache.act2, layer3.backward(cache.act2, d_out));
    MatS d1 = nn::relu_backward<Scalar>(cache.act1, layer2.backward(cache.act1, d2));
    return layer1.backward(cache.input, d1);
}

template <typename Scalar>
void MlpDecoder<Scalar>::collect(nn::ParameterList<Scalar>& out) {
    layer1.collect(out);
    layer2.collect(out);
    layer3.collect(out);
}

template class MlpDecoder<float>;
template class MlpDecoder<double>;

}  // namespace latentmotion
