#pragma once

#include "latentmotion/decoder.hpp"
#include "latentmotion/encoder.hpp"
#include "latentmotion/latent_dynamics.hpp"

#include <cstdint>

namespace latentmotion {

struct ModelConfig {
    EncoderConfig encoder;
    VectorFieldConfig vector_field;
    DecoderConfig decoder;

    /// Checks each component and that the latent and feature dims agree.
    void validate() const;
};

/// Encoder, latent vector field and decoder trained end to end.
template <typename Scalar>
class LatentOdeModel {
public:
    LatentOdeModel() = default;
    explicit LatentOdeModel(const ModelConfig& config);

    void initialize(std::uint64_t seed);

    /// Deterministic order: encoder, vector field, decoder.
    nn::ParameterList<Scalar> parameters();
    std::size_t parameter_count();
    void zero_grad();

    const ModelConfig& config() const { return config_; }

    TransformerEncoder<Scalar> encoder;
    VectorField<Scalar> field;
    MlpDecoder<Scalar> decoder;

private:
    ModelConfig config_;
};

}  // namespace latentmotion
