#include "latentmotion/model.hpp"

#include "latentmotion/errors.hpp"
#include "latentmotion/random.hpp"

namespace latentmotion {

void ModelConfig::validate() const {
    encoder.validate();
    vector_field.validate();
    decoder.validate();
    if (encoder.latent_dim != vector_field.latent_dim || encoder.latent_dim != decoder.latent_dim) {
        throw ConfigurationError("encoder, vector field and decoder disagree on latent_dim");
    }
    if (decoder.output_dim != encoder.input_dim) {
        throw ConfigurationError("decoder output_dim must equal encoder input_dim");
    }
}

template <typename Scalar>
LatentOdeModel<Scalar>::LatentOdeModel(const ModelConfig& config)
    : encoder((config.validate(), config.encoder)),
      field(config.vector_field),
      decoder(config.decoder),
      config_(config) {}

template <typename Scalar>
void LatentOdeModel<Scalar>::initialize(std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x1417);
    encoder.initialize(rng);
    field.initialize(rng);
    decoder.initialize(rng);
}

template <typename Scalar>
nn::ParameterList<Scalar> LatentOdeModel<Scalar>::parameters() {
    nn::ParameterList<Scalar> out;
    encoder.collect(out);
    field.collect(out);
    decoder.collect(out);
    return out;
}

template <typename Scalar>
std::size_t LatentOdeModel<Scalar>::parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += static_cast<std::size_t>(p->value.size());
    return n;
}

template <typename Scalar>
void LatentOdeModel<Scalar>::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

template class LatentOdeModel<float>;
template class LatentOdeModel<double>;

}  // namespace latentmotion
