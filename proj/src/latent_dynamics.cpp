#include "latentmotion/latent_dynamics.hpp"

#include "latentmotion/errors.hpp"

#include <string>

namespace latentmotion {

void VectorFieldConfig::validate() const {
    if (latent_dim < 1) throw ConfigurationError("vector field latent_dim must be positive");
    if (hidden_dims.size() != 2) {
        throw ConfigurationError("vector field must have exactly two hidden layers");
    }
    for (int h : hidden_dims) {
        if (h < 1) throw ConfigurationError("vector field hidden widths must be positive");
    }
}

TimeGrid TimeGrid::uniform(Eigen::Index n_points, double start, double end) {
    if (n_points < 1) throw ConfigurationError("time grid needs at least one point");
    if (n_points > 1 && !(end > start)) throw ConfigurationError("time grid must increase");
    TimeGrid grid;
    grid.times.resize(static_cast<std::size_t>(n_points));
    const double h = n_points > 1 ? (end - start) / static_cast<double>(n_points - 1) : 0.0;
    for (Eigen::Index i = 0; i < n_points; ++i) {
        grid.times[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * h;
    }
    if (n_points > 1) grid.times.back() = end;
    return grid;
}

template <typename Scalar>
VectorField<Scalar>::VectorField(const VectorFieldConfig& config) : config_(config) {
    config_.validate();
    const int in = config_.latent_dim + (config_.time_input ? 1 : 0);
    layer1 = nn::Linear<Scalar>("vector_field.layer1", in, config_.hidden_dims[0]);
    layer2 = nn::Linear<Scalar>("vector_field.layer2", config_.hidden_dims[0],
                                config_.hidden_dims[1]);
    layer3 = nn::Linear<Scalar>("vector_field.layer3", config_.hidden_dims[1], config_.latent_dim);
}

template <typename Scalar>
void VectorField<Scalar>::initialize(Rng& rng) {
    layer1.initialize(rng);
    layer2.initialize(rng);
    layer3.initialize(rng);
}

template <typename Scalar>
typename VectorField<Scalar>::MatS VectorField<Scalar>::forward(const MatS& z, Scalar t,
                                                               Cache* cache) const {
    MatS input;
    if (config_.time_input) {
        input.resize(z.rows(), z.cols() + 1);
        input.leftCols(z.cols()) = z;
        input.col(z.cols()).setConstant(t);
    } else {
        input = z;
    }
    MatS act1 = layer1.forward(input).array().tanh().matrix();
    MatS act2 = layer2.forward(act1).array().tanh().matrix();
    MatS out = layer3.forward(act2);
    if (!out.allFinite()) {
        throw NumericError("vector field", "non-finite vector field output");
    }
    if (cache != nullptr) {
        cache->input = std::move(input);
        cache->act1 = std::move(act1);
        cache->act2 = std::move(act2);
    }
    return out;
}

template <typename Scalar>
typename VectorField<Scalar>::MatS VectorField<Scalar>::backward(const Cache& cache,
                                                                const MatS& d_out) {
    MatS d2 = nn::tanh_backward<Scalar>(cache.act2, layer3.backward(cache.act2, d_out));
    MatS d1 = nn::tanh_backward<Scalar>(cache.act1, layer2.backward(cache.act1, d2));
    MatS d_in = layer1.backward(cache.input, d1);
    return d_in.leftCols(config_.latent_dim);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> VectorField<Scalar>::evaluate(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z, Scalar t) const {
    const MatS row = z.transpose();
    return forward(row, t, nullptr).row(0).transpose();
}

template <typename Scalar>
void VectorField<Scalar>::collect(nn::ParameterList<Scalar>& out) {
    layer1.collect(out);
    layer2.collect(out);
    layer3.collect(out);
}

template <typename Scalar>
LatentPath<Scalar> integrate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z0,
                             const TimeGrid& grid, const VectorField<Scalar>& field) {
    const nn::Mat<Scalar> start = z0.transpose();
    const auto states = Rk4Integrator<VectorField<Scalar>>::integrate(field, start, grid, nullptr);
    LatentPath<Scalar> path;
    path.initial = z0;
    path.states.resize(static_cast<Eigen::Index>(states.size()), z0.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        path.states.row(static_cast<Eigen::Index>(i)) = states[i].row(0);
    }
    return path;
}

template class VectorField<float>;
template class VectorField<double>;
template LatentPath<float> integrate<float>(const Eigen::Matrix<float, Eigen::Dynamic, 1>&,
                                            const TimeGrid&, const VectorField<float>&);
template LatentPath<double> integrate<double>(const Eigen::Matrix<double, Eigen::Dynamic, 1>&,
                                              const TimeGrid&, const VectorField<double>&);

}  // namespace latentmotion
