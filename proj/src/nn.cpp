#include "latentmotion/nn.hpp"

#include <cmath>

namespace latentmotion::nn {

template <typename Scalar>
Linear<Scalar>::Linear(const std::string& name, Eigen::Index in, Eigen::Index out) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.resize(out, in);
    bias.resize(1, out);
}

template <typename Scalar>
void Linear<Scalar>::initialize(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_features()));
    for (Eigen::Index r = 0; r < weight.value.rows(); ++r) {
        for (Eigen::Index c = 0; c < weight.value.cols(); ++c) {
            weight.value(r, c) = static_cast<Scalar>(uniform(rng, -bound, bound));
        }
    }
    bias.value.setZero();
}

template <typename Scalar>
Mat<Scalar> Linear<Scalar>::forward(const Mat<Scalar>& x) const {
    Mat<Scalar> y = x * weight.value.transpose();
    y.rowwise() += bias.value.row(0);
    return y;
}

template <typename Scalar>
void Linear<Scalar>::backward_params(const Mat<Scalar>& x, const Mat<Scalar>& dy) {
    weight.grad.noalias() += dy.transpose() * x;
    bias.grad += dy.colwise().sum();
}

template <typename Scalar>
Mat<Scalar> Linear<Scalar>::backward(const Mat<Scalar>& x, const Mat<Scalar>& dy) {
    backward_params(x, dy);
    return dy * weight.value;
}

template <typename Scalar>
void Linear<Scalar>::collect(ParameterList<Scalar>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

template <typename Scalar>
LayerNorm<Scalar>::LayerNorm(const std::string& name, Eigen::Index dim) {
    gain.name = name + ".gain";
    shift.name = name + ".shift";
    gain.resize(1, dim);
    gain.value.setOnes();
    shift.resize(1, dim);
}

template <typename Scalar>
Mat<Scalar> LayerNorm<Scalar>::forward(const Mat<Scalar>& x, Cache* cache) const {
    const Eigen::Index n = x.cols();
    Mat<Scalar> normalized(x.rows(), n);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Scalar mean = x.row(r).sum() / Scalar(n);
        const auto centered = (x.row(r).array() - mean).eval();
        const Scalar var = centered.square().sum() / Scalar(n);
        inv_std(r) = Scalar(1) / std::sqrt(var + eps);
        normalized.row(r) = centered * inv_std(r);
    }
    Mat<Scalar> y = normalized.array().rowwise() * gain.value.row(0).array();
    y.rowwise() += shift.value.row(0);
    if (cache != nullptr) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

template <typename Scalar>
Mat<Scalar> LayerNorm<Scalar>::backward(const Cache& cache, const Mat<Scalar>& dy) {
    const Eigen::Index n = dy.cols();
    gain.grad += (dy.array() * cache.normalized.array()).matrix().colwise().sum();
    shift.grad += dy.colwise().sum();
    const Mat<Scalar> dnorm = dy.array().rowwise() * gain.value.row(0).array();
    Mat<Scalar> dx(dy.rows(), n);
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const Scalar sum_d = dnorm.row(r).sum();
        const Scalar sum_dx = dnorm.row(r).dot(cache.normalized.row(r));
        dx.row(r) = (cache.inv_std(r) / Scalar(n)) *
                    (Scalar(n) * dnorm.row(r).array() - sum_d -
                     cache.normalized.row(r).array() * sum_dx)
                        .matrix();
    }
    return dx;
}

template <typename Scalar>
void LayerNorm<Scalar>::collect(ParameterList<Scalar>& out) {
    out.push_back(&gain);
    out.push_back(&shift);
}

template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;

}  // namespace latentmotion::nn
