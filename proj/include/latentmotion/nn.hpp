#pragma once

#include "latentmotion/random.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace latentmotion::nn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// A named tensor with its accumulated gradient.
template <typename Scalar>
struct Parameter {
    std::string name;
    Mat<Scalar> value;
    Mat<Scalar> grad;

    void resize(Eigen::Index rows, Eigen::Index cols) {
        value = Mat<Scalar>::Zero(rows, cols);
        grad = Mat<Scalar>::Zero(rows, cols);
    }
    void zero_grad() { grad.setZero(); }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;

/// y = x W^T + b applied row-wise. W is out x in.
template <typename Scalar>
class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, Eigen::Index in, Eigen::Index out);

    /// U(-1/sqrt(in), 1/sqrt(in)) weights, zero bias.
    void initialize(Rng& rng);

    Mat<Scalar> forward(const Mat<Scalar>& x) const;
    /// Accumulates parameter gradients and returns dL/dx.
    Mat<Scalar> backward(const Mat<Scalar>& x, const Mat<Scalar>& dy);
    /// Accumulates parameter gradients only.
    void backward_params(const Mat<Scalar>& x, const Mat<Scalar>& dy);

    void collect(ParameterList<Scalar>& out);

    Eigen::Index in_features() const { return weight.value.cols(); }
    Eigen::Index out_features() const { return weight.value.rows(); }

    Parameter<Scalar> weight;
    Parameter<Scalar> bias;
};

/// Row-wise layer normalization with learned gain and shift.
template <typename Scalar>
class LayerNorm {
public:
    struct Cache {
        Mat<Scalar> normalized;
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std;
    };

    LayerNorm() = default;
    LayerNorm(const std::string& name, Eigen::Index dim);

    Mat<Scalar> forward(const Mat<Scalar>& x, Cache* cache) const;
    Mat<Scalar> backward(const Cache& cache, const Mat<Scalar>& dy);
    void collect(ParameterList<Scalar>& out);

    Parameter<Scalar> gain;
    Parameter<Scalar> shift;
    Scalar eps = Scalar(1e-5);
};

template <typename Scalar>
Mat<Scalar> relu(const Mat<Scalar>& x) {
    return x.cwiseMax(Scalar(0));
}

/// dL/dx of relu given its output.
template <typename Scalar>
Mat<Scalar> relu_backward(const Mat<Scalar>& y, const Mat<Scalar>& dy) {
    return (y.array() > Scalar(0)).select(dy, Scalar(0));
}

template <typename Scalar>
Mat<Scalar> tanh_backward(const Mat<Scalar>& y, const Mat<Scalar>& dy) {
    return (dy.array() * (Scalar(1) - y.array().square())).matrix();
}

}  // namespace latentmotion::nn
