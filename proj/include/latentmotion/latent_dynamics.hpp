#pragma once

#include "latentmotion/errors.hpp"
#include "latentmotion/nn.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace latentmotion {

struct VectorFieldConfig {
    int latent_dim = 3;
    std::vector<int> hidden_dims{128, 128};
    bool time_input = true;

    void validate() const;
};

/// Strictly increasing sample times. `uniform(T)` spans [0, 1] with h = 1/(T-1).
struct TimeGrid {
    std::vector<double> times;

    static TimeGrid uniform(Eigen::Index n_points, double start = 0.0, double end = 1.0);
    Eigen::Index size() const { return static_cast<Eigen::Index>(times.size()); }
};

template <typename Scalar>
struct LatentPath {
    nn::Mat<Scalar> states;  // T x d, states.row(0) == initial
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> initial;
};

/// MLP vector field f(z, t): [z; t] -> tanh -> tanh -> linear.
template <typename S>
class VectorField {
public:
    using Scalar = S;
    using MatS = nn::Mat<Scalar>;

    struct Cache {
        MatS input;
        MatS act1;
        MatS act2;
    };

    VectorField() = default;
    explicit VectorField(const VectorFieldConfig& config);

    void initialize(Rng& rng);

    /// Batched evaluation; each row of `z` is one state.
    MatS forward(const MatS& z, Scalar t, Cache* cache) const;
    /// Returns dL/dz, accumulating parameter gradients.
    MatS backward(const Cache& cache, const MatS& d_out);

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate(
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z, Scalar t) const;

    void collect(nn::ParameterList<Scalar>& out);
    const VectorFieldConfig& config() const { return config_; }

    nn::Linear<Scalar> layer1, layer2, layer3;

private:
    VectorFieldConfig config_;
};

/// Unrolled classical RK4, one step per grid interval, with an optional tape
/// for backpropagation through the solve. `Field` provides
/// `forward(z, t, Cache*)` and `backward(const Cache&, d_out)`.
template <typename Field>
class Rk4Integrator {
public:
    using Scalar = typename Field::Scalar;
    using MatS = nn::Mat<Scalar>;

    struct StepTape {
        typename Field::Cache stage[4];
    };
    struct Tape {
        std::vector<double> times;
        std::vector<StepTape> steps;
    };

    /// Returns one B x d matrix per grid point; states[0] is z0.
    static std::vector<MatS> integrate(const Field& field, const MatS& z0, const TimeGrid& grid,
                                       Tape* tape) {
        if (grid.times.empty()) throw ConfigurationError("empty time grid");
        if (!z0.allFinite()) throw IntegrationError(0, "non-finite initial state");
        const std::size_t n = grid.times.size();
        std::vector<MatS> states;
        states.reserve(n);
        states.push_back(z0);
        if (tape != nullptr) {
            tape->times = grid.times;
            tape->steps.assign(n - 1, StepTape{});
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const Scalar t = static_cast<Scalar>(grid.times[i]);
            const Scalar h = static_cast<Scalar>(grid.times[i + 1] - grid.times[i]);
            const Scalar half = h / Scalar(2);
            StepTape* st = tape != nullptr ? &tape->steps[i] : nullptr;
            const MatS& z = states.back();
            MatS next;
            try {
                const MatS k1 = field.forward(z, t, st ? &st->stage[0] : nullptr);
                const MatS k2 = field.forward(z + half * k1, t + half, st ? &st->stage[1] : nullptr);
                const MatS k3 = field.forward(z + half * k2, t + half, st ? &st->stage[2] : nullptr);
                const MatS k4 = field.forward(z + h * k3, t + h, st ? &st->stage[3] : nullptr);
                next = z + (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
            } catch (const NumericError&) {
                throw IntegrationError(i, "non-finite vector field at step " + std::to_string(i));
            }
            if (!next.allFinite()) {
                throw IntegrationError(i, "non-finite latent state at step " + std::to_string(i));
            }
            states.push_back(std::move(next));
        }
        return states;
    }

    /// Given dL/d(states[i]) for every grid point, returns dL/dz0 and
    /// accumulates the field's parameter gradients.
    static MatS backward(Field& field, const Tape& tape, const std::vector<MatS>& d_states) {
        const std::size_t n = tape.times.size();
        MatS dz = d_states.back();
        for (std::size_t i = n - 1; i-- > 0;) {
            const Scalar h = static_cast<Scalar>(tape.times[i + 1] - tape.times[i]);
            const Scalar half = h / Scalar(2);
            const StepTape& st = tape.steps[i];
            MatS dk4 = (h / Scalar(6)) * dz;
            MatS dk3 = (h / Scalar(3)) * dz;
            MatS dk2 = (h / Scalar(3)) * dz;
            MatS dk1 = (h / Scalar(6)) * dz;
            MatS d_prev = dz;

            const MatS du4 = field.backward(st.stage[3], dk4);  // u4 = z + h k3
            d_prev += du4;
            dk3 += h * du4;
            const MatS du3 = field.backward(st.stage[2], dk3);  // u3 = z + h/2 k2
            d_prev += du3;
            dk2 += half * du3;
            const MatS du2 = field.backward(st.stage[1], dk2);  // u2 = z + h/2 k1
            d_prev += du2;
            dk1 += half * du2;
            d_prev += field.backward(st.stage[0], dk1);

            dz = std::move(d_prev);
            dz += d_states[i];
        }
        return dz;
    }
};

/// Single-trajectory convenience wrapper.
template <typename Scalar>
LatentPath<Scalar> integrate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z0,
                             const TimeGrid& grid, const VectorField<Scalar>& field);

}  // namespace latentmotion
