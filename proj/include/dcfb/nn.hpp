#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcfb/matrix.hpp"
#include "dcfb/rng.hpp"

namespace dcfb {

// Activation codes double as the on-disk encoding.
enum class Activation : std::uint32_t { Identity = 0, Relu = 1 };

struct DenseLayer {
    Matrix weights;            // out_dim x in_dim
    std::vector<double> bias;  // out_dim
    Activation activation = Activation::Identity;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }
    std::size_t param_count() const { return weights.size() + bias.size(); }
};

// Glorot-uniform weights in [-sqrt(6/(in+out)), +sqrt(6/(in+out))], zero bias.
DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng);

struct DenseNetwork {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }
};

std::size_t param_count(const DenseNetwork& net);

// Checks consecutive layers are dimension-compatible; throws InputError.
void validate_chain(const DenseNetwork& net);

// Pre- and post-activation values of every layer, kept for backward().
struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre_activations;
    std::vector<Matrix> activations;
};

// Input is in_dim x batch (columns are samples); returns out_dim x batch.
Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache* cache = nullptr);

struct LayerGradients {
    Matrix weights;
    std::vector<double> bias;
};

struct BackwardResult {
    std::vector<LayerGradients> layers;
    // Gradient with respect to the network input. Lets the error propagate
    // through a frozen tail network into the models upstream of it.
    Matrix input_gradient;
};

BackwardResult backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& grad_output);

struct MseResult {
    double loss = 0.0;
    Matrix gradient;  // d loss / d prediction
};

// Mean over all entries of the squared difference.
MseResult mse_loss(const Matrix& prediction, const Matrix& target);

// Flattened parameter access for the optimizer. Chunk order is layer 0
// weights, layer 0 bias, layer 1 weights, ... for a network.
using ParamView = std::vector<std::span<double>>;
using ConstParamView = std::vector<std::span<const double>>;

ParamView param_view(DenseNetwork& net);
ConstParamView grad_view(const BackwardResult& grads);

struct AdamState {
    std::vector<double> first_moments;
    std::vector<double> second_moments;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-3;

    AdamState() = default;
    explicit AdamState(std::size_t total_params, double lr = 1e-3)
        : first_moments(total_params, 0.0), second_moments(total_params, 0.0), learning_rate(lr) {}
};

// Standard Adam update with bias correction; increments state.step.
// Throws OptimError naming the flat index of any non-finite gradient entry.
void adam_step(const ParamView& params, const ConstParamView& grads, AdamState& state);

std::size_t total_size(const ParamView& view);

} // namespace dcfb
