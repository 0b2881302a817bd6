#include "dcfb/nn.hpp"

#include <cmath>
#include <string>

#include "dcfb/errors.hpp"

namespace dcfb {

DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng) {
    if (in_dim == 0 || out_dim == 0) throw InputError("make_dense_layer: zero dimension");
    DenseLayer layer;
    layer.weights = Matrix(out_dim, in_dim);
    layer.bias.assign(out_dim, 0.0);
    layer.activation = activation;
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
    return layer;
}

std::size_t param_count(const DenseNetwork& net) {
    std::size_t total = 0;
    for (const DenseLayer& layer : net.layers) total += layer.param_count();
    return total;
}

void validate_chain(const DenseNetwork& net) {
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        if (net.layers[l].in_dim() != net.layers[l - 1].out_dim()) {
            throw InputError("network layers " + std::to_string(l - 1) + " and " +
                             std::to_string(l) + " are dimension-incompatible");
        }
    }
}

namespace {

void apply_activation(Matrix& m, Activation activation) {
    if (activation == Activation::Relu) {
        for (double& v : m.data()) {
            if (v < 0.0) v = 0.0;
        }
    }
}

} // namespace

Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache* cache) {
    if (net.layers.empty()) throw InputError("forward: empty network");
    validate_chain(net);
    if (input.rows() != net.in_dim()) {
        throw InputError("forward: input has " + std::to_string(input.rows()) +
                         " rows, network expects " + std::to_string(net.in_dim()));
    }
    if (cache) {
        cache->input = input;
        cache->pre_activations.clear();
        cache->activations.clear();
    }
    Matrix current = input;
    for (const DenseLayer& layer : net.layers) {
        Matrix z = matmul(layer.weights, current);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const double b = layer.bias[r];
            double* row = z.row(r);
            for (std::size_t c = 0; c < z.cols(); ++c) row[c] += b;
        }
        if (cache) cache->pre_activations.push_back(z);
        apply_activation(z, layer.activation);
        if (cache) cache->activations.push_back(z);
        current = std::move(z);
    }
    return current;
}

BackwardResult backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& grad_output) {
    const std::size_t depth = net.layers.size();
    if (depth == 0) throw InputError("backward: empty network");
    if (cache.pre_activations.size() != depth || cache.activations.size() != depth) {
        throw InputError("backward: cache does not match network depth");
    }
    if (cache.input.rows() != net.in_dim()) {
        throw InputError("backward: cache input dimension does not match network");
    }
    const std::size_t batch = cache.input.cols();
    for (std::size_t l = 0; l < depth; ++l) {
        if (cache.pre_activations[l].rows() != net.layers[l].out_dim() ||
            cache.pre_activations[l].cols() != batch) {
            throw InputError("backward: stale cache at layer " + std::to_string(l));
        }
    }
    if (grad_output.rows() != net.out_dim() || grad_output.cols() != batch) {
        throw InputError("backward: grad_output shape does not match cached forward");
    }

    BackwardResult result;
    result.layers.resize(depth);

    Matrix delta = grad_output;
    for (std::size_t l = depth; l-- > 0;) {
        const DenseLayer& layer = net.layers[l];
        if (layer.activation == Activation::Relu) {
            const Matrix& pre = cache.pre_activations[l];
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (pre.data()[i] <= 0.0) delta.data()[i] = 0.0;
            }
        }
        const Matrix& below = (l == 0) ? cache.input : cache.activations[l - 1];
        result.layers[l].weights = matmul_transpose_b(delta, below);
        result.layers[l].bias.assign(layer.out_dim(), 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const double* row = delta.row(r);
            double sum = 0.0;
            for (std::size_t c = 0; c < delta.cols(); ++c) sum += row[c];
            result.layers[l].bias[r] = sum;
        }
        delta = matmul_transpose_a(layer.weights, delta);
    }
    result.input_gradient = std::move(delta);
    return result;
}

MseResult mse_loss(const Matrix& prediction, const Matrix& target) {
    if (!prediction.same_shape(target)) {
        throw InputError("mse_loss: prediction and target shapes differ");
    }
    if (prediction.empty()) throw InputError("mse_loss: empty input");
    MseResult result;
    result.gradient = Matrix(prediction.rows(), prediction.cols());
    const double scale = 1.0 / static_cast<double>(prediction.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double diff = prediction.data()[i] - target.data()[i];
        sum += diff * diff;
        result.gradient.data()[i] = 2.0 * diff * scale;
    }
    result.loss = sum * scale;
    return result;
}

ParamView param_view(DenseNetwork& net) {
    ParamView view;
    view.reserve(net.layers.size() * 2);
    for (DenseLayer& layer : net.layers) {
        view.push_back(layer.weights.data());
        view.push_back(layer.bias);
    }
    return view;
}

ConstParamView grad_view(const BackwardResult& grads) {
    ConstParamView view;
    view.reserve(grads.layers.size() * 2);
    for (const LayerGradients& layer : grads.layers) {
        view.push_back(layer.weights.data());
        view.push_back(layer.bias);
    }
    return view;
}

std::size_t total_size(const ParamView& view) {
    std::size_t total = 0;
    for (const auto& chunk : view) total += chunk.size();
    return total;
}

void adam_step(const ParamView& params, const ConstParamView& grads, AdamState& state) {
    if (params.size() != grads.size()) throw InputError("adam_step: param/grad chunk counts differ");
    std::size_t total = 0;
    for (std::size_t c = 0; c < params.size(); ++c) {
        if (params[c].size() != grads[c].size()) {
            throw InputError("adam_step: param/grad chunk " + std::to_string(c) + " sizes differ");
        }
        total += params[c].size();
    }
    if (state.first_moments.size() != total || state.second_moments.size() != total) {
        throw InputError("adam_step: state size does not match parameter count");
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    std::size_t flat = 0;
    for (std::size_t c = 0; c < params.size(); ++c) {
        std::span<double> p = params[c];
        std::span<const double> g = grads[c];
        for (std::size_t i = 0; i < p.size(); ++i, ++flat) {
            const double grad = g[i];
            if (!std::isfinite(grad)) {
                throw OptimError("adam_step: non-finite gradient at flat index " + std::to_string(flat));
            }
            double& m = state.first_moments[flat];
            double& v = state.second_moments[flat];
            m = state.beta1 * m + (1.0 - state.beta1) * grad;
            v = state.beta2 * v + (1.0 - state.beta2) * grad * grad;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace dcfb
