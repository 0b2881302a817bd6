#include "dcfb/models.hpp"

#include <cmath>
#include <sstream>

#include "dcfb/errors.hpp"

namespace dcfb {

namespace {

constexpr std::uint64_t kSparsifierTag = 0x51;
constexpr std::uint64_t kDenoiserTag = 0x52;
constexpr std::uint64_t kDesparsifierTag = 0x53;

std::size_t dense_params(std::size_t in_dim, std::size_t out_dim) {
    return in_dim * out_dim + out_dim;
}

} // namespace

Sparsifier make_sparsifier(std::size_t patch_side, std::size_t code_dim, Rng& rng) {
    const std::size_t input = patch_side * patch_side;
    Sparsifier sparsifier;
    sparsifier.net.layers.push_back(make_dense_layer(input, code_dim, Activation::Relu, rng));
    sparsifier.net.layers.push_back(make_dense_layer(code_dim, code_dim, Activation::Relu, rng));
    sparsifier.net.layers.push_back(make_dense_layer(code_dim, code_dim, Activation::Relu, rng));
    return sparsifier;
}

Desparsifier make_desparsifier(std::size_t patch_side, std::size_t code_dim, Rng& rng) {
    const std::size_t output = patch_side * patch_side;
    Desparsifier desparsifier;
    desparsifier.net.layers.push_back(make_dense_layer(code_dim, code_dim, Activation::Relu, rng));
    desparsifier.net.layers.push_back(make_dense_layer(code_dim, code_dim, Activation::Relu, rng));
    desparsifier.net.layers.push_back(make_dense_layer(code_dim, output, Activation::Identity, rng));
    return desparsifier;
}

DenoiserNet make_denoiser_net(std::size_t code_dim, Rng& rng) {
    constexpr std::size_t kDepth = 10;
    DenoiserNet denoiser;
    for (std::size_t l = 0; l < kDepth; ++l) {
        const Activation act = (l + 1 == kDepth) ? Activation::Identity : Activation::Relu;
        denoiser.net.layers.push_back(make_dense_layer(code_dim, code_dim, act, rng));
    }
    return denoiser;
}

CollaboratorWeights make_collaborator(std::size_t code_dim, std::size_t collab_count) {
    if (code_dim == 0 || collab_count == 0) throw InputError("make_collaborator: zero dimension");
    return CollaboratorWeights{Matrix(code_dim, collab_count, 1.0)};
}

Sparsifier make_sparsifier(std::size_t patch_side, std::size_t code_dim, std::uint64_t bundle_seed) {
    Rng rng(mix_seed(bundle_seed, kSparsifierTag));
    return make_sparsifier(patch_side, code_dim, rng);
}

Desparsifier make_desparsifier(std::size_t patch_side, std::size_t code_dim, std::uint64_t bundle_seed) {
    Rng rng(mix_seed(bundle_seed, kDesparsifierTag));
    return make_desparsifier(patch_side, code_dim, rng);
}

DenoiserNet make_denoiser_net(std::size_t code_dim, std::uint64_t bundle_seed) {
    Rng rng(mix_seed(bundle_seed, kDenoiserTag));
    return make_denoiser_net(code_dim, rng);
}

ModelBundle make_bundle(const ModelMeta& meta) {
    if (meta.patch_side == 0 || meta.code_dim == 0 || meta.collab_count == 0) {
        throw InputError("make_bundle: zero design parameter");
    }
    ModelBundle bundle;
    bundle.meta = meta;
    bundle.sparsifier = make_sparsifier(meta.patch_side, meta.code_dim, meta.seed);
    bundle.collaborator = make_collaborator(meta.code_dim, meta.collab_count);
    bundle.denoiser = make_denoiser_net(meta.code_dim, meta.seed);
    bundle.desparsifier = make_desparsifier(meta.patch_side, meta.code_dim, meta.seed);
    return bundle;
}

Matrix sparsify(const Sparsifier& sparsifier, const Matrix& patches) {
    if (patches.rows() != sparsifier.net.in_dim()) {
        throw InputError("sparsify: patch dimension " + std::to_string(patches.rows()) +
                         " does not match sparsifier input " + std::to_string(sparsifier.net.in_dim()));
    }
    return forward(sparsifier.net, patches);
}

Matrix desparsify(const Desparsifier& desparsifier, const Matrix& codes) {
    if (codes.rows() != desparsifier.net.in_dim()) {
        throw InputError("desparsify: code dimension " + std::to_string(codes.rows()) +
                         " does not match desparsifier input " + std::to_string(desparsifier.net.in_dim()));
    }
    return forward(desparsifier.net, codes);
}

Matrix collaborate(const CollaboratorWeights& collaborator, const Matrix& similars) {
    if (!collaborator.weights.same_shape(similars)) {
        throw InputError("collaborate: weight sheet is " + std::to_string(collaborator.weights.rows()) +
                         "x" + std::to_string(collaborator.weights.cols()) + " but representations are " +
                         std::to_string(similars.rows()) + "x" + std::to_string(similars.cols()));
    }
    const std::size_t rows = similars.rows();
    const std::size_t count = similars.cols();
    Matrix combined(rows, 1);
    const double scale = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < count; ++j) sum += collaborator.weights(i, j) * similars(i, j);
        combined(i, 0) = sum * scale;
    }
    return combined;
}

Matrix denoise_sparse(const CollaboratorWeights& collaborator, const DenoiserNet& denoiser,
                      const Matrix& similars) {
    return forward(denoiser.net, collaborate(collaborator, similars));
}

double measure_sparsity(const Matrix& codes, double threshold) {
    if (threshold < 0.0) throw InputError("measure_sparsity: negative threshold");
    if (codes.cols() == 0) throw InputError("measure_sparsity: empty representation set");
    double total = 0.0;
    for (std::size_t c = 0; c < codes.cols(); ++c) {
        double max_abs = 0.0;
        for (std::size_t r = 0; r < codes.rows(); ++r) {
            max_abs = std::max(max_abs, std::abs(codes(r, c)));
        }
        if (max_abs == 0.0) continue;  // all-zero representation counts 0
        const double cutoff = threshold * max_abs;
        std::size_t active = 0;
        for (std::size_t r = 0; r < codes.rows(); ++r) {
            if (std::abs(codes(r, c)) > cutoff) ++active;
        }
        total += static_cast<double>(active);
    }
    return total / static_cast<double>(codes.cols());
}

ArchitectureReport verify_architecture(const ModelBundle& bundle) {
    const ModelMeta& meta = bundle.meta;
    const std::size_t input = meta.patch_side * meta.patch_side;
    const std::size_t m = meta.code_dim;

    ArchitectureReport report;
    report.sparsifier_params = param_count(bundle.sparsifier.net);
    report.collaborator_params = bundle.collaborator.weights.size();
    report.denoiser_net_params = param_count(bundle.denoiser.net);
    report.denoiser_model_params = report.collaborator_params + report.denoiser_net_params;
    report.desparsifier_params = param_count(bundle.desparsifier.net);
    report.total_params = report.sparsifier_params + report.denoiser_model_params +
                          report.desparsifier_params;

    const std::size_t expect_sparsifier = dense_params(input, m) + 2 * dense_params(m, m);
    const std::size_t expect_collaborator = m * meta.collab_count;
    const std::size_t expect_denoiser_net = 10 * dense_params(m, m);
    const std::size_t expect_desparsifier = 2 * dense_params(m, m) + dense_params(m, input);

    if (report.sparsifier_params != expect_sparsifier ||
        bundle.sparsifier.net.in_dim() != input || bundle.sparsifier.net.out_dim() != m) {
        throw ArchitectureError("sparsifier: expected " + std::to_string(expect_sparsifier) +
                                " parameters (" + std::to_string(input) + "->" + std::to_string(m) +
                                "), found " + std::to_string(report.sparsifier_params));
    }
    if (report.collaborator_params != expect_collaborator ||
        bundle.collaborator.weights.rows() != m ||
        bundle.collaborator.weights.cols() != meta.collab_count) {
        throw ArchitectureError("collaborator: expected " + std::to_string(m) + "x" +
                                std::to_string(meta.collab_count) + " weight sheet");
    }
    if (report.denoiser_net_params != expect_denoiser_net ||
        bundle.denoiser.net.layers.size() != 10 ||
        bundle.denoiser.net.in_dim() != m || bundle.denoiser.net.out_dim() != m) {
        throw ArchitectureError("denoiser network: expected 10 layers of " + std::to_string(m) +
                                " nodes (" + std::to_string(expect_denoiser_net) + " parameters), found " +
                                std::to_string(report.denoiser_net_params));
    }
    if (report.desparsifier_params != expect_desparsifier ||
        bundle.desparsifier.net.in_dim() != m || bundle.desparsifier.net.out_dim() != input) {
        throw ArchitectureError("desparsifier: expected " + std::to_string(expect_desparsifier) +
                                " parameters (" + std::to_string(m) + "->" + std::to_string(input) +
                                "), found " + std::to_string(report.desparsifier_params));
    }
    return report;
}

std::string format_report(const ArchitectureReport& report) {
    std::ostringstream out;
    out << "sparsifier_params: " << report.sparsifier_params << "\n"
        << "collaborator_params: " << report.collaborator_params << "\n"
        << "denoiser_net_params: " << report.denoiser_net_params << "\n"
        << "denoiser_model_params: " << report.denoiser_model_params << "\n"
        << "desparsifier_params: " << report.desparsifier_params << "\n"
        << "total_params: " << report.total_params << "\n";
    return out.str();
}

} // namespace dcfb
