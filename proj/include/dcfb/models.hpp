#pragma once

#include <cstdint>
#include <string>

#include "dcfb/matrix.hpp"
#include "dcfb/nn.hpp"

namespace dcfb {

// Design parameters plus provenance of a trained bundle. sigma255 is the
// training noise level on the 0-255 intensity scale.
struct ModelMeta {
    std::size_t patch_side = 5;    // n; patches are patch_side^2 vectors
    std::size_t code_dim = 100;    // m; sparse representation length
    std::size_t collab_count = 5;  // d; patches per collaboration
    std::size_t window_side = 50;  // S; similarity search window
    double sigma255 = 25.0;
    std::uint64_t seed = 0;
};

// Encoder: patch (n^2) -> sparse code (m). Two relu hidden layers of m nodes
// and a relu output layer, so codes are non-negative.
struct Sparsifier {
    DenseNetwork net;
};

// Decoder: sparse code (m) -> patch (n^2). Two relu hidden layers, identity
// output (pixel estimates may transiently leave [0, 1]).
struct Desparsifier {
    DenseNetwork net;
};

// Ten m -> m layers, relu except for an identity final layer.
struct DenoiserNet {
    DenseNetwork net;
};

// Element-wise collaboration weight sheet, m x d. Initialized to ones so
// collaboration starts as plain averaging of the d representations.
struct CollaboratorWeights {
    Matrix weights;
};

struct ModelBundle {
    Sparsifier sparsifier;
    CollaboratorWeights collaborator;
    DenoiserNet denoiser;
    Desparsifier desparsifier;
    ModelMeta meta;
};

Sparsifier make_sparsifier(std::size_t patch_side, std::size_t code_dim, Rng& rng);
Desparsifier make_desparsifier(std::size_t patch_side, std::size_t code_dim, Rng& rng);
DenoiserNet make_denoiser_net(std::size_t code_dim, Rng& rng);
CollaboratorWeights make_collaborator(std::size_t code_dim, std::size_t collab_count);

// Same, but with each sub-model's weight stream derived from one bundle seed,
// so a sub-model's initial weights never depend on what else was built.
Sparsifier make_sparsifier(std::size_t patch_side, std::size_t code_dim, std::uint64_t bundle_seed);
Desparsifier make_desparsifier(std::size_t patch_side, std::size_t code_dim, std::uint64_t bundle_seed);
DenoiserNet make_denoiser_net(std::size_t code_dim, std::uint64_t bundle_seed);

// Fresh bundle with seeded weights derived from meta.seed.
ModelBundle make_bundle(const ModelMeta& meta);

// patches: n^2 x k -> codes m x k.
Matrix sparsify(const Sparsifier& sparsifier, const Matrix& patches);

// codes: m x k -> patches n^2 x k.
Matrix desparsify(const Desparsifier& desparsifier, const Matrix& codes);

// similars: m x d with the reference code in column 0. Row i of the result
// is the mean over j of weights(i, j) * similars(i, j).
Matrix collaborate(const CollaboratorWeights& collaborator, const Matrix& similars);

// collaborate followed by the denoiser network; m x 1.
Matrix denoise_sparse(const CollaboratorWeights& collaborator, const DenoiserNet& denoiser,
                      const Matrix& similars);

// Mean count of entries with |value| > threshold * max|value| of their own
// representation. codes: m x k, one representation per column.
double measure_sparsity(const Matrix& codes, double threshold);

struct ArchitectureReport {
    std::size_t sparsifier_params = 0;
    std::size_t collaborator_params = 0;
    std::size_t denoiser_net_params = 0;
    std::size_t denoiser_model_params = 0;  // collaborator + denoiser net
    std::size_t desparsifier_params = 0;
    std::size_t total_params = 0;
};

// Checks every sub-model against the counts implied by meta; throws
// ArchitectureError naming the first mismatching sub-model.
ArchitectureReport verify_architecture(const ModelBundle& bundle);

std::string format_report(const ArchitectureReport& report);

} // namespace dcfb
