#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "dcfb/block_matching.hpp"
#include "dcfb/image.hpp"
#include "dcfb/matrix.hpp"
#include "dcfb/models.hpp"

namespace dcfb {

// Congruent clean/noisy patch pairs, grouped by source image so the full
// images can be rebuilt by overlap averaging. Columns are patches, in
// stride-1 scan order per image.
struct PatchPairSet {
    struct SourceImage {
        std::size_t width = 0;
        std::size_t height = 0;
        std::size_t first_patch = 0;
        std::size_t patch_count = 0;
    };

    std::size_t patch_side = 5;
    double sigma255 = 0.0;
    std::uint64_t seed = 0;
    std::vector<SourceImage> sources;
    Matrix clean;  // patch_side^2 x total
    Matrix noisy;

    std::size_t size() const { return clean.cols(); }
};

// Noise is added to each whole image first (per-image seed derived from
// `seed`), then stride-1 patches are extracted from the clean and noisy
// images in identical order. per_patch_noise instead perturbs each extracted
// patch independently.
PatchPairSet build_dataset(const std::vector<Image>& clean_images, std::size_t patch_side,
                           double sigma255, std::uint64_t seed, bool per_patch_noise = false);

// Rebuilds (clean, noisy) images from the stride-1 patches of each source.
std::pair<std::vector<Image>, std::vector<Image>> reconstruct_images(const PatchPairSet& dataset);

struct TrainConfig {
    std::size_t batch_size = 100;
    std::size_t epochs = 200;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    double sigma255 = 25.0;  // stamped into saved metadata by callers
    std::size_t code_dim = 100;
    bool shuffle = true;
    double validation_fraction = 0.05;  // held out for logging only
    std::size_t checkpoint_every = 0;   // epochs; 0 disables
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct Stage1Result {
    Sparsifier sparsifier;
    Desparsifier desparsifier;
    std::vector<EpochStats> history;
};

using Stage1Checkpoint = std::function<void(std::size_t, const Sparsifier&, const Desparsifier&)>;

// Trains sparsifier and desparsifier jointly, noisy patches in, clean
// patches out, MSE + Adam over seeded shuffled mini-batches. Writes one
// `epoch,<i>,train_mse,<v>,val_mse,<v>` line per epoch to `log` if given.
Stage1Result train_stage1(const PatchPairSet& dataset, const TrainConfig& config,
                          std::ostream* log = nullptr, const Stage1Checkpoint& checkpoint = {});

// Sparse representations of a reference patch and its similars (column 0 is
// the reference) with the clean reference patch as the target.
struct Stage2Sample {
    Matrix reps;                 // code_dim x collab_count
    std::vector<double> target;  // patch_side^2
};

// One sample per stride-1 reference coordinate of each image. Every patch of
// an image is sparsified once; sample columns gather [reference | similars].
std::vector<Stage2Sample> build_stage2_samples(const std::vector<Image>& noisy_images,
                                               const std::vector<Image>& clean_images,
                                               const Sparsifier& sparsifier,
                                               const WindowSpec& window,
                                               std::size_t patch_side);

struct Stage2Result {
    CollaboratorWeights collaborator;
    DenoiserNet denoiser;
    std::vector<EpochStats> history;
};

using Stage2Checkpoint = std::function<void(std::size_t, const CollaboratorWeights&, const DenoiserNet&)>;

// Trains the collaborator sheet and denoiser network against clean reference
// patches. The desparsifier is frozen: gradients flow through it via its
// input gradient but its weights are never updated.
Stage2Result train_stage2(const std::vector<Stage2Sample>& samples, const Desparsifier& frozen,
                          const TrainConfig& config, std::ostream* log = nullptr,
                          const Stage2Checkpoint& checkpoint = {});

} // namespace dcfb
