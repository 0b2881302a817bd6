#include "dcfb/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <string>

#include "dcfb/errors.hpp"
#include "dcfb/patches.hpp"
#include "dcfb/rng.hpp"

namespace dcfb {
namespace {

constexpr std::uint64_t kSplitTag = 0x61;
constexpr std::uint64_t kShuffleTag = 0x62;

void check_config(const TrainConfig& config) {
    if (config.epochs == 0) throw InputError("training config: epochs must be >= 1");
    if (config.batch_size == 0) throw InputError("training config: batch size must be >= 1");
    if (config.code_dim == 0) throw InputError("training config: code dim must be >= 1");
    if (!(config.learning_rate > 0.0)) throw InputError("training config: learning rate must be > 0");
    if (!(config.validation_fraction >= 0.0) || config.validation_fraction >= 1.0)
        throw InputError("training config: validation fraction must be in [0, 1)");
}

// Seeded 95/5-style split. Validation may come out empty for tiny sets.
void split_indices(std::size_t total, const TrainConfig& config, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& val) {
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.seed, kSplitTag));
    rng.shuffle(order);
    auto val_count = static_cast<std::size_t>(std::floor(static_cast<double>(total) * config.validation_fraction));
    if (val_count >= total) val_count = total - 1;
    val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val_count));
    train.assign(order.begin() + static_cast<std::ptrdiff_t>(val_count), order.end());
}

void log_epoch(std::ostream* log, const EpochStats& stats) {
    if (!log) return;
    (*log) << "epoch," << stats.epoch << ",train_mse," << std::setprecision(12) << stats.train_mse
           << ",val_mse," << stats.val_mse << "\n";
    log->flush();
}

} // namespace

PatchPairSet build_dataset(const std::vector<Image>& clean_images, std::size_t patch_side,
                           double sigma255, std::uint64_t seed, bool per_patch_noise) {
    if (clean_images.empty()) throw InputError("build_dataset: no images");
    if (patch_side == 0) throw InputError("build_dataset: patch side must be >= 1");

    PatchPairSet ds;
    ds.patch_side = patch_side;
    ds.sigma255 = sigma255;
    ds.seed = seed;

    std::size_t total = 0;
    for (std::size_t i = 0; i < clean_images.size(); ++i) {
        const Image& img = clean_images[i];
        if (img.width < patch_side || img.height < patch_side)
            throw InputError("build_dataset: image " + std::to_string(i) + " is smaller than the patch side");
        PatchPairSet::SourceImage src;
        src.width = img.width;
        src.height = img.height;
        src.first_patch = total;
        src.patch_count = (img.width - patch_side + 1) * (img.height - patch_side + 1);
        total += src.patch_count;
        ds.sources.push_back(src);
    }

    const std::size_t dim = patch_side * patch_side;
    ds.clean = Matrix(dim, total);
    ds.noisy = Matrix(dim, total);

    for (std::size_t i = 0; i < clean_images.size(); ++i) {
        const auto& src = ds.sources[i];
        const PatchField clean_field = extract_patch_field(clean_images[i], patch_side);
        for (std::size_t p = 0; p < src.patch_count; ++p)
            ds.clean.copy_column_from(clean_field.values, p, src.first_patch + p);

        if (per_patch_noise) {
            const double sigma = sigma255 / 255.0;
            if (sigma < 0.0) throw InputError("build_dataset: sigma must be >= 0");
            Rng rng(mix_seed(seed, i));
            for (std::size_t p = 0; p < src.patch_count; ++p)
                for (std::size_t r = 0; r < dim; ++r)
                    ds.noisy(r, src.first_patch + p) = ds.clean(r, src.first_patch + p) + sigma * rng.gaussian();
        } else {
            const Image noisy_img = add_awgn_sigma(clean_images[i], sigma255, mix_seed(seed, i));
            const PatchField noisy_field = extract_patch_field(noisy_img, patch_side);
            for (std::size_t p = 0; p < src.patch_count; ++p)
                ds.noisy.copy_column_from(noisy_field.values, p, src.first_patch + p);
        }
    }
    return ds;
}

std::pair<std::vector<Image>, std::vector<Image>> reconstruct_images(const PatchPairSet& dataset) {
    std::vector<Image> clean_images;
    std::vector<Image> noisy_images;
    clean_images.reserve(dataset.sources.size());
    noisy_images.reserve(dataset.sources.size());
    const std::size_t dim = dataset.patch_side * dataset.patch_side;

    for (const auto& src : dataset.sources) {
        const std::size_t grid_cols = src.width - dataset.patch_side + 1;
        std::vector<PatchVector> clean_patches(src.patch_count);
        std::vector<PatchVector> noisy_patches(src.patch_count);
        for (std::size_t p = 0; p < src.patch_count; ++p) {
            const PatchCoord coord{p / grid_cols, p % grid_cols};
            clean_patches[p].coord = coord;
            noisy_patches[p].coord = coord;
            clean_patches[p].values.resize(dim);
            noisy_patches[p].values.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                clean_patches[p].values[i] = dataset.clean(i, src.first_patch + p);
                noisy_patches[p].values[i] = dataset.noisy(i, src.first_patch + p);
            }
        }
        clean_images.push_back(aggregate(clean_patches, dataset.patch_side, src.width, src.height));
        noisy_images.push_back(aggregate(noisy_patches, dataset.patch_side, src.width, src.height));
    }
    return {std::move(clean_images), std::move(noisy_images)};
}

Stage1Result train_stage1(const PatchPairSet& dataset, const TrainConfig& config, std::ostream* log,
                          const Stage1Checkpoint& checkpoint) {
    check_config(config);
    if (dataset.size() == 0) throw InputError("train_stage1: empty dataset");
    if (dataset.clean.rows() != dataset.noisy.rows() || dataset.clean.cols() != dataset.noisy.cols())
        throw InputError("train_stage1: clean and noisy shapes disagree");
    if (dataset.clean.rows() != dataset.patch_side * dataset.patch_side)
        throw InputError("train_stage1: patch rows disagree with the recorded patch side");

    Stage1Result result;
    result.sparsifier = make_sparsifier(dataset.patch_side, config.code_dim, config.seed);
    result.desparsifier = make_desparsifier(dataset.patch_side, config.code_dim, config.seed);
    DenseNetwork& enc = result.sparsifier.net;
    DenseNetwork& dec = result.desparsifier.net;

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    split_indices(dataset.size(), config, train_idx, val_idx);

    ParamView params = param_view(enc);
    {
        ParamView dec_params = param_view(dec);
        params.insert(params.end(), dec_params.begin(), dec_params.end());
    }
    AdamState adam(total_size(params), config.learning_rate);

    const std::size_t dim = dataset.clean.rows();
    Rng shuffle_rng(mix_seed(config.seed, kShuffleTag));

    auto eval_mse = [&](const std::vector<std::size_t>& indices) {
        if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
        double total_sq = 0.0;
        for (std::size_t start = 0; start < indices.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, indices.size() - start);
            Matrix noisy(dim, count);
            Matrix clean(dim, count);
            for (std::size_t c = 0; c < count; ++c) {
                noisy.copy_column_from(dataset.noisy, indices[start + c], c);
                clean.copy_column_from(dataset.clean, indices[start + c], c);
            }
            const Matrix decoded = forward(dec, forward(enc, noisy));
            total_sq += mse_loss(decoded, clean).loss * static_cast<double>(dim * count);
        }
        return total_sq / static_cast<double>(dim * indices.size());
    };

    result.history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(train_idx);

        double epoch_sq = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, train_idx.size() - start);
            Matrix noisy(dim, count);
            Matrix clean(dim, count);
            for (std::size_t c = 0; c < count; ++c) {
                noisy.copy_column_from(dataset.noisy, train_idx[start + c], c);
                clean.copy_column_from(dataset.clean, train_idx[start + c], c);
            }

            ForwardCache enc_cache;
            ForwardCache dec_cache;
            const Matrix code = forward(enc, noisy, &enc_cache);
            const Matrix decoded = forward(dec, code, &dec_cache);
            const MseResult mse = mse_loss(decoded, clean);
            if (!std::isfinite(mse.loss))
                throw DivergenceError("stage 1 loss became non-finite at epoch " + std::to_string(epoch));
            epoch_sq += mse.loss * static_cast<double>(dim * count);

            BackwardResult dec_grads = backward(dec, dec_cache, mse.gradient);
            BackwardResult enc_grads = backward(enc, enc_cache, dec_grads.input_gradient);

            ConstParamView grads = grad_view(enc_grads);
            {
                ConstParamView dec_gv = grad_view(dec_grads);
                grads.insert(grads.end(), dec_gv.begin(), dec_gv.end());
            }
            adam_step(params, grads, adam);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = epoch_sq / static_cast<double>(dim * train_idx.size());
        stats.val_mse = val_idx.empty() ? stats.train_mse : eval_mse(val_idx);
        result.history.push_back(stats);
        log_epoch(log, stats);

        if (checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0)
            checkpoint(epoch, result.sparsifier, result.desparsifier);
    }
    return result;
}

std::vector<Stage2Sample> build_stage2_samples(const std::vector<Image>& noisy_images,
                                               const std::vector<Image>& clean_images,
                                               const Sparsifier& sparsifier, const WindowSpec& window,
                                               std::size_t patch_side) {
    if (noisy_images.size() != clean_images.size())
        throw InputError("build_stage2_samples: image list sizes disagree");
    if (noisy_images.empty()) throw InputError("build_stage2_samples: no images");

    const std::size_t code_dim = sparsifier.net.out_dim();
    std::vector<Stage2Sample> samples;

    for (std::size_t i = 0; i < noisy_images.size(); ++i) {
        if (!noisy_images[i].same_shape(clean_images[i]))
            throw InputError("build_stage2_samples: image " + std::to_string(i) + " shapes disagree");
        const PatchField noisy_field = extract_patch_field(noisy_images[i], patch_side);
        const PatchField clean_field = extract_patch_field(clean_images[i], patch_side);
        const Matrix reps_all = sparsify(sparsifier, noisy_field.values);

        samples.reserve(samples.size() + noisy_field.count());
        for (std::size_t p = 0; p < noisy_field.count(); ++p) {
            const MatchSet matches = find_similar(noisy_field, noisy_field.coord(p), window);
            Stage2Sample sample;
            sample.reps = Matrix(code_dim, matches.coords.size());
            for (std::size_t j = 0; j < matches.coords.size(); ++j)
                sample.reps.copy_column_from(reps_all, noisy_field.index(matches.coords[j]), j);
            sample.target = clean_field.values.column(p);
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

Stage2Result train_stage2(const std::vector<Stage2Sample>& samples, const Desparsifier& frozen,
                          const TrainConfig& config, std::ostream* log, const Stage2Checkpoint& checkpoint) {
    check_config(config);
    if (samples.empty()) throw InputError("train_stage2: no samples");

    const std::size_t code_dim = frozen.net.in_dim();
    const std::size_t out_dim = frozen.net.out_dim();
    const std::size_t collab_count = samples.front().reps.cols();
    if (collab_count == 0) throw InputError("train_stage2: empty rep set in sample 0");
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (samples[s].reps.rows() != code_dim || samples[s].reps.cols() != collab_count)
            throw InputError("train_stage2: sample " + std::to_string(s) + " rep shape disagrees");
        if (samples[s].target.size() != out_dim)
            throw InputError("train_stage2: sample " + std::to_string(s) + " target size disagrees");
    }

    Stage2Result result;
    result.collaborator = make_collaborator(code_dim, collab_count);
    result.denoiser = make_denoiser_net(code_dim, config.seed);
    Matrix& c_weights = result.collaborator.weights;
    DenseNetwork& den = result.denoiser.net;

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    split_indices(samples.size(), config, train_idx, val_idx);

    ParamView params;
    params.push_back(c_weights.data());
    {
        ParamView den_params = param_view(den);
        params.insert(params.end(), den_params.begin(), den_params.end());
    }
    AdamState adam(total_size(params), config.learning_rate);

    const double inv_d = 1.0 / static_cast<double>(collab_count);
    Rng shuffle_rng(mix_seed(config.seed, kShuffleTag));

    // out[i] for sample s = (1/d) * sum_j C[i,j] * reps_s[i,j]
    auto collab_batch = [&](const std::vector<std::size_t>& indices, std::size_t start, std::size_t count) {
        Matrix out(code_dim, count);
        for (std::size_t c = 0; c < count; ++c) {
            const Matrix& reps = samples[indices[start + c]].reps;
            for (std::size_t i = 0; i < code_dim; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < collab_count; ++j) acc += c_weights(i, j) * reps(i, j);
                out(i, c) = acc * inv_d;
            }
        }
        return out;
    };

    auto gather_targets = [&](const std::vector<std::size_t>& indices, std::size_t start, std::size_t count) {
        Matrix targets(out_dim, count);
        for (std::size_t c = 0; c < count; ++c) {
            const std::vector<double>& t = samples[indices[start + c]].target;
            for (std::size_t i = 0; i < out_dim; ++i) targets(i, c) = t[i];
        }
        return targets;
    };

    auto eval_mse = [&](const std::vector<std::size_t>& indices) {
        if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
        double total_sq = 0.0;
        for (std::size_t start = 0; start < indices.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, indices.size() - start);
            const Matrix decoded = forward(frozen.net, forward(den, collab_batch(indices, start, count)));
            total_sq += mse_loss(decoded, gather_targets(indices, start, count)).loss *
                        static_cast<double>(out_dim * count);
        }
        return total_sq / static_cast<double>(out_dim * indices.size());
    };

    result.history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(train_idx);

        double epoch_sq = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, train_idx.size() - start);
            const Matrix collab_out = collab_batch(train_idx, start, count);
            const Matrix targets = gather_targets(train_idx, start, count);

            ForwardCache den_cache;
            ForwardCache dec_cache;
            const Matrix den_out = forward(den, collab_out, &den_cache);
            const Matrix decoded = forward(frozen.net, den_out, &dec_cache);
            const MseResult mse = mse_loss(decoded, targets);
            if (!std::isfinite(mse.loss))
                throw DivergenceError("stage 2 loss became non-finite at epoch " + std::to_string(epoch));
            epoch_sq += mse.loss * static_cast<double>(out_dim * count);

            // The frozen decoder only contributes its input gradient; its
            // weight gradients are computed and discarded.
            BackwardResult dec_grads = backward(frozen.net, dec_cache, mse.gradient);
            BackwardResult den_grads = backward(den, den_cache, dec_grads.input_gradient);

            Matrix c_grad(code_dim, collab_count);
            for (std::size_t c = 0; c < count; ++c) {
                const Matrix& reps = samples[train_idx[start + c]].reps;
                for (std::size_t i = 0; i < code_dim; ++i) {
                    const double g = den_grads.input_gradient(i, c) * inv_d;
                    for (std::size_t j = 0; j < collab_count; ++j) c_grad(i, j) += g * reps(i, j);
                }
            }

            ConstParamView grads;
            grads.push_back(c_grad.data());
            {
                ConstParamView den_gv = grad_view(den_grads);
                grads.insert(grads.end(), den_gv.begin(), den_gv.end());
            }
            adam_step(params, grads, adam);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = epoch_sq / static_cast<double>(out_dim * train_idx.size());
        stats.val_mse = val_idx.empty() ? stats.train_mse : eval_mse(val_idx);
        result.history.push_back(stats);
        log_epoch(log, stats);

        if (checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0)
            checkpoint(epoch, result.collaborator, result.denoiser);
    }
    return result;
}

} // namespace dcfb
