// Acceptance gate: one line per shipped guarantee, exit 0 only if all hold.
// Usage: dcfb_acceptance [--cli /path/to/dcfb]
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dcfb/errors.hpp"
#include "dcfb/image.hpp"
#include "dcfb/io.hpp"
#include "dcfb/models.hpp"
#include "dcfb/patches.hpp"
#include "dcfb/pipeline.hpp"
#include "dcfb/training.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace dcfb;
using dcfb::testsupport::brute_force_similar;
using dcfb::testsupport::central_difference;
using dcfb::testsupport::random_image;
using dcfb::testsupport::rel_err;
using dcfb::testsupport::synth_image;

namespace {

using Clock = std::chrono::steady_clock;

bool g_all_pass = true;

std::string fmt(double v, int precision = 3) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

void report(int number, bool pass, const std::string& detail, double seconds) {
    if (!pass) g_all_pass = false;
    std::cout << "criterion " << number << ": " << (pass ? "PASS" : "FAIL") << " (" << detail << ") ["
              << fmt(seconds, 1) << "s]" << std::endl;
}

void run_criterion(int number, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [ok, text] = body();
        pass = ok;
        detail = text;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(number, pass, detail, std::chrono::duration<double>(Clock::now() - t0).count());
}

// ---- gradient checking -----------------------------------------------------

struct GradSummary {
    std::size_t coords = 0;
    double max_rel = 0.0;
    double max_abs = 0.0;

    void take(double analytic, double numeric) {
        ++coords;
        max_abs = std::max(max_abs, std::abs(analytic - numeric));
        // Differences at the rounding-noise floor of central differences
        // (eps * loss / 2h, far below any real gradient defect) count as exact.
        if (std::abs(analytic - numeric) <= 1e-9) return;
        max_rel = std::max(max_rel, rel_err(analytic, numeric));
    }
};

Matrix seeded_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                     double hi = 1.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

// Strided central-difference sweep over every parameter chunk of `net`,
// optionally also over the input entries.
GradSummary check_network(DenseNetwork& net, Matrix input, const Matrix& target, bool check_input,
                          std::size_t target_coords = 120) {
    ForwardCache cache;
    forward(net, input, &cache);
    const MseResult first = mse_loss(cache.activations.back(), target);
    const BackwardResult grads = backward(net, cache, first.gradient);

    auto loss = [&]() { return mse_loss(forward(net, input), target).loss; };

    GradSummary summary;
    ParamView params = param_view(net);
    const ConstParamView gv = grad_view(grads);
    std::size_t total = total_size(params);
    if (check_input) total += input.size();
    const std::size_t stride = std::max<std::size_t>(1, total / target_coords);

    std::size_t flat = 0;
    for (std::size_t chunk = 0; chunk < params.size(); ++chunk) {
        for (std::size_t i = 0; i < params[chunk].size(); ++i, ++flat) {
            if (flat % stride != 0) continue;
            summary.take(gv[chunk][i], central_difference(params[chunk][i], loss));
        }
    }
    if (check_input) {
        for (std::size_t i = 0; i < input.size(); ++i, ++flat) {
            if (flat % stride != 0) continue;
            summary.take(grads.input_gradient.data()[i], central_difference(input.data()[i], loss));
        }
    }
    return summary;
}

// Stage-1 shape: decoder loss propagated into the encoder via the decoder's
// input gradient; sweeps the encoder's parameters.
GradSummary check_chained(Sparsifier& enc, Desparsifier& dec, Matrix input, const Matrix& target) {
    ForwardCache enc_cache, dec_cache;
    const Matrix code = forward(enc.net, input, &enc_cache);
    const Matrix out = forward(dec.net, code, &dec_cache);
    const MseResult mse = mse_loss(out, target);
    BackwardResult dec_grads = backward(dec.net, dec_cache, mse.gradient);
    const BackwardResult enc_grads = backward(enc.net, enc_cache, dec_grads.input_gradient);

    auto loss = [&]() { return mse_loss(forward(dec.net, forward(enc.net, input)), target).loss; };

    GradSummary summary;
    ParamView params = param_view(enc.net);
    const ConstParamView gv = grad_view(enc_grads);
    const std::size_t stride = std::max<std::size_t>(1, total_size(params) / 120);
    std::size_t flat = 0;
    for (std::size_t chunk = 0; chunk < params.size(); ++chunk)
        for (std::size_t i = 0; i < params[chunk].size(); ++i, ++flat)
            if (flat % stride == 0) summary.take(gv[chunk][i], central_difference(params[chunk][i], loss));
    return summary;
}

// Stage-2 shape: collaborator and denoiser trained through a frozen decoder.
// `sweep_collaborator` picks which parameter set gets the finite differences.
GradSummary check_stage2(bool sweep_collaborator, std::uint64_t seed) {
    const std::size_t m = 20, d = 5, out_dim = 9, batch = 6;
    Rng rng(seed);
    Matrix c_weights(m, d);
    for (double& v : c_weights.data()) v = rng.uniform(0.5, 1.5);
    DenoiserNet den;
    {
        Rng wr(seed + 1);
        den.net.layers.push_back(make_dense_layer(m, m, Activation::Relu, wr));
        den.net.layers.push_back(make_dense_layer(m, m, Activation::Relu, wr));
        den.net.layers.push_back(make_dense_layer(m, m, Activation::Identity, wr));
    }
    Desparsifier frozen;
    {
        Rng wr(seed + 2);
        frozen.net.layers.push_back(make_dense_layer(m, m, Activation::Relu, wr));
        frozen.net.layers.push_back(make_dense_layer(m, out_dim, Activation::Identity, wr));
    }
    std::vector<Matrix> reps;
    for (std::size_t s = 0; s < batch; ++s) reps.push_back(seeded_matrix(m, d, seed + 10 + s, 0.0, 1.0));
    const Matrix targets = seeded_matrix(out_dim, batch, seed + 99);

    const double inv_d = 1.0 / static_cast<double>(d);
    auto collab_forward = [&]() {
        Matrix out(m, batch);
        for (std::size_t c = 0; c < batch; ++c)
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) acc += c_weights(i, j) * reps[c](i, j);
                out(i, c) = acc * inv_d;
            }
        return out;
    };
    auto loss = [&]() {
        return mse_loss(forward(frozen.net, forward(den.net, collab_forward())), targets).loss;
    };

    ForwardCache den_cache, dec_cache;
    const Matrix den_out = forward(den.net, collab_forward(), &den_cache);
    const Matrix decoded = forward(frozen.net, den_out, &dec_cache);
    const MseResult mse = mse_loss(decoded, targets);
    BackwardResult dec_grads = backward(frozen.net, dec_cache, mse.gradient);
    const BackwardResult den_grads = backward(den.net, den_cache, dec_grads.input_gradient);

    GradSummary summary;
    if (sweep_collaborator) {
        Matrix c_grad(m, d);
        for (std::size_t c = 0; c < batch; ++c)
            for (std::size_t i = 0; i < m; ++i) {
                const double g = den_grads.input_gradient(i, c) * inv_d;
                for (std::size_t j = 0; j < d; ++j) c_grad(i, j) += g * reps[c](i, j);
            }
        for (std::size_t i = 0; i < c_weights.size(); ++i)
            summary.take(c_grad.data()[i], central_difference(c_weights.data()[i], loss));
    } else {
        ParamView params = param_view(den.net);
        const ConstParamView gv = grad_view(den_grads);
        const std::size_t stride = std::max<std::size_t>(1, total_size(params) / 120);
        std::size_t flat = 0;
        for (std::size_t chunk = 0; chunk < params.size(); ++chunk)
            for (std::size_t i = 0; i < params[chunk].size(); ++i, ++flat)
                if (flat % stride == 0)
                    summary.take(gv[chunk][i], central_difference(params[chunk][i], loss));
    }
    return summary;
}

// ---- desk-scale training, shared by several criteria ------------------------

struct DeskRun {
    bool trained = false;
    std::string error;
    ModelBundle bundle;
    bool freeze_intact = false;
    std::size_t stage2_samples = 0;
    double train_seconds = 0.0;
};

std::vector<double> flatten_params(const DenseNetwork& net) {
    std::vector<double> flat;
    for (const DenseLayer& layer : net.layers) {
        flat.insert(flat.end(), layer.weights.data().begin(), layer.weights.data().end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

DeskRun desk_train() {
    DeskRun run;
    const auto t0 = Clock::now();
    try {
        std::vector<Image> clean;
        for (std::uint64_t i = 1; i <= 10; ++i) clean.push_back(synth_image(100, 100, i));
        const PatchPairSet dataset = build_dataset(clean, 5, 25.0, 42);

        TrainConfig config;
        config.batch_size = 100;
        config.epochs = 20;
        config.learning_rate = 1e-3;
        config.seed = 7;
        config.sigma255 = 25.0;
        config.code_dim = 100;

        Stage1Result s1 = train_stage1(dataset, config);
        const std::vector<double> frozen_snapshot = flatten_params(s1.desparsifier.net);

        auto [clean_images, noisy_images] = reconstruct_images(dataset);
        const WindowSpec window{50, 5};
        const auto samples = build_stage2_samples(noisy_images, clean_images, s1.sparsifier, window, 5);
        run.stage2_samples = samples.size();

        Stage2Result s2 = train_stage2(samples, s1.desparsifier, config);

        const std::vector<double> frozen_after = flatten_params(s1.desparsifier.net);
        run.freeze_intact = frozen_snapshot == frozen_after;

        run.bundle.sparsifier = std::move(s1.sparsifier);
        run.bundle.desparsifier = std::move(s1.desparsifier);
        run.bundle.collaborator = std::move(s2.collaborator);
        run.bundle.denoiser = std::move(s2.denoiser);
        run.bundle.meta = ModelMeta{5, 100, 5, 50, 25.0, 7};
        verify_architecture(run.bundle);
        run.trained = true;
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return run;
}

Image denoise_with(const ModelBundle& bundle, const Image& noisy, std::size_t workers = 4) {
    DenoiseRequest request;
    request.noisy = noisy;
    request.bundle = bundle;
    request.window = WindowSpec{bundle.meta.window_side, bundle.meta.collab_count};
    request.stride = 1;
    request.workers = workers;
    return denoise_image(request);
}

// ---- subprocess helpers for the CLI determinism check -----------------------

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--cli" && i + 1 < argc) cli = argv[++i];
    }

    // 1. Designed parameter counts, exactly.
    run_criterion(1, []() -> std::pair<bool, std::string> {
        const ArchitectureReport r = verify_architecture(make_bundle(ModelMeta{}));
        const bool ok = r.sparsifier_params == 22800 && r.collaborator_params == 500 &&
                        r.denoiser_net_params == 101000 && r.denoiser_model_params == 101500 &&
                        r.desparsifier_params == 22725 && r.total_params == 147025;
        return {ok, "sparsifier " + std::to_string(r.sparsifier_params) + ", collaborator " +
                        std::to_string(r.collaborator_params) + ", denoiser net " +
                        std::to_string(r.denoiser_net_params) + ", denoiser model " +
                        std::to_string(r.denoiser_model_params) + ", desparsifier " +
                        std::to_string(r.desparsifier_params) + ", total " +
                        std::to_string(r.total_params)};
    });

    // 2. Analytic gradients vs central differences, 10 configurations.
    run_criterion(2, []() -> std::pair<bool, std::string> {
        std::vector<GradSummary> summaries;

        auto single_layer = [&](std::size_t in, std::size_t out, Activation act, std::uint64_t seed) {
            Rng rng(seed);
            DenseNetwork net;
            net.layers.push_back(make_dense_layer(in, out, act, rng));
            summaries.push_back(
                check_network(net, seeded_matrix(in, 5, seed + 1), seeded_matrix(out, 5, seed + 2), true));
        };
        single_layer(12, 10, Activation::Identity, 1000);  // 1
        single_layer(11, 10, Activation::Relu, 2000);      // 2

        {
            Rng rng(3000);
            DenseNetwork net;
            net.layers.push_back(make_dense_layer(9, 11, Activation::Relu, rng));
            net.layers.push_back(make_dense_layer(11, 6, Activation::Identity, rng));
            summaries.push_back(
                check_network(net, seeded_matrix(9, 4, 3001), seeded_matrix(6, 4, 3002), true));  // 3
        }
        {
            Sparsifier enc = make_sparsifier(3, 14, std::uint64_t{4000});
            summaries.push_back(check_network(enc.net, seeded_matrix(9, 5, 4001, 0.0, 1.0),
                                              seeded_matrix(14, 5, 4002, 0.0, 1.0), false));  // 4
        }
        {
            Desparsifier dec = make_desparsifier(3, 14, std::uint64_t{5000});
            summaries.push_back(check_network(dec.net, seeded_matrix(14, 5, 5001, 0.0, 1.0),
                                              seeded_matrix(9, 5, 5002, 0.0, 1.0), false));  // 5
        }
        {
            DenoiserNet den = make_denoiser_net(8, std::uint64_t{6000});
            summaries.push_back(check_network(den.net, seeded_matrix(8, 5, 6001, 0.0, 1.0),
                                              seeded_matrix(8, 5, 6002, 0.0, 1.0), false));  // 6
        }
        {
            Sparsifier enc = make_sparsifier(3, 12, std::uint64_t{7000});
            Desparsifier dec = make_desparsifier(3, 12, std::uint64_t{7001});
            summaries.push_back(check_chained(enc, dec, seeded_matrix(9, 6, 7002, 0.0, 1.0),
                                              seeded_matrix(9, 6, 7003, 0.0, 1.0)));  // 7
        }
        summaries.push_back(check_stage2(true, 8000));   // 8: collaborator sheet
        summaries.push_back(check_stage2(false, 9000));  // 9: denoiser through the frozen decoder
        {
            Rng rng(10000);
            DenseNetwork net;
            net.layers.push_back(make_dense_layer(10, 12, Activation::Relu, rng));
            net.layers.push_back(make_dense_layer(12, 7, Activation::Identity, rng));
            ForwardCache cache;
            Matrix input = seeded_matrix(10, 13, 10001);
            const Matrix target = seeded_matrix(7, 13, 10002);
            forward(net, input, &cache);
            const MseResult mse = mse_loss(cache.activations.back(), target);
            const BackwardResult grads = backward(net, cache, mse.gradient);
            auto loss = [&]() { return mse_loss(forward(net, input), target).loss; };
            GradSummary summary;
            for (std::size_t i = 0; i < input.size(); ++i)
                summary.take(grads.input_gradient.data()[i], central_difference(input.data()[i], loss));
            summaries.push_back(summary);  // 10: pure input gradient
        }

        bool ok = summaries.size() == 10;
        double worst = 0.0;
        double worst_abs = 0.0;
        std::size_t least = summaries.empty() ? 0 : summaries.front().coords;
        for (const GradSummary& s : summaries) {
            worst = std::max(worst, s.max_rel);
            worst_abs = std::max(worst_abs, s.max_abs);
            least = std::min(least, s.coords);
            if (s.coords < 100 || s.max_rel > 1e-5) ok = false;
        }
        std::ostringstream abs_text;
        abs_text << std::scientific << std::setprecision(1) << worst_abs;
        return {ok, "10 configurations, >= " + std::to_string(least) +
                        " coords each, worst abs diff " + abs_text.str() +
                        ", worst relative error above the noise floor " + fmt(worst, 10)};
    });

    // 3. Similarity search equals exhaustive search, including order and ties.
    run_criterion(3, []() -> std::pair<bool, std::string> {
        const WindowSpec spec{12, 5};
        std::size_t checked = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const Image img = random_image(16, 16, seed);
            const PatchField field = extract_patch_field(img, 5);
            for (std::size_t p = 0; p < field.count(); ++p) {
                const MatchSet got = find_similar(field, field.coord(p), spec);
                const MatchSet want = brute_force_similar(img, 5, field.coord(p), spec);
                if (got.coords.size() != want.coords.size()) return {false, "size mismatch"};
                for (std::size_t i = 0; i < got.coords.size(); ++i) {
                    if (!(got.coords[i] == want.coords[i]) || got.distances[i] != want.distances[i])
                        return {false, "mismatch at image " + std::to_string(seed) + " reference " +
                                           std::to_string(p) + " slot " + std::to_string(i)};
                }
                ++checked;
            }
        }
        return {true, "20 images x 144 references (" + std::to_string(checked) + " match sets), exact"};
    });

    // 4. Overlap averaging inverts a full stride-1 extraction.
    run_criterion(4, []() -> std::pair<bool, std::string> {
        const std::pair<std::size_t, std::size_t> sizes[] = {{5, 5},   {7, 6},    {12, 12},  {16, 9},
                                                             {24, 24}, {33, 17},  {48, 48},  {64, 31},
                                                             {100, 100}, {128, 128}};
        double worst = 0.0;
        for (std::size_t k = 0; k < 10; ++k) {
            const Image img = random_image(sizes[k].first, sizes[k].second, 400 + k);
            const Image back = aggregate(extract_patches(img, 5, 1), 5, img.width, img.height);
            for (std::size_t i = 0; i < img.size(); ++i)
                worst = std::max(worst, std::abs(back.pixels[i] - img.pixels[i]));
        }
        return {worst <= 1e-12, "10 images up to 128x128, max abs error " + fmt(worst, 16)};
    });

    // Desk-scale two-stage training feeds criteria 5, 6, 7, and 10.
    std::cout << "[desk-scale training: 10 images, 20+20 epochs...]" << std::endl;
    const DeskRun desk = desk_train();

    // 5. Frozen decoder untouched by the second stage.
    run_criterion(5, [&]() -> std::pair<bool, std::string> {
        if (!desk.trained) return {false, "training failed: " + desk.error};
        return {desk.freeze_intact,
                desk.freeze_intact ? "all 22725 decoder parameters bit-identical after stage 2"
                                   : "decoder parameters changed during stage 2"};
    });

    // 6. Denoising gain on a held-out image at the training noise level.
    Image held_clean, held_noisy;
    run_criterion(6, [&]() -> std::pair<bool, std::string> {
        if (!desk.trained) return {false, "training failed: " + desk.error};
        if (desk.stage2_samples < 20000)
            return {false, "only " + std::to_string(desk.stage2_samples) + " stage-2 samples"};
        held_clean = synth_image(128, 128, 99);
        held_noisy = add_awgn_sigma(held_clean, 25.0, 1234);
        const Image denoised = denoise_with(desk.bundle, held_noisy);
        const double p_noisy = psnr(held_clean, held_noisy);
        const double p_den = psnr(held_clean, denoised);
        const double s_noisy = ssim(held_clean, held_noisy);
        const double s_den = ssim(held_clean, denoised);
        const bool ok = p_den >= p_noisy + 2.0 && s_den > s_noisy;
        return {ok, "psnr " + fmt(p_noisy, 2) + " -> " + fmt(p_den, 2) + " dB (gain " +
                        fmt(p_den - p_noisy, 2) + ", need >= 2.0), ssim " + fmt(s_noisy, 3) + " -> " +
                        fmt(s_den, 3) + "; " + std::to_string(desk.stage2_samples) +
                        " stage-2 samples, training " + fmt(desk.train_seconds, 0) + "s"};
    });

    // 7. One scene at three resolutions, 20 dB input SNR, positive gain each.
    run_criterion(7, [&]() -> std::pair<bool, std::string> {
        if (!desk.trained) return {false, "training failed: " + desk.error};
        std::string detail;
        bool ok = true;
        for (const std::size_t side : {std::size_t{64}, std::size_t{128}, std::size_t{256}}) {
            const Image clean = synth_image(side, side, 55);
            const Image noisy = add_awgn_snr(clean, 20.0, 500 + side);
            const Image denoised = denoise_with(desk.bundle, noisy);
            const double gain = psnr(clean, denoised) - psnr(clean, noisy);
            if (!(gain > 0.0)) ok = false;
            if (!detail.empty()) detail += ", ";
            detail += std::to_string(side) + "^2: " + fmt(gain, 2) + " dB";
        }
        return {ok, "psnr gains " + detail};
    });

    // 8. End-to-end determinism through the command-line tool.
    run_criterion(8, [&]() -> std::pair<bool, std::string> {
        if (cli.empty()) return {false, "no --cli path provided"};
        const fs::path ws = fs::path("/tmp") / ("dcfb_acc_" + std::to_string(::getpid()));
        fs::remove_all(ws);
        fs::create_directories(ws / "images");
        for (std::uint64_t i = 0; i < 3; ++i)
            save_pgm(synth_image(32, 32, 300 + i), (ws / "images" / ("img" + std::to_string(i) + ".pgm")).string());
        save_pgm(synth_image(32, 32, 303), (ws / "test.pgm").string());

        auto shell = [&](const std::string& args) {
            return run_command(cli + " " + args + " >/dev/null 2>&1");
        };
        auto one_run = [&](const std::string& tag) -> bool {
            const std::string pairs = (ws / ("pairs_" + tag + ".dcfd")).string();
            const std::string model = (ws / ("model_" + tag + ".dcfb")).string();
            const std::string out = (ws / ("out_" + tag + ".pgm")).string();
            if (shell("generate-data --images " + (ws / "images").string() + " --sigma 25 --seed 5 --out " +
                      pairs) != 0)
                return false;
            if (shell("train --stage all --data " + pairs + " --model " + model +
                      " --epochs 2 --batch 50 --seed 9 --window 12 --d 5") != 0)
                return false;
            return shell("denoise --in " + (ws / "test.pgm").string() + " --model " + model + " --out " +
                         out + " --workers 1") == 0;
        };
        if (!one_run("a") || !one_run("b")) {
            fs::remove_all(ws);
            return {false, "a pipeline invocation failed"};
        }
        const bool pairs_eq = slurp_file((ws / "pairs_a.dcfd").string()) ==
                              slurp_file((ws / "pairs_b.dcfd").string());
        const bool model_eq = slurp_file((ws / "model_a.dcfb").string()) ==
                              slurp_file((ws / "model_b.dcfb").string());
        const bool out_eq = slurp_file((ws / "out_a.pgm").string()) ==
                            slurp_file((ws / "out_b.pgm").string());
        const int rc = run_command(cli + " denoise --in " + (ws / "test.pgm").string() + " --model " +
                                   (ws / "model_a.dcfb").string() + " --out " +
                                   (ws / "out_w4.pgm").string() + " --workers 4 >/dev/null 2>&1");
        const bool workers_eq = rc == 0 && slurp_file((ws / "out_w4.pgm").string()) ==
                                               slurp_file((ws / "out_a.pgm").string());
        fs::remove_all(ws);
        const bool ok = pairs_eq && model_eq && out_eq && workers_eq;
        return {ok, std::string("datasets ") + (pairs_eq ? "identical" : "DIFFER") + ", models " +
                        (model_eq ? "identical" : "DIFFER") + ", outputs " +
                        (out_eq ? "identical" : "DIFFER") + ", workers 4 vs 1 " +
                        (workers_eq ? "identical" : "DIFFER")};
    });

    // 9. Metric closed forms and symmetry.
    run_criterion(9, []() -> std::pair<bool, std::string> {
        const Image a(16, 16, 0.4);
        const Image b(16, 16, 0.5);
        const double p = psnr(a, b);
        const bool psnr_ok = std::abs(p - 20.0) <= 0.01;

        const Image x = random_image(32, 32, 901);
        const bool ssim_ok = std::abs(ssim(x, x) - 1.0) <= 1e-9;

        bool symmetric = true;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Image u = random_image(24, 24, 910 + seed);
            const Image v = random_image(24, 24, 920 + seed);
            if (psnr(u, v) != psnr(v, u)) symmetric = false;
        }
        return {psnr_ok && ssim_ok && symmetric,
                "uniform-0.1 psnr " + fmt(p, 4) + " dB, self ssim error " +
                    fmt(std::abs(ssim(x, x) - 1.0), 12) + ", psnr symmetric on 5 pairs"};
    });

    // 10. Sparsity of trained representations, logged against reference 30.
    run_criterion(10, [&]() -> std::pair<bool, std::string> {
        if (!desk.trained) return {false, "training failed: " + desk.error};
        Image noisy = held_noisy;
        if (noisy.size() == 0) noisy = add_awgn_sigma(synth_image(128, 128, 99), 25.0, 1234);
        const PatchField field = extract_patch_field(noisy, 5);
        const Matrix codes = sparsify(desk.bundle.sparsifier, field.values);
        const double sparsity = measure_sparsity(codes, 0.01);
        const bool ok = std::isfinite(sparsity) && sparsity >= 0.0 && sparsity <= 100.0;
        return {ok, "mean active entries " + fmt(sparsity, 2) + " of 100 over " +
                        std::to_string(codes.cols()) + " representations (reference value 30)"};
    });

    std::cout << (g_all_pass ? "all criteria passed" : "SOME CRITERIA FAILED") << std::endl;
    return g_all_pass ? 0 : 1;
}
