// dcfb: dataset generation, two-stage training, denoising, noise injection,
// and bundle inspection. Exit codes: 0 ok, 1 runtime/numeric failure,
// 2 usage or input error.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dcfb/errors.hpp"
#include "dcfb/image.hpp"
#include "dcfb/io.hpp"
#include "dcfb/models.hpp"
#include "dcfb/pipeline.hpp"
#include "dcfb/training.hpp"

namespace fs = std::filesystem;
using namespace dcfb;

namespace {

std::vector<Image> load_image_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (ext == ".pgm") paths.push_back(entry.path().string());
    }
    if (paths.empty()) throw InputError("no PGM images in " + dir);
    std::sort(paths.begin(), paths.end());
    std::vector<Image> images;
    images.reserve(paths.size());
    for (const auto& p : paths) images.push_back(load_pgm(p));
    return images;
}

struct TrainArgs {
    std::string stage = "all";
    std::string data;
    std::string model;
    std::string log;
    std::string profile;
    std::size_t epochs = 200;
    bool epochs_given = false;
    std::size_t batch = 100;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::size_t window = 0;  // 0: take from the bundle / defaults
    std::size_t d = 0;
    std::size_t checkpoint_every = 0;
};

ModelBundle assemble_stage1_bundle(const Sparsifier& sparsifier, const Desparsifier& desparsifier,
                                   const ModelMeta& meta) {
    ModelBundle bundle = make_bundle(meta);  // fresh collaborator + denoiser for stage 2
    bundle.sparsifier = sparsifier;
    bundle.desparsifier = desparsifier;
    return bundle;
}

int cmd_train(const TrainArgs& args) {
    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!args.log.empty()) {
        log_file.open(args.log, std::ios::app);
        if (!log_file) throw InputError("cannot open log file " + args.log);
        log = &log_file;
    }

    const PatchPairSet dataset = load_dataset(args.data);

    TrainConfig config;
    config.batch_size = args.batch;
    config.epochs = args.epochs;
    if (!args.epochs_given) {
        if (args.profile == "desk") config.epochs = 20;
        if (args.profile == "paper") config.epochs = 200;
    }
    config.learning_rate = args.lr;
    config.seed = args.seed;
    config.sigma255 = dataset.sigma255;
    config.checkpoint_every = args.checkpoint_every;

    const bool run1 = args.stage == "1" || args.stage == "all";
    const bool run2 = args.stage == "2" || args.stage == "all";

    ModelBundle bundle;
    if (run1) {
        ModelMeta meta;
        meta.patch_side = dataset.patch_side;
        meta.code_dim = config.code_dim;
        meta.collab_count = args.d == 0 ? meta.collab_count : args.d;
        meta.window_side = args.window == 0 ? meta.window_side : args.window;
        meta.sigma255 = dataset.sigma255;
        meta.seed = config.seed;

        Stage1Checkpoint checkpoint;
        if (config.checkpoint_every > 0) {
            checkpoint = [&](std::size_t epoch, const Sparsifier& s, const Desparsifier& d2) {
                save_model(assemble_stage1_bundle(s, d2, meta),
                           args.model + ".s1.ckpt" + std::to_string(epoch));
            };
        }
        Stage1Result s1 = train_stage1(dataset, config, log, checkpoint);
        bundle = assemble_stage1_bundle(s1.sparsifier, s1.desparsifier, meta);
        if (!run2) {
            save_model(bundle, args.model);
            return 0;
        }
    } else {
        if (!fs::exists(args.model))
            throw InputError("stage 2 requires the stage-1 bundle at " + args.model +
                             "; run --stage 1 (or all) first");
        bundle = load_model(args.model);
        if (bundle.meta.patch_side != dataset.patch_side)
            throw InputError("bundle patch side " + std::to_string(bundle.meta.patch_side) +
                             " disagrees with dataset patch side " + std::to_string(dataset.patch_side));
        if (args.window != 0) bundle.meta.window_side = args.window;
        if (args.d != 0) bundle.meta.collab_count = args.d;
    }

    auto [clean_images, noisy_images] = reconstruct_images(dataset);
    WindowSpec window;
    window.window_side = bundle.meta.window_side;
    window.collab_count = bundle.meta.collab_count;
    std::vector<Stage2Sample> samples =
        build_stage2_samples(noisy_images, clean_images, bundle.sparsifier, window, dataset.patch_side);

    Stage2Checkpoint checkpoint;
    if (config.checkpoint_every > 0) {
        checkpoint = [&](std::size_t epoch, const CollaboratorWeights& c, const DenoiserNet& den) {
            ModelBundle snap = bundle;
            snap.collaborator = c;
            snap.denoiser = den;
            save_model(snap, args.model + ".s2.ckpt" + std::to_string(epoch));
        };
    }
    Stage2Result s2 = train_stage2(samples, bundle.desparsifier, config, log, checkpoint);
    bundle.collaborator = s2.collaborator;
    bundle.denoiser = s2.denoiser;
    save_model(bundle, args.model);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"patch-collaboration image denoiser"};
    app.require_subcommand(1);
    app.set_config("--config")->description("key=value config file; flags win over file values");

    auto* gen = app.add_subcommand("generate-data", "build a clean/noisy patch dataset from a PGM directory");
    std::string gen_images, gen_out;
    double gen_sigma = 25.0;
    std::uint64_t gen_seed = 0;
    std::size_t gen_n = 5;
    bool gen_per_patch = false;
    gen->add_option("--images", gen_images, "directory of PGM images")->required();
    gen->add_option("--sigma", gen_sigma, "noise std on the 0-255 scale");
    gen->add_option("--out", gen_out, "output dataset file")->required();
    gen->add_option("--seed", gen_seed, "noise seed");
    gen->add_option("--n", gen_n, "patch side");
    gen->add_flag("--per-patch-noise", gen_per_patch, "draw noise per patch instead of per image");

    auto* train = app.add_subcommand("train", "run the two-stage training");
    TrainArgs targs;
    train->add_option("--stage", targs.stage, "1, 2, or all")
        ->check(CLI::IsMember({"1", "2", "all"}));
    train->add_option("--data", targs.data, "dataset file from generate-data")->required();
    train->add_option("--model", targs.model, "model bundle path (stage 2 reads and rewrites it)")
        ->required();
    auto* epochs_opt = train->add_option("--epochs", targs.epochs, "training epochs per stage");
    train->add_option("--batch", targs.batch, "mini-batch size");
    train->add_option("--lr", targs.lr, "Adam learning rate");
    train->add_option("--seed", targs.seed, "weight init / shuffle seed");
    train->add_option("--log", targs.log, "append epoch lines to this file (default: stdout)");
    train->add_option("--profile", targs.profile, "desk (20 epochs) or paper (200 epochs) defaults")
        ->check(CLI::IsMember({"desk", "paper"}));
    train->add_option("--window", targs.window, "similarity window side for stage 2");
    train->add_option("--d", targs.d, "collaboration count for stage 2");
    train->add_option("--checkpoint-every", targs.checkpoint_every, "write a checkpoint bundle every k epochs");

    auto* den = app.add_subcommand("denoise", "denoise a PGM image with a trained bundle");
    std::string den_in, den_model, den_out, den_clean;
    std::size_t den_workers = 1, den_stride = 1, den_window = 0;
    den->add_option("--in", den_in, "noisy PGM")->required();
    den->add_option("--model", den_model, "DCFB1 bundle")->required();
    den->add_option("--out", den_out, "output PGM")->required();
    den->add_option("--clean", den_clean, "ground-truth PGM; prints a metric line");
    den->add_option("--workers", den_workers, "worker threads (output is identical for any count)");
    den->add_option("--stride", den_stride, "reference patch stride");
    den->add_option("--window", den_window, "override the bundle's window side");

    auto* addn = app.add_subcommand("add-noise", "add white Gaussian noise to a PGM");
    std::string addn_in, addn_out;
    double addn_sigma = 0.0, addn_snr = 0.0;
    std::uint64_t addn_seed = 0;
    addn->add_option("--in", addn_in, "input PGM")->required();
    addn->add_option("--out", addn_out, "output PGM")->required();
    auto* sig_opt = addn->add_option("--sigma", addn_sigma, "noise std on the 0-255 scale");
    auto* snr_opt = addn->add_option("--snr-db", addn_snr, "target SNR in dB");
    sig_opt->excludes(snr_opt);
    snr_opt->excludes(sig_opt);
    addn->add_option("--seed", addn_seed, "noise seed");

    auto* info = app.add_subcommand("info", "print a bundle's parameter counts and metadata");
    std::string info_model;
    info->add_option("--model", info_model, "DCFB1 bundle")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            const std::vector<Image> images = load_image_dir(gen_images);
            const PatchPairSet ds = build_dataset(images, gen_n, gen_sigma, gen_seed, gen_per_patch);
            save_dataset(ds, gen_out);
            std::cout << ds.size() << " pairs\n";
        } else if (train->parsed()) {
            targs.epochs_given = epochs_opt->count() > 0;
            return cmd_train(targs);
        } else if (den->parsed()) {
            DenoiseRequest request;
            request.bundle = load_model(den_model);
            request.noisy = load_pgm(den_in);
            request.window.window_side = den_window == 0 ? request.bundle.meta.window_side : den_window;
            request.window.collab_count = request.bundle.meta.collab_count;
            request.stride = den_stride;
            request.workers = den_workers;
            const Image denoised = denoise_image(request);
            save_pgm(denoised, den_out);
            if (!den_clean.empty()) {
                const Image clean = load_pgm(den_clean);
                const EvaluationReport rep = evaluate(clean, request.noisy, denoised);
                std::cout << std::setprecision(10) << "psnr_noisy=" << rep.psnr_noisy
                          << " psnr_denoised=" << rep.psnr_denoised << " ssim_noisy=" << rep.ssim_noisy
                          << " ssim_denoised=" << rep.ssim_denoised << "\n";
            }
        } else if (addn->parsed()) {
            if (sig_opt->count() == 0 && snr_opt->count() == 0)
                throw InputError("add-noise needs exactly one of --sigma or --snr-db");
            const Image input = load_pgm(addn_in);
            const Image noisy = sig_opt->count() > 0 ? add_awgn_sigma(input, addn_sigma, addn_seed)
                                                     : add_awgn_snr(input, addn_snr, addn_seed);
            save_pgm(noisy, addn_out);
        } else if (info->parsed()) {
            const ModelBundle bundle = load_model(info_model);
            ArchitectureReport report;
            report.sparsifier_params = param_count(bundle.sparsifier.net);
            report.collaborator_params = bundle.collaborator.weights.size();
            report.denoiser_net_params = param_count(bundle.denoiser.net);
            report.denoiser_model_params = report.collaborator_params + report.denoiser_net_params;
            report.desparsifier_params = param_count(bundle.desparsifier.net);
            report.total_params = report.sparsifier_params + report.denoiser_model_params +
                                  report.desparsifier_params;
            std::cout << format_report(report);
            const ModelMeta& m = bundle.meta;
            std::cout << "patch_side: " << m.patch_side << "\n"
                      << "code_dim: " << m.code_dim << "\n"
                      << "collab_count: " << m.collab_count << "\n"
                      << "window_side: " << m.window_side << "\n"
                      << "sigma255: " << m.sigma255 << "\n"
                      << "seed: " << m.seed << "\n";
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArchitectureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
