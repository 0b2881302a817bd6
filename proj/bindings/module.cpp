// Thin numpy-facing wrapper over the core: noise injection, metrics, PGM io,
// bundle io/training, and full-image denoising.
#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <cstring>
#include <utility>

#include "dcfb/errors.hpp"
#include "dcfb/image.hpp"
#include "dcfb/io.hpp"
#include "dcfb/models.hpp"
#include "dcfb/pipeline.hpp"
#include "dcfb/training.hpp"

namespace py = pybind11;
using namespace dcfb;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const DoubleArray& array) {
    const auto buf = array.request();
    if (buf.ndim != 2) throw InputError("expected a 2-d array (height x width)");
    Image img(static_cast<std::size_t>(buf.shape[1]), static_cast<std::size_t>(buf.shape[0]));
    std::memcpy(img.pixels.data(), buf.ptr, sizeof(double) * img.pixels.size());
    return img;
}

py::array from_image(const Image& img) {
    py::array_t<double> out({img.height, img.width});
    std::memcpy(out.mutable_data(), img.pixels.data(), sizeof(double) * img.pixels.size());
    return std::move(out);
}

Matrix to_matrix(const DoubleArray& array) {
    const auto buf = array.request();
    if (buf.ndim != 2) throw InputError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(buf.shape[0]), static_cast<std::size_t>(buf.shape[1]));
    std::memcpy(m.data().data(), buf.ptr, sizeof(double) * m.size());
    return m;
}

py::array from_matrix(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data().data(), sizeof(double) * m.size());
    return std::move(out);
}

std::vector<Image> to_images(const std::vector<DoubleArray>& arrays) {
    std::vector<Image> images;
    images.reserve(arrays.size());
    for (const auto& a : arrays) images.push_back(to_image(a));
    return images;
}

py::dict bundle_info(const ModelBundle& bundle) {
    py::dict info;
    info["sparsifier_params"] = param_count(bundle.sparsifier.net);
    info["collaborator_params"] = bundle.collaborator.weights.size();
    info["denoiser_net_params"] = param_count(bundle.denoiser.net);
    info["denoiser_model_params"] =
        bundle.collaborator.weights.size() + param_count(bundle.denoiser.net);
    info["desparsifier_params"] = param_count(bundle.desparsifier.net);
    info["total_params"] = param_count(bundle.sparsifier.net) + bundle.collaborator.weights.size() +
                           param_count(bundle.denoiser.net) + param_count(bundle.desparsifier.net);
    info["patch_side"] = bundle.meta.patch_side;
    info["code_dim"] = bundle.meta.code_dim;
    info["collab_count"] = bundle.meta.collab_count;
    info["window_side"] = bundle.meta.window_side;
    info["sigma255"] = bundle.meta.sigma255;
    info["seed"] = bundle.meta.seed;
    return info;
}

ModelBundle train_full(const PatchPairSet& dataset, std::size_t epochs1, std::size_t epochs2,
                       std::size_t batch, double lr, std::uint64_t seed, std::size_t window_side,
                       std::size_t collab_count) {
    TrainConfig config;
    config.epochs = epochs1;
    config.batch_size = batch;
    config.learning_rate = lr;
    config.seed = seed;
    config.sigma255 = dataset.sigma255;
    Stage1Result s1 = train_stage1(dataset, config);

    ModelMeta meta;
    meta.patch_side = dataset.patch_side;
    meta.code_dim = config.code_dim;
    meta.collab_count = collab_count;
    meta.window_side = window_side;
    meta.sigma255 = dataset.sigma255;
    meta.seed = seed;

    auto [clean_images, noisy_images] = reconstruct_images(dataset);
    WindowSpec window{meta.window_side, meta.collab_count};
    auto samples = build_stage2_samples(noisy_images, clean_images, s1.sparsifier, window,
                                        dataset.patch_side);
    config.epochs = epochs2;
    Stage2Result s2 = train_stage2(samples, s1.desparsifier, config);

    ModelBundle bundle;
    bundle.sparsifier = std::move(s1.sparsifier);
    bundle.desparsifier = std::move(s1.desparsifier);
    bundle.collaborator = std::move(s2.collaborator);
    bundle.denoiser = std::move(s2.denoiser);
    bundle.meta = meta;
    return bundle;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "patch-collaboration image denoiser core";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InputError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const FormatError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ArchitectureError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    py::class_<ModelBundle>(m, "Bundle")
        .def_static(
            "fresh",
            [](std::size_t patch_side, std::size_t code_dim, std::size_t collab_count,
               std::size_t window_side, double sigma255, std::uint64_t seed) {
                ModelMeta meta{patch_side, code_dim, collab_count, window_side, sigma255, seed};
                return make_bundle(meta);
            },
            py::arg("patch_side") = 5, py::arg("code_dim") = 100, py::arg("collab_count") = 5,
            py::arg("window_side") = 50, py::arg("sigma255") = 25.0, py::arg("seed") = 0,
            "seeded untrained bundle")
        .def_static("load", &load_model, py::arg("path"))
        .def("save", &save_model, py::arg("path"))
        .def("info", &bundle_info, "parameter counts and metadata")
        .def("verify",
             [](const ModelBundle& b) {
                 verify_architecture(b);
             },
             "raise if any sub-model disagrees with the declared architecture");

    py::class_<PatchPairSet>(m, "Dataset")
        .def_static(
            "build",
            [](const std::vector<DoubleArray>& clean_images, std::size_t patch_side, double sigma255,
               std::uint64_t seed, bool per_patch_noise) {
                return build_dataset(to_images(clean_images), patch_side, sigma255, seed,
                                     per_patch_noise);
            },
            py::arg("clean_images"), py::arg("patch_side") = 5, py::arg("sigma255") = 25.0,
            py::arg("seed") = 0, py::arg("per_patch_noise") = false,
            "clean/noisy patch pairs from whole images")
        .def_static("load", &load_dataset, py::arg("path"))
        .def("save", &save_dataset, py::arg("path"))
        .def("__len__", [](const PatchPairSet& ds) { return ds.size(); })
        .def_property_readonly("patch_side", [](const PatchPairSet& ds) { return ds.patch_side; })
        .def_property_readonly("sigma255", [](const PatchPairSet& ds) { return ds.sigma255; });

    m.def(
        "add_noise_sigma",
        [](const DoubleArray& image, double sigma255, std::uint64_t seed) {
            return from_image(add_awgn_sigma(to_image(image), sigma255, seed));
        },
        py::arg("image"), py::arg("sigma255"), py::arg("seed") = 0,
        "white Gaussian noise with std sigma255/255; not clamped");

    m.def(
        "add_noise_snr",
        [](const DoubleArray& image, double snr_db, std::uint64_t seed) {
            return from_image(add_awgn_snr(to_image(image), snr_db, seed));
        },
        py::arg("image"), py::arg("snr_db"), py::arg("seed") = 0,
        "white Gaussian noise at a target SNR in dB");

    m.def(
        "psnr", [](const DoubleArray& a, const DoubleArray& b,
                   double peak) { return psnr(to_image(a), to_image(b), peak); },
        py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);

    m.def(
        "ssim",
        [](const DoubleArray& a, const DoubleArray& b) { return ssim(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"), "mean local SSIM over 8x8 windows");

    m.def(
        "load_pgm", [](const std::string& path) { return from_image(load_pgm(path)); },
        py::arg("path"), "binary PGM to a float array in [0, 1]");

    m.def(
        "save_pgm",
        [](const DoubleArray& image, const std::string& path) { save_pgm(to_image(image), path); },
        py::arg("image"), py::arg("path"), "clamp to [0, 1] and write binary PGM");

    m.def(
        "sparsify",
        [](const ModelBundle& bundle, const DoubleArray& patches) {
            return from_matrix(sparsify(bundle.sparsifier, to_matrix(patches)));
        },
        py::arg("bundle"), py::arg("patches"), "patch columns (n^2 x k) to sparse codes (m x k)");

    m.def(
        "desparsify",
        [](const ModelBundle& bundle, const DoubleArray& codes) {
            return from_matrix(desparsify(bundle.desparsifier, to_matrix(codes)));
        },
        py::arg("bundle"), py::arg("codes"), "sparse codes (m x k) back to patch columns (n^2 x k)");

    m.def(
        "measure_sparsity",
        [](const DoubleArray& codes, double threshold) {
            return measure_sparsity(to_matrix(codes), threshold);
        },
        py::arg("codes"), py::arg("threshold") = 0.01,
        "mean active entries per representation column");

    m.def(
        "denoise",
        [](const DoubleArray& noisy, const ModelBundle& bundle, std::size_t stride,
           std::size_t workers, std::size_t window_side) {
            DenoiseRequest request;
            request.noisy = to_image(noisy);
            request.bundle = bundle;
            request.window.window_side = window_side == 0 ? bundle.meta.window_side : window_side;
            request.window.collab_count = bundle.meta.collab_count;
            request.stride = stride;
            request.workers = workers;
            Image out;
            {
                py::gil_scoped_release release;
                out = denoise_image(request);
            }
            return from_image(out);
        },
        py::arg("noisy"), py::arg("bundle"), py::arg("stride") = 1, py::arg("workers") = 1,
        py::arg("window_side") = 0, "full-image denoising; clamped to [0, 1]");

    m.def(
        "train",
        [](const PatchPairSet& dataset, std::size_t epochs1, std::size_t epochs2, std::size_t batch,
           double lr, std::uint64_t seed, std::size_t window_side, std::size_t collab_count) {
            py::gil_scoped_release release;
            return train_full(dataset, epochs1, epochs2, batch, lr, seed, window_side, collab_count);
        },
        py::arg("dataset"), py::arg("epochs1") = 20, py::arg("epochs2") = 20, py::arg("batch") = 100,
        py::arg("lr") = 1e-3, py::arg("seed") = 0, py::arg("window_side") = 50,
        py::arg("collab_count") = 5, "both training stages; returns the bundle");

    m.def(
        "evaluate",
        [](const DoubleArray& clean, const DoubleArray& noisy, const DoubleArray& denoised) {
            const EvaluationReport rep = evaluate(to_image(clean), to_image(noisy), to_image(denoised));
            py::dict out;
            out["psnr_noisy"] = rep.psnr_noisy;
            out["psnr_denoised"] = rep.psnr_denoised;
            out["ssim_noisy"] = rep.ssim_noisy;
            out["ssim_denoised"] = rep.ssim_denoised;
            return out;
        },
        py::arg("clean"), py::arg("noisy"), py::arg("denoised"));
}
