#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dcfb/block_matching.hpp"
#include "dcfb/image.hpp"
#include "dcfb/models.hpp"

namespace dcfb {

struct DenoiseRequest {
    Image noisy;
    ModelBundle bundle;
    WindowSpec window;
    std::size_t stride = 1;   // reference-patch stride; tail coords are forced for coverage
    std::size_t workers = 1;  // threads for the per-reference phases; output is worker-invariant
};

struct StageTimings {
    double sparsify_s = 0.0;
    double match_collaborate_s = 0.0;
    double denoise_decode_s = 0.0;
    double aggregate_s = 0.0;
    double total_s = 0.0;
};

struct EvaluationReport {
    double psnr_noisy = 0.0;
    double psnr_denoised = 0.0;
    double ssim_noisy = 0.0;
    double ssim_denoised = 0.0;
    StageTimings timings;
};

// Denoises one image: sparsify the full stride-1 patch field, then per
// reference coordinate match similars and collaborate, run the denoiser and
// desparsifier, and aggregate by overlap averaging. Clamps to [0,1] once at
// the very end. Rejects inconsistent bundles before any work.
Image denoise_image(const DenoiseRequest& request, StageTimings* timings = nullptr);

// Metric fields only; timings are left zeroed.
EvaluationReport evaluate(const Image& clean, const Image& noisy, const Image& denoised);

struct BatchItem {
    DenoiseRequest request;
    Image clean;  // ground truth for the report
};

struct BatchResult {
    bool ok = false;
    std::string error;  // set when !ok
    Image denoised;
    EvaluationReport report;
};

// Independent per-item runs, order preserved; a failing item records its
// error and the batch continues.
std::vector<BatchResult> denoise_batch(const std::vector<BatchItem>& items);

} // namespace dcfb
