#include "dcfb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dcfb/errors.hpp"
#include "dcfb/patches.hpp"

namespace dcfb {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

// Dimensional consistency only. Stub bundles (identity autoencoders, shallow
// denoisers) are legal here; the strict parameter-count check is a separate
// concern (verify_architecture).
void check_request(const DenoiseRequest& request) {
    const ModelBundle& b = request.bundle;
    const std::size_t n = b.meta.patch_side;
    if (n == 0) throw ArchitectureError("bundle: zero patch side");
    if (b.sparsifier.net.layers.empty() || b.denoiser.net.layers.empty() ||
        b.desparsifier.net.layers.empty() || b.collaborator.weights.empty())
        throw ArchitectureError("bundle: empty sub-model");
    try {
        validate_chain(b.sparsifier.net);
        validate_chain(b.denoiser.net);
        validate_chain(b.desparsifier.net);
    } catch (const Error& e) {
        throw ArchitectureError(std::string("bundle: ") + e.what());
    }
    const std::size_t n2 = n * n;
    const std::size_t m = b.collaborator.weights.rows();
    const std::size_t d = b.collaborator.weights.cols();
    if (b.sparsifier.net.in_dim() != n2 || b.sparsifier.net.out_dim() != m)
        throw ArchitectureError("bundle: sparsifier dims disagree with patch side or weight sheet");
    if (b.denoiser.net.in_dim() != m || b.denoiser.net.out_dim() != m)
        throw ArchitectureError("bundle: denoiser dims disagree with the weight sheet");
    if (b.desparsifier.net.in_dim() != m || b.desparsifier.net.out_dim() != n2)
        throw ArchitectureError("bundle: desparsifier dims disagree with patch side or weight sheet");
    if (request.window.collab_count != d)
        throw ArchitectureError("request: window collaboration count " +
                                std::to_string(request.window.collab_count) +
                                " disagrees with the " + std::to_string(d) + "-column weight sheet");
    if (request.window.window_side < n)
        throw InputError("request: window side smaller than patch side");
    if (request.stride == 0) throw InputError("request: stride must be >= 1");
    if (request.workers == 0) throw InputError("request: workers must be >= 1");
    if (request.noisy.width < n || request.noisy.height < n)
        throw InputError("request: image smaller than the patch side");
}

// Top-left offsets 0, stride, 2*stride, ... with the final offset forced to
// extent - n so the far border is always covered.
std::vector<std::size_t> stride_positions(std::size_t extent, std::size_t n, std::size_t stride) {
    const std::size_t last = extent - n;
    std::vector<std::size_t> positions;
    for (std::size_t p = 0;; p += stride) {
        if (p >= last) {
            positions.push_back(last);
            break;
        }
        positions.push_back(p);
    }
    return positions;
}

// Contiguous-range fan-out. Each range writes disjoint outputs, so results
// cannot depend on the worker count; the first exception is rethrown.
template <typename Fn>
void run_parallel(std::size_t count, std::size_t workers, Fn&& fn) {
    const std::size_t use = count == 0 ? 1 : std::min(workers, count);
    if (use <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto guarded = [&](std::size_t begin, std::size_t end) {
        try {
            fn(begin, end);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    const std::size_t chunk = (count + use - 1) / use;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < use; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(guarded, begin, end);
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

Image denoise_image(const DenoiseRequest& request, StageTimings* timings) {
    check_request(request);
    const auto t0 = Clock::now();
    const ModelBundle& bundle = request.bundle;
    const std::size_t n = bundle.meta.patch_side;

    const PatchField field = extract_patch_field(request.noisy, n);
    const Matrix reps_all = sparsify(bundle.sparsifier, field.values);
    const auto t1 = Clock::now();

    const std::vector<std::size_t> row_pos = stride_positions(request.noisy.height, n, request.stride);
    const std::vector<std::size_t> col_pos = stride_positions(request.noisy.width, n, request.stride);
    const std::size_t ref_count = row_pos.size() * col_pos.size();
    const std::size_t m = bundle.collaborator.weights.rows();
    const std::size_t d = bundle.collaborator.weights.cols();

    auto ref_coord = [&](std::size_t ref) {
        return PatchCoord{row_pos[ref / col_pos.size()], col_pos[ref % col_pos.size()]};
    };

    Matrix collab(m, ref_count);
    run_parallel(ref_count, request.workers, [&](std::size_t begin, std::size_t end) {
        Matrix gathered(m, d);
        for (std::size_t ref = begin; ref < end; ++ref) {
            const MatchSet matches = find_similar(field, ref_coord(ref), request.window);
            for (std::size_t j = 0; j < d; ++j)
                gathered.copy_column_from(reps_all, field.index(matches.coords[j]), j);
            const Matrix combined = collaborate(bundle.collaborator, gathered);
            collab.copy_column_from(combined, 0, ref);
        }
    });
    const auto t2 = Clock::now();

    // Denoiser and decoder forwards over contiguous column blocks; columns
    // are independent, so the block split never changes an output bit.
    Matrix patches_out(n * n, ref_count);
    run_parallel(ref_count, request.workers, [&](std::size_t begin, std::size_t end) {
        if (begin >= end) return;
        Matrix block(m, end - begin);
        for (std::size_t c = begin; c < end; ++c) block.copy_column_from(collab, c, c - begin);
        const Matrix decoded = desparsify(bundle.desparsifier, forward(bundle.denoiser.net, block));
        for (std::size_t c = begin; c < end; ++c) patches_out.copy_column_from(decoded, c - begin, c);
    });
    const auto t3 = Clock::now();

    std::vector<PatchVector> patches(ref_count);
    for (std::size_t ref = 0; ref < ref_count; ++ref) {
        patches[ref].coord = ref_coord(ref);
        patches[ref].values = patches_out.column(ref);
    }
    Image out = aggregate(patches, n, request.noisy.width, request.noisy.height);
    for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
    const auto t4 = Clock::now();

    if (timings) {
        timings->sparsify_s = seconds_between(t0, t1);
        timings->match_collaborate_s = seconds_between(t1, t2);
        timings->denoise_decode_s = seconds_between(t2, t3);
        timings->aggregate_s = seconds_between(t3, t4);
        timings->total_s = seconds_between(t0, t4);
    }
    return out;
}

EvaluationReport evaluate(const Image& clean, const Image& noisy, const Image& denoised) {
    if (!clean.same_shape(noisy) || !clean.same_shape(denoised))
        throw InputError("evaluate: image shapes disagree");
    EvaluationReport report;
    report.psnr_noisy = psnr(clean, noisy);
    report.psnr_denoised = psnr(clean, denoised);
    report.ssim_noisy = ssim(clean, noisy);
    report.ssim_denoised = ssim(clean, denoised);
    return report;
}

std::vector<BatchResult> denoise_batch(const std::vector<BatchItem>& items) {
    std::vector<BatchResult> results(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        BatchResult& result = results[i];
        try {
            StageTimings timings;
            result.denoised = denoise_image(items[i].request, &timings);
            result.report = evaluate(items[i].clean, items[i].request.noisy, result.denoised);
            result.report.timings = timings;
            result.ok = true;
        } catch (const std::exception& e) {
            result.ok = false;
            result.error = e.what();
        }
    }
    return results;
}

} // namespace dcfb
