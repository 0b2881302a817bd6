#include "dcfb/patches.hpp"

#include <string>

#include "dcfb/errors.hpp"

namespace dcfb {

namespace {

void check_patch_fits(const Image& image, std::size_t patch_side) {
    if (patch_side == 0) throw InputError("patch side must be positive");
    if (patch_side > image.width || patch_side > image.height) {
        throw InputError("patch side " + std::to_string(patch_side) + " exceeds image " +
                         std::to_string(image.width) + "x" + std::to_string(image.height));
    }
}

} // namespace

std::vector<PatchVector> extract_patches(const Image& image, std::size_t patch_side, std::size_t stride) {
    check_patch_fits(image, patch_side);
    if (stride == 0) throw InputError("extract_patches: stride must be at least 1");
    std::vector<PatchVector> patches;
    const std::size_t max_row = image.height - patch_side;
    const std::size_t max_col = image.width - patch_side;
    patches.reserve((max_row / stride + 1) * (max_col / stride + 1));
    for (std::size_t r = 0; r <= max_row; r += stride) {
        for (std::size_t c = 0; c <= max_col; c += stride) {
            PatchVector patch;
            patch.coord = {r, c};
            patch.values.resize(patch_side * patch_side);
            std::size_t k = 0;
            for (std::size_t i = 0; i < patch_side; ++i) {
                const double* row = &image.pixels[(r + i) * image.width + c];
                for (std::size_t j = 0; j < patch_side; ++j) patch.values[k++] = row[j];
            }
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

PatchField extract_patch_field(const Image& image, std::size_t patch_side) {
    check_patch_fits(image, patch_side);
    PatchField field;
    field.patch_side = patch_side;
    field.grid_rows = image.height - patch_side + 1;
    field.grid_cols = image.width - patch_side + 1;
    field.image_width = image.width;
    field.image_height = image.height;
    field.values = Matrix(patch_side * patch_side, field.grid_rows * field.grid_cols);
    for (std::size_t r = 0; r < field.grid_rows; ++r) {
        for (std::size_t c = 0; c < field.grid_cols; ++c) {
            const std::size_t column = r * field.grid_cols + c;
            std::size_t k = 0;
            for (std::size_t i = 0; i < patch_side; ++i) {
                const double* row = &image.pixels[(r + i) * image.width + c];
                for (std::size_t j = 0; j < patch_side; ++j) field.values(k++, column) = row[j];
            }
        }
    }
    return field;
}

Image aggregate(const std::vector<PatchVector>& patches, std::size_t patch_side,
                std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw InputError("aggregate: empty target image");
    if (patch_side == 0 || patch_side > width || patch_side > height) {
        throw InputError("aggregate: patch side does not fit the target image");
    }
    std::vector<double> sums(width * height, 0.0);
    std::vector<std::uint32_t> counts(width * height, 0);
    const std::size_t vals = patch_side * patch_side;
    for (const PatchVector& patch : patches) {
        if (patch.values.size() != vals) {
            throw InputError("aggregate: patch value length does not match patch side");
        }
        if (patch.coord.row + patch_side > height || patch.coord.col + patch_side > width) {
            throw InputError("aggregate: patch at (" + std::to_string(patch.coord.row) + "," +
                             std::to_string(patch.coord.col) + ") exceeds image bounds");
        }
        std::size_t k = 0;
        for (std::size_t i = 0; i < patch_side; ++i) {
            const std::size_t base = (patch.coord.row + i) * width + patch.coord.col;
            for (std::size_t j = 0; j < patch_side; ++j, ++k) {
                sums[base + j] += patch.values[k];
                counts[base + j] += 1;
            }
        }
    }
    Image image(width, height);
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (counts[i] == 0) {
            throw CoverageError("aggregate: pixel (" + std::to_string(i / width) + "," +
                                std::to_string(i % width) + ") is covered by no patch");
        }
        image.pixels[i] = sums[i] / static_cast<double>(counts[i]);
    }
    return image;
}

} // namespace dcfb
