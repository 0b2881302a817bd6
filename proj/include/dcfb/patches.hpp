#pragma once

#include <cstddef>
#include <vector>

#include "dcfb/image.hpp"
#include "dcfb/matrix.hpp"

namespace dcfb {

// Top-left pixel of a patch.
struct PatchCoord {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const PatchCoord&) const = default;
};

// One vectorized n x n patch (row-major flattening) with its source coord.
struct PatchVector {
    PatchCoord coord;
    std::vector<double> values;
};

// Overlapping patches at all top-left coords {0, stride, ...} in row-major
// scan order. No padding: coordinates stop at (height-n, width-n).
std::vector<PatchVector> extract_patches(const Image& image, std::size_t patch_side, std::size_t stride);

// Full stride-1 patch grid in matrix form: column index r*grid_cols + c holds
// the vectorized patch at coord (r, c). This is the search structure for
// block matching and the batch input for the sparsifier.
struct PatchField {
    std::size_t patch_side = 0;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
    Matrix values;  // patch_side^2 x (grid_rows * grid_cols)

    std::size_t index(PatchCoord coord) const { return coord.row * grid_cols + coord.col; }
    PatchCoord coord(std::size_t index) const { return {index / grid_cols, index % grid_cols}; }
    std::size_t count() const { return grid_rows * grid_cols; }
};

PatchField extract_patch_field(const Image& image, std::size_t patch_side);

// Overlap averaging: each pixel is the mean of every patch value laid over
// it. Throws CoverageError naming the first pixel no patch covers.
Image aggregate(const std::vector<PatchVector>& patches, std::size_t patch_side,
                std::size_t width, std::size_t height);

} // namespace dcfb
