#pragma once

#include <cstddef>
#include <vector>

#include "dcfb/patches.hpp"

namespace dcfb {

// Search window side S (pixels) and total collaboration count d
// (reference + d-1 similars).
struct WindowSpec {
    std::size_t window_side = 50;
    std::size_t collab_count = 5;
};

// Half-open coordinate rectangle of candidate patch positions.
struct CoordRange {
    std::size_t row_begin = 0, row_end = 0;
    std::size_t col_begin = 0, col_end = 0;
    std::size_t count() const { return (row_end - row_begin) * (col_end - col_begin); }
};

// All valid patch coords within radius floor((S - n) / 2) of the reference,
// clipped at the image borders (the window is never shifted).
CoordRange candidate_coords(PatchCoord reference, const WindowSpec& spec,
                            std::size_t image_width, std::size_t image_height,
                            std::size_t patch_side);

// Reference first (distance 0), then the d-1 nearest window candidates by
// Euclidean distance in ascending order.
struct MatchSet {
    std::vector<PatchCoord> coords;
    std::vector<double> distances;
};

// Distances are computed between vectorized noisy patches. Ties break by
// row-major coordinate order, so the result is independent of enumeration
// order. When the window holds fewer than d-1 candidates the reference is
// repeated (immediately after itself) to pad the set to d.
MatchSet find_similar(const PatchField& field, PatchCoord reference, const WindowSpec& spec);

} // namespace dcfb
