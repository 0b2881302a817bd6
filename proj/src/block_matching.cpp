#include "dcfb/block_matching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcfb/errors.hpp"

namespace dcfb {

CoordRange candidate_coords(PatchCoord reference, const WindowSpec& spec,
                            std::size_t image_width, std::size_t image_height,
                            std::size_t patch_side) {
    if (spec.window_side < patch_side) {
        throw InputError("candidate_coords: window side smaller than patch side");
    }
    const std::size_t radius = (spec.window_side - patch_side) / 2;
    const std::size_t max_row = image_height - patch_side;
    const std::size_t max_col = image_width - patch_side;
    CoordRange range;
    range.row_begin = reference.row > radius ? reference.row - radius : 0;
    range.row_end = std::min(reference.row + radius, max_row) + 1;
    range.col_begin = reference.col > radius ? reference.col - radius : 0;
    range.col_end = std::min(reference.col + radius, max_col) + 1;
    return range;
}

MatchSet find_similar(const PatchField& field, PatchCoord reference, const WindowSpec& spec) {
    if (spec.window_side < field.patch_side) {
        throw InputError("find_similar: window side smaller than patch side");
    }
    if (spec.collab_count == 0) throw InputError("find_similar: collaboration count must be at least 1");
    if (reference.row >= field.grid_rows || reference.col >= field.grid_cols) {
        throw InputError("find_similar: reference (" + std::to_string(reference.row) + "," +
                         std::to_string(reference.col) + ") outside the patch field");
    }

    const CoordRange range = candidate_coords(reference, spec, field.image_width,
                                              field.image_height, field.patch_side);
    const std::size_t dim = field.patch_side * field.patch_side;
    const double* ref_col = nullptr;
    std::vector<double> ref_values(dim);
    {
        const std::size_t ref_index = field.index(reference);
        for (std::size_t k = 0; k < dim; ++k) ref_values[k] = field.values(k, ref_index);
        ref_col = ref_values.data();
    }

    struct Candidate {
        double sq_dist;
        PatchCoord coord;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(range.count());
    for (std::size_t r = range.row_begin; r < range.row_end; ++r) {
        for (std::size_t c = range.col_begin; c < range.col_end; ++c) {
            if (r == reference.row && c == reference.col) continue;
            const std::size_t column = r * field.grid_cols + c;
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = field.values(k, column) - ref_col[k];
                sq += diff * diff;
            }
            candidates.push_back({sq, {r, c}});
        }
    }

    const std::size_t wanted = spec.collab_count - 1;
    const std::size_t taken = std::min(wanted, candidates.size());
    const auto orders_before = [](const Candidate& a, const Candidate& b) {
        if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
        if (a.coord.row != b.coord.row) return a.coord.row < b.coord.row;
        return a.coord.col < b.coord.col;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(taken),
                      candidates.end(), orders_before);

    MatchSet matches;
    matches.coords.reserve(spec.collab_count);
    matches.distances.reserve(spec.collab_count);
    matches.coords.push_back(reference);
    matches.distances.push_back(0.0);
    // Padding repeats the reference right after itself so distances stay
    // non-decreasing from index 1.
    for (std::size_t pad = taken; pad < wanted; ++pad) {
        matches.coords.push_back(reference);
        matches.distances.push_back(0.0);
    }
    for (std::size_t i = 0; i < taken; ++i) {
        matches.coords.push_back(candidates[i].coord);
        matches.distances.push_back(std::sqrt(candidates[i].sq_dist));
    }
    return matches;
}

} // namespace dcfb
