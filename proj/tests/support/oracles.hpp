#pragma once

// Brute-force reference implementations. Deliberately independent of the
// library's search and accumulation strategies so agreement means something.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dcfb/block_matching.hpp"
#include "dcfb/image.hpp"
#include "dcfb/patches.hpp"
#include "dcfb/rng.hpp"

namespace dcfb::testsupport {

inline std::vector<double> patch_at(const Image& image, std::size_t row, std::size_t col,
                                    std::size_t n) {
    std::vector<double> values;
    values.reserve(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) values.push_back(image.at(row + r, col + c));
    return values;
}

// Exhaustive window scan plus a full sort with the declared tie-break
// (squared distance, then row, then column).
inline MatchSet brute_force_similar(const Image& image, std::size_t n, PatchCoord reference,
                                    const WindowSpec& spec) {
    const std::size_t grid_rows = image.height - n + 1;
    const std::size_t grid_cols = image.width - n + 1;
    const std::size_t radius = (spec.window_side - n) / 2;

    const std::size_t row_begin = reference.row > radius ? reference.row - radius : 0;
    const std::size_t col_begin = reference.col > radius ? reference.col - radius : 0;
    const std::size_t row_end = std::min(grid_rows, reference.row + radius + 1);
    const std::size_t col_end = std::min(grid_cols, reference.col + radius + 1);

    const std::vector<double> ref_patch = patch_at(image, reference.row, reference.col, n);

    struct Entry {
        double sq;
        std::size_t row, col;
    };
    std::vector<Entry> entries;
    for (std::size_t r = row_begin; r < row_end; ++r) {
        for (std::size_t c = col_begin; c < col_end; ++c) {
            if (r == reference.row && c == reference.col) continue;
            const std::vector<double> cand = patch_at(image, r, c, n);
            double sq = 0.0;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const double diff = ref_patch[i] - cand[i];
                sq += diff * diff;
            }
            entries.push_back({sq, r, c});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.sq != b.sq) return a.sq < b.sq;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });

    MatchSet out;
    out.coords.push_back(reference);
    out.distances.push_back(0.0);
    const std::size_t want = spec.collab_count - 1;
    for (std::size_t i = 0; i < std::min(want, entries.size()); ++i) {
        out.coords.push_back({entries[i].row, entries[i].col});
        out.distances.push_back(std::sqrt(entries[i].sq));
    }
    while (out.coords.size() < spec.collab_count) {
        out.coords.insert(out.coords.begin() + 1, reference);
        out.distances.insert(out.distances.begin() + 1, 0.0);
    }
    return out;
}

// Per-pixel scan over every patch: the dumb O(pixels * patches) average.
inline Image reference_aggregate(const std::vector<PatchVector>& patches, std::size_t n,
                                 std::size_t width, std::size_t height) {
    Image out(width, height);
    for (std::size_t pr = 0; pr < height; ++pr) {
        for (std::size_t pc = 0; pc < width; ++pc) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& patch : patches) {
                const std::size_t r0 = patch.coord.row;
                const std::size_t c0 = patch.coord.col;
                if (pr < r0 || pr >= r0 + n || pc < c0 || pc >= c0 + n) continue;
                sum += patch.values[(pr - r0) * n + (pc - c0)];
                ++count;
            }
            if (count > 0) out.at(pr, pc) = sum / static_cast<double>(count);
        }
    }
    return out;
}

// Seeded uniform-noise image: every pixel independent in [0, 1).
inline Image random_image(std::size_t width, std::size_t height, std::uint64_t seed) {
    Rng rng(seed);
    Image img(width, height);
    for (double& v : img.pixels) v = rng.uniform();
    return img;
}

} // namespace dcfb::testsupport
