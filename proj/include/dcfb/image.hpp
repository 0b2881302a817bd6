#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dcfb {

// Grayscale image, intensities nominally in [0, 1], row-major.
// Values may leave [0, 1] during processing; clamping happens at save time.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(std::size_t w, std::size_t h, double value = 0.0)
        : width(w), height(h), pixels(w * h, value) {}

    double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    std::size_t size() const { return pixels.size(); }
    bool same_shape(const Image& other) const {
        return width == other.width && height == other.height;
    }
};

// Binary PGM (P5), maxval 255. Load maps byte v to v/255; save clamps to
// [0, 1] and rounds to v*255.
Image load_pgm(const std::string& path);
void save_pgm(const Image& image, const std::string& path);

// Adds i.i.d. zero-mean Gaussian noise with standard deviation sigma255/255.
// The result is not clamped.
Image add_awgn_sigma(const Image& image, double sigma255, std::uint64_t seed);

// Noise level chosen so that 10*log10(mean(x^2)/sigma^2) equals snr_db.
// +infinity maps to zero noise. Rejects an all-zero image.
Image add_awgn_snr(const Image& image, double snr_db, std::uint64_t seed);

// 10*log10(peak^2 / MSE); identical images give +infinity.
double psnr(const Image& a, const Image& b, double peak = 1.0);

// Mean local SSIM over 8x8 windows at stride 1, uniform window weights,
// C1 = (0.01*peak)^2, C2 = (0.03*peak)^2 with peak = 1.
double ssim(const Image& a, const Image& b);

} // namespace dcfb
