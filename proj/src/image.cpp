#include "dcfb/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "dcfb/errors.hpp"
#include "dcfb/rng.hpp"

namespace dcfb {

namespace {

// Reads one whitespace-separated header token, skipping '#' comment lines.
std::string next_header_token(std::istream& in) {
    std::string token;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch)) {
        token.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    return token;
}

std::size_t parse_dimension(const std::string& token, const std::string& what) {
    if (token.empty()) throw FormatError("pgm: missing " + what);
    std::size_t value = 0;
    for (char c : token) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw FormatError("pgm: non-numeric " + what + " '" + token + "'");
        }
        value = value * 10 + static_cast<std::size_t>(c - '0');
        if (value > 1'000'000'000) throw FormatError("pgm: " + what + " out of range");
    }
    return value;
}

} // namespace

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("pgm: cannot open '" + path + "'");

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
        throw FormatError("pgm: '" + path + "' is not a binary PGM (P5)");
    }
    const std::size_t width = parse_dimension(next_header_token(in), "width");
    const std::size_t height = parse_dimension(next_header_token(in), "height");
    const std::size_t maxval = parse_dimension(next_header_token(in), "maxval");
    if (width == 0 || height == 0) throw FormatError("pgm: zero dimension in '" + path + "'");
    if (maxval != 255) {
        throw FormatError("pgm: maxval must be 255, got " + std::to_string(maxval));
    }
    // next_header_token consumed exactly one whitespace byte after the maxval.

    std::vector<unsigned char> raw(width * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError("pgm: truncated pixel payload in '" + path + "'");
    }

    Image image(width, height);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        image.pixels[i] = static_cast<double>(raw[i]) / 255.0;
    }
    return image;
}

void save_pgm(const Image& image, const std::string& path) {
    if (image.width == 0 || image.height == 0) throw InputError("save_pgm: empty image");
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("pgm: cannot write '" + tmp + "'");
        out << "P5\n" << image.width << " " << image.height << "\n255\n";
        std::vector<unsigned char> raw(image.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double v = std::clamp(image.pixels[i], 0.0, 1.0);
            raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!out) throw FormatError("pgm: write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

Image add_awgn_sigma(const Image& image, double sigma255, std::uint64_t seed) {
    if (sigma255 < 0.0) throw InputError("add_awgn_sigma: negative sigma");
    Image noisy = image;
    if (sigma255 == 0.0) return noisy;
    const double sigma = sigma255 / 255.0;
    Rng rng(seed);
    for (double& v : noisy.pixels) v += sigma * rng.gaussian();
    return noisy;
}

Image add_awgn_snr(const Image& image, double snr_db, std::uint64_t seed) {
    double power = 0.0;
    for (double v : image.pixels) power += v * v;
    power /= static_cast<double>(image.size());
    if (power == 0.0) throw InputError("add_awgn_snr: SNR is undefined for an all-zero image");
    if (std::isinf(snr_db) && snr_db > 0.0) return image;
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    return add_awgn_sigma(image, sigma * 255.0, seed);
}

double psnr(const Image& a, const Image& b, double peak) {
    if (!a.same_shape(b)) throw InputError("psnr: image shapes differ");
    if (a.size() == 0) throw InputError("psnr: empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a.pixels[i] - b.pixels[i];
        sum += diff * diff;
    }
    const double mse = sum / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& a, const Image& b) {
    constexpr std::size_t kWindow = 8;
    constexpr double kC1 = 0.01 * 0.01;  // (0.01 * peak)^2, peak = 1
    constexpr double kC2 = 0.03 * 0.03;
    if (!a.same_shape(b)) throw InputError("ssim: image shapes differ");
    if (a.width < kWindow || a.height < kWindow) {
        throw InputError("ssim: images must be at least 8x8");
    }
    const double inv_count = 1.0 / static_cast<double>(kWindow * kWindow);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r = 0; r + kWindow <= a.height; ++r) {
        for (std::size_t c = 0; c + kWindow <= a.width; ++c) {
            double sum_a = 0.0, sum_b = 0.0, sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;
            for (std::size_t i = 0; i < kWindow; ++i) {
                const double* pa = &a.pixels[(r + i) * a.width + c];
                const double* pb = &b.pixels[(r + i) * b.width + c];
                for (std::size_t j = 0; j < kWindow; ++j) {
                    sum_a += pa[j];
                    sum_b += pb[j];
                    sum_aa += pa[j] * pa[j];
                    sum_bb += pb[j] * pb[j];
                    sum_ab += pa[j] * pb[j];
                }
            }
            const double mean_a = sum_a * inv_count;
            const double mean_b = sum_b * inv_count;
            const double var_a = sum_aa * inv_count - mean_a * mean_a;
            const double var_b = sum_bb * inv_count - mean_b * mean_b;
            const double cov = sum_ab * inv_count - mean_a * mean_b;
            const double numer = (2.0 * mean_a * mean_b + kC1) * (2.0 * cov + kC2);
            const double denom = (mean_a * mean_a + mean_b * mean_b + kC1) * (var_a + var_b + kC2);
            total += numer / denom;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

} // namespace dcfb
