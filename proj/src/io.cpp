#include "dcfb/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dcfb/errors.hpp"

namespace dcfb {
namespace {

constexpr char kModelMagic[4] = {'D', 'C', 'F', 'B'};
constexpr char kDatasetMagic[4] = {'D', 'C', 'F', 'D'};
constexpr std::uint8_t kVersion = 1;

// Caps that keep a corrupt header from demanding absurd allocations.
constexpr std::uint32_t kMaxLayers = 1024;
constexpr std::uint32_t kMaxDim = 1u << 20;
constexpr std::uint32_t kMaxImages = 1u << 20;
constexpr std::uint32_t kMaxSide = 1u << 16;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void require(std::size_t n) {
        if (buf.size() - pos < n) throw FormatError("truncated file: " + path);
    }

    std::uint8_t u8() {
        require(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }

    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    void done() {
        if (pos != buf.size()) throw FormatError("trailing bytes in " + path);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) throw InputError("cannot read " + path);
    return std::move(ss).str();
}

void atomic_write(const std::string& path, const std::string& data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open " + tmp + " for writing");
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw InputError("cannot write " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw InputError("cannot rename " + tmp + " to " + path);
    }
}

void put_network(std::string& out, const DenseNetwork& net) {
    put_u32(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const DenseLayer& layer : net.layers) {
        put_u32(out, static_cast<std::uint32_t>(layer.in_dim()));
        put_u32(out, static_cast<std::uint32_t>(layer.out_dim()));
        put_u32(out, static_cast<std::uint32_t>(layer.activation));
        for (double w : layer.weights.data()) put_f64(out, w);
        for (double b : layer.bias) put_f64(out, b);
    }
}

DenseNetwork read_network(Reader& r, const std::string& name) {
    const std::uint32_t count = r.u32();
    if (count == 0 || count > kMaxLayers)
        throw FormatError("bad layer count " + std::to_string(count) + " for " + name + " in " + r.path);
    DenseNetwork net;
    net.layers.reserve(count);
    for (std::uint32_t li = 0; li < count; ++li) {
        const std::uint32_t in = r.u32();
        const std::uint32_t out = r.u32();
        const std::uint32_t act = r.u32();
        if (in == 0 || in > kMaxDim || out == 0 || out > kMaxDim)
            throw FormatError("bad layer dims in " + name + " in " + r.path);
        if (act > 1)
            throw FormatError("bad activation code " + std::to_string(act) + " in " + name + " in " + r.path);
        DenseLayer layer;
        layer.weights = Matrix(out, in);
        layer.bias.resize(out);
        layer.activation = static_cast<Activation>(act);
        for (double& w : layer.weights.data()) w = r.f64();
        for (double& b : layer.bias) b = r.f64();
        net.layers.push_back(std::move(layer));
    }
    try {
        validate_chain(net);
    } catch (const Error& e) {
        throw FormatError(std::string("inconsistent ") + name + " in " + r.path + ": " + e.what());
    }
    return net;
}

} // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
    std::string out;
    out.append(kModelMagic, 4);
    out.push_back(static_cast<char>(kVersion));

    put_network(out, bundle.sparsifier.net);

    const Matrix& c = bundle.collaborator.weights;
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(c.cols()));
    put_u32(out, static_cast<std::uint32_t>(c.rows()));
    put_u32(out, static_cast<std::uint32_t>(Activation::Identity));
    for (double w : c.data()) put_f64(out, w);

    put_network(out, bundle.denoiser.net);
    put_network(out, bundle.desparsifier.net);

    const ModelMeta& m = bundle.meta;
    put_u32(out, static_cast<std::uint32_t>(m.patch_side));
    put_u32(out, static_cast<std::uint32_t>(m.code_dim));
    put_u32(out, static_cast<std::uint32_t>(m.collab_count));
    put_u32(out, static_cast<std::uint32_t>(m.window_side));
    put_f64(out, m.sigma255);
    put_u64(out, m.seed);

    atomic_write(path, out);
}

ModelBundle load_model(const std::string& path) {
    const std::string buf = slurp(path);
    Reader r{buf, 0, path};

    r.require(4);
    if (buf.compare(0, 4, kModelMagic, 4) != 0) throw FormatError("bad magic in " + path);
    r.pos = 4;
    const std::uint8_t version = r.u8();
    if (version != kVersion)
        throw FormatError("unsupported version " + std::to_string(version) + " in " + path);

    ModelBundle bundle;
    bundle.sparsifier.net = read_network(r, "sparsifier");

    const std::uint32_t ccount = r.u32();
    if (ccount != 1) throw FormatError("bad collaborator layer count in " + path);
    const std::uint32_t cin = r.u32();
    const std::uint32_t cout = r.u32();
    const std::uint32_t cact = r.u32();
    if (cin == 0 || cin > kMaxDim || cout == 0 || cout > kMaxDim)
        throw FormatError("bad collaborator dims in " + path);
    if (cact != 0) throw FormatError("bad collaborator activation in " + path);
    bundle.collaborator.weights = Matrix(cout, cin);
    for (double& w : bundle.collaborator.weights.data()) w = r.f64();

    bundle.denoiser.net = read_network(r, "denoiser");
    bundle.desparsifier.net = read_network(r, "desparsifier");

    bundle.meta.patch_side = r.u32();
    bundle.meta.code_dim = r.u32();
    bundle.meta.collab_count = r.u32();
    bundle.meta.window_side = r.u32();
    bundle.meta.sigma255 = r.f64();
    bundle.meta.seed = r.u64();
    r.done();

    if (bundle.meta.patch_side == 0 || bundle.meta.patch_side > kMaxSide)
        throw FormatError("bad patch side in " + path);
    const std::size_t n2 = bundle.meta.patch_side * bundle.meta.patch_side;
    if (bundle.sparsifier.net.in_dim() != n2 || bundle.sparsifier.net.out_dim() != bundle.meta.code_dim)
        throw FormatError("sparsifier shape disagrees with metadata in " + path);
    if (bundle.collaborator.weights.rows() != bundle.meta.code_dim ||
        bundle.collaborator.weights.cols() != bundle.meta.collab_count)
        throw FormatError("collaborator shape disagrees with metadata in " + path);
    if (bundle.denoiser.net.in_dim() != bundle.meta.code_dim ||
        bundle.denoiser.net.out_dim() != bundle.meta.code_dim)
        throw FormatError("denoiser shape disagrees with metadata in " + path);
    if (bundle.desparsifier.net.in_dim() != bundle.meta.code_dim ||
        bundle.desparsifier.net.out_dim() != n2)
        throw FormatError("desparsifier shape disagrees with metadata in " + path);

    return bundle;
}

void save_dataset(const PatchPairSet& dataset, const std::string& path) {
    if (dataset.clean.rows() != dataset.noisy.rows() || dataset.clean.cols() != dataset.noisy.cols())
        throw InputError("save_dataset: clean and noisy shapes disagree");

    std::string out;
    out.append(kDatasetMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    put_u32(out, static_cast<std::uint32_t>(dataset.patch_side));
    put_u32(out, static_cast<std::uint32_t>(dataset.sources.size()));
    put_f64(out, dataset.sigma255);
    put_u64(out, dataset.seed);
    for (const auto& src : dataset.sources) {
        put_u32(out, static_cast<std::uint32_t>(src.width));
        put_u32(out, static_cast<std::uint32_t>(src.height));
        put_u32(out, static_cast<std::uint32_t>(src.patch_count));
    }
    const std::size_t dim = dataset.patch_side * dataset.patch_side;
    for (const auto& src : dataset.sources) {
        for (std::size_t p = 0; p < src.patch_count; ++p)
            for (std::size_t i = 0; i < dim; ++i) put_f64(out, dataset.clean(i, src.first_patch + p));
        for (std::size_t p = 0; p < src.patch_count; ++p)
            for (std::size_t i = 0; i < dim; ++i) put_f64(out, dataset.noisy(i, src.first_patch + p));
    }
    atomic_write(path, out);
}

PatchPairSet load_dataset(const std::string& path) {
    const std::string buf = slurp(path);
    Reader r{buf, 0, path};

    r.require(4);
    if (buf.compare(0, 4, kDatasetMagic, 4) != 0) throw FormatError("bad magic in " + path);
    r.pos = 4;
    const std::uint8_t version = r.u8();
    if (version != kVersion)
        throw FormatError("unsupported version " + std::to_string(version) + " in " + path);

    PatchPairSet ds;
    ds.patch_side = r.u32();
    const std::uint32_t image_count = r.u32();
    ds.sigma255 = r.f64();
    ds.seed = r.u64();
    if (ds.patch_side == 0 || ds.patch_side > kMaxSide) throw FormatError("bad patch side in " + path);
    if (image_count > kMaxImages) throw FormatError("bad image count in " + path);

    std::size_t total = 0;
    ds.sources.reserve(image_count);
    for (std::uint32_t i = 0; i < image_count; ++i) {
        PatchPairSet::SourceImage src;
        src.width = r.u32();
        src.height = r.u32();
        src.patch_count = r.u32();
        if (src.width < ds.patch_side || src.width > kMaxSide || src.height < ds.patch_side ||
            src.height > kMaxSide)
            throw FormatError("bad image dims in " + path);
        const std::size_t expected =
            (src.width - ds.patch_side + 1) * (src.height - ds.patch_side + 1);
        if (src.patch_count != expected)
            throw FormatError("patch count disagrees with image dims in " + path);
        src.first_patch = total;
        total += src.patch_count;
        ds.sources.push_back(src);
    }

    const std::size_t dim = ds.patch_side * ds.patch_side;
    ds.clean = Matrix(dim, total);
    ds.noisy = Matrix(dim, total);
    for (const auto& src : ds.sources) {
        for (std::size_t p = 0; p < src.patch_count; ++p)
            for (std::size_t i = 0; i < dim; ++i) ds.clean(i, src.first_patch + p) = r.f64();
        for (std::size_t p = 0; p < src.patch_count; ++p)
            for (std::size_t i = 0; i < dim; ++i) ds.noisy(i, src.first_patch + p) = r.f64();
    }
    r.done();
    return ds;
}

} // namespace dcfb
