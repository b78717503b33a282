#include "core/mvst.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace medivista {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'S', 'T'};
constexpr uint8_t kVersion = 0x01;

void write_header(std::ofstream& out, MvstDtype dtype, const Shape& shape) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    out.put(static_cast<char>(dtype));
    out.put(static_cast<char>(shape.size()));
    for (int e : shape) {
        const uint32_t u = static_cast<uint32_t>(e);
        char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                     static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
        out.write(b, 4);
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("mvst: cannot write " + path.string());
    return out;
}

}  // namespace

void write_mvst_f64(const std::filesystem::path& path, const Shape& shape,
                    const std::vector<double>& data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("mvst: shape/data mismatch for " + path.string());
    auto out = open_out(path);
    write_header(out, MvstDtype::f64, shape);
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * 8));
    if (!out) throw std::runtime_error("mvst: short write to " + path.string());
}

void write_mvst_f32(const std::filesystem::path& path, const Shape& shape,
                    const std::vector<double>& data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("mvst: shape/data mismatch for " + path.string());
    auto out = open_out(path);
    write_header(out, MvstDtype::f32, shape);
    std::vector<float> f(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * 4));
    if (!out) throw std::runtime_error("mvst: short write to " + path.string());
}

void write_mvst_u8(const std::filesystem::path& path, const Shape& shape,
                   const std::vector<uint8_t>& data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("mvst: shape/data mismatch for " + path.string());
    auto out = open_out(path);
    write_header(out, MvstDtype::u8, shape);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("mvst: short write to " + path.string());
}

MvstFile read_mvst(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("mvst: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("mvst: bad magic in " + path.string());
    const int version = in.get();
    if (version != kVersion)
        throw std::runtime_error("mvst: unsupported version in " + path.string());
    const int dtype_byte = in.get();
    if (dtype_byte < 0 || dtype_byte > 2)
        throw std::runtime_error("mvst: unknown dtype in " + path.string());
    const int ndim = in.get();
    if (ndim <= 0) throw std::runtime_error("mvst: bad ndim in " + path.string());

    MvstFile f;
    f.dtype = static_cast<MvstDtype>(dtype_byte);
    f.shape.resize(static_cast<size_t>(ndim));
    for (int i = 0; i < ndim; ++i) {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        f.shape[static_cast<size_t>(i)] = static_cast<int>(
            static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
            (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24));
    }
    const int64_t n = shape_numel(f.shape);
    if (n <= 0 || !in) throw std::runtime_error("mvst: bad extents in " + path.string());

    switch (f.dtype) {
        case MvstDtype::f64: {
            f.f64.resize(static_cast<size_t>(n));
            in.read(reinterpret_cast<char*>(f.f64.data()), n * 8);
            break;
        }
        case MvstDtype::f32: {
            std::vector<float> tmp(static_cast<size_t>(n));
            in.read(reinterpret_cast<char*>(tmp.data()), n * 4);
            f.f64.assign(tmp.begin(), tmp.end());
            break;
        }
        case MvstDtype::u8: {
            f.u8.resize(static_cast<size_t>(n));
            in.read(reinterpret_cast<char*>(f.u8.data()), n);
            break;
        }
    }
    if (!in) throw std::runtime_error("mvst: truncated payload in " + path.string());
    return f;
}

Tensor read_mvst_tensor(const std::filesystem::path& path) {
    MvstFile f = read_mvst(path);
    if (f.dtype == MvstDtype::u8) {
        std::vector<double> d(f.u8.begin(), f.u8.end());
        return Tensor::from(f.shape, std::move(d));
    }
    return Tensor::from(f.shape, std::move(f.f64));
}

void write_mvst_tensor(const std::filesystem::path& path, const Tensor& t) {
    write_mvst_f64(path, t.shape(), t.values());
}

}  // namespace medivista
