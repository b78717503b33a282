#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "core/tensor.hpp"

namespace medivista {

// MVST tensor container: magic "MVST", version byte 0x01, dtype byte
// (0 = f64, 1 = f32, 2 = u8), ndim byte, ndim little-endian u32 extents,
// then the row-major little-endian payload.
enum class MvstDtype : uint8_t { f64 = 0, f32 = 1, u8 = 2 };

void write_mvst_f64(const std::filesystem::path& path, const Shape& shape,
                    const std::vector<double>& data);
void write_mvst_f32(const std::filesystem::path& path, const Shape& shape,
                    const std::vector<double>& data);
void write_mvst_u8(const std::filesystem::path& path, const Shape& shape,
                   const std::vector<uint8_t>& data);

struct MvstFile {
    MvstDtype dtype;
    Shape shape;
    std::vector<double> f64;   // filled for f64/f32 (f32 widened)
    std::vector<uint8_t> u8;   // filled for u8
};

MvstFile read_mvst(const std::filesystem::path& path);

// Convenience: any dtype widened to a f64 tensor.
Tensor read_mvst_tensor(const std::filesystem::path& path);
void write_mvst_tensor(const std::filesystem::path& path, const Tensor& t);

}  // namespace medivista
