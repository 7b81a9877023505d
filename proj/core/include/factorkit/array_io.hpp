#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "factorkit/matrix.hpp"

namespace factorkit {

// FKT1 array file layout (all integers little-endian, no padding):
//
//   offset  size  field
//   0       4     magic "FKT1"
//   4       4     u32 rows
//   8       4     u32 cols
//   12      1     u8 dtype (0 = f64, 1 = f32)
//   13      ...   rows·cols row-major IEEE-754 values of the given dtype
//
// f32 payloads are widened to double on read; writing f32 is an explicit,
// lossy narrowing requested by the caller.

enum class DType : std::uint8_t { f64 = 0, f32 = 1 };

inline constexpr std::size_t kArrayHeaderSize = 13;

std::vector<std::uint8_t> encode_array(const DenseMatrix& m, DType dtype = DType::f64);

/// Throws FormatError (with the failing byte offset) on a bad magic, short
/// header, unknown dtype, truncated or oversized payload, zero dimension or
/// non-finite value.
DenseMatrix decode_array(std::span<const std::uint8_t> bytes);

void write_array(const std::filesystem::path& path, const DenseMatrix& m,
                 DType dtype = DType::f64);
DenseMatrix read_array(const std::filesystem::path& path);

}  // namespace factorkit
