#include "factorkit/array_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'K', 'T', '1'};

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_array(const DenseMatrix& m, DType dtype) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
        m.cols() > std::numeric_limits<std::uint32_t>::max())
        throw ArgumentError("array too large for FKT1 u32 shape header");
    const std::size_t width = dtype == DType::f64 ? 8 : 4;
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kArrayHeaderSize + m.size() * width);
    put_le(out, m.rows(), 4);
    put_le(out, m.cols(), 4);
    out.push_back(static_cast<std::uint8_t>(dtype));
    for (double v : m.data()) {
        if (dtype == DType::f64)
            put_le(out, std::bit_cast<std::uint64_t>(v), 8);
        else
            put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
    return out;
}

DenseMatrix decode_array(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw FormatError("truncated magic", bytes.size());
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected FKT1", 0);
    if (bytes.size() < kArrayHeaderSize) throw FormatError("truncated header", bytes.size());

    const std::size_t rows = get_le(bytes, 4, 4);
    const std::size_t cols = get_le(bytes, 8, 4);
    if (rows == 0) throw FormatError("zero row count", 4);
    if (cols == 0) throw FormatError("zero column count", 8);

    const std::uint8_t tag = bytes[12];
    std::size_t width = 0;
    if (tag == static_cast<std::uint8_t>(DType::f64))
        width = 8;
    else if (tag == static_cast<std::uint8_t>(DType::f32))
        width = 4;
    else
        throw FormatError("unsupported dtype tag " + std::to_string(tag), 12);

    const std::size_t count = rows * cols;
    const std::size_t expected = kArrayHeaderSize + count * width;
    if (bytes.size() < expected)
        throw FormatError("truncated payload: header declares " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " but only " +
                              std::to_string((bytes.size() - kArrayHeaderSize) / width) +
                              " values are present",
                          bytes.size());
    if (bytes.size() > expected) throw FormatError("trailing bytes after payload", expected);

    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = kArrayHeaderSize + i * width;
        const double v =
            width == 8 ? std::bit_cast<double>(get_le(bytes, at, 8))
                       : static_cast<double>(std::bit_cast<float>(
                             static_cast<std::uint32_t>(get_le(bytes, at, 4))));
        if (!std::isfinite(v)) throw FormatError("non-finite value", at);
        data[i] = v;
    }
    return DenseMatrix(rows, cols, std::move(data));
}

void write_array(const std::filesystem::path& path, const DenseMatrix& m, DType dtype) {
    const auto bytes = encode_array(m, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

DenseMatrix read_array(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_array(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.offset());
    }
}

}  // namespace factorkit
