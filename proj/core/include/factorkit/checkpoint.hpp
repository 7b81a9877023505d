#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factorkit/factors.hpp"

namespace factorkit {

// A checkpoint bundle is a directory holding manifest.json and one FKT1 file
// per stored tensor:
//   {"method", "rank", "blocks", "layers": [{"name", "rows", "cols", "files"}]}
// Tensors per layer, in file order:
//   dense     w                       m×n
//   low_rank  u, v                    m×r, n×r
//   block_lr  left, right             (b²·o)×r, (b²·r)×p   (4-D tensors, rows flattened)
//   monarch   left, right             (b·o)×(b·r), (b·b·r)×p (diagonal blocks stacked)

struct CheckpointLayer {
    std::string name;  ///< letters, digits, '_', '-' and '.'
    Factorization weight;
};

struct Checkpoint {
    Method method = Method::dense;
    std::size_t rank = 0;
    std::size_t blocks = 1;
    std::vector<CheckpointLayer> layers;
};

inline constexpr std::string_view kManifestName = "manifest.json";

/// (file suffix, matrix) pairs for one weight, in the order listed above.
std::vector<std::pair<std::string, DenseMatrix>> factor_arrays(const Factorization& f);

/// Inverse of factor_arrays. Throws FormatError when the arrays do not fit
/// (method, rows, cols, rank, blocks).
Factorization factorization_from_arrays(Method method, std::size_t rows, std::size_t cols,
                                        std::size_t rank, std::size_t blocks,
                                        std::span<const DenseMatrix> arrays);

/// Writes the bundle, creating `dir` if needed. `manifest_extra` is a JSON
/// object whose members are added to the manifest; `layer_extra[i]` likewise
/// for layer i. Throws ArgumentError on bad layer names or mixed methods and
/// IoError when writing fails.
void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint,
                      std::string_view manifest_extra = {},
                      std::span<const std::string> layer_extra = {});

/// Throws IoError for unreadable files and FormatError for a malformed
/// manifest or arrays that disagree with it.
Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace factorkit
