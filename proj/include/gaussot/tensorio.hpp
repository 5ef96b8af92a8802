#pragma once

#include "gaussot/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace gaussot {

enum class DType { F4, F8 };

/// Height and width of a (C, H, W) tensor; positions are flattened row-major (W fastest).
struct SpatialShape {
    std::size_t height = 0;
    std::size_t width = 0;

    bool operator==(const SpatialShape&) const = default;
};

struct TensorFile {
    FeatureMap features;
    std::optional<SpatialShape> spatial;  // set when the file was (C, H, W)
};

/**
 * @brief Reads an NPY v1.0 file of shape (C, N) or (C, H, W).
 *
 * Accepts little-endian `<f4` / `<f8` in C order; f4 is widened to f8.
 * (C, H, W) is flattened so that position index = h·W + w.
 *
 * Errors: IoError (unreadable), FormatError (bad magic, version or header),
 * UnsupportedTensor (other dtypes, Fortran order), ShapeError (rank ∉ {2, 3}).
 */
TensorFile read_tensor_file(const std::filesystem::path& path);

FeatureMap read_tensor(const std::filesystem::path& path);

/**
 * @brief Writes NPY v1.0, little-endian, C order.
 *
 * The shape is (C, N), or (C, H, W) when `spatial` is given and H·W = N. The
 * header is space-padded so that the data starts on a 64-byte boundary.
 * Writing F4 rounds each value to the nearest float.
 */
void write_tensor(const FeatureMap& f, const std::filesystem::path& path, DType dtype = DType::F8,
                  std::optional<SpatialShape> spatial = std::nullopt);

/// Integer tensor (label masks). Any signed/unsigned integer dtype of 1..8 bytes, or bool.
struct LabelTensor {
    std::vector<std::int64_t> labels;
    std::vector<std::size_t> shape;
};

LabelTensor read_labels(const std::filesystem::path& path);

/// Writes `<i8` labels with the given shape.
void write_labels(std::span<const std::int64_t> labels, std::span<const std::size_t> shape,
                  const std::filesystem::path& path);

}  // namespace gaussot
