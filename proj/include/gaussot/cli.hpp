#pragma once

#include "gaussot/tensorio.hpp"
#include "gaussot/transforms.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaussot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Method names accepted by --method, in help order.
const std::vector<std::string>& method_names();

/// Maps a --method value (and --seed for rotated-wct) onto a TransformKind.
std::optional<TransformKind> parse_method(const std::string& name, std::uint64_t seed);

/**
 * @brief Aligns a label tensor with `positions` feature columns.
 *
 * Shape (N,) must match exactly. Shape (H, W) is resampled by nearest
 * neighbour onto the feature grid when the features carry a spatial shape
 * (source row = floor(y·H/h), column = floor(x·W/w)); otherwise H·W must
 * equal N. Anything else throws ShapeError.
 */
RegionMask align_mask(const LabelTensor& mask, std::size_t positions,
                      const std::optional<SpatialShape>& spatial);

/**
 * @brief Runs the command line. args[0] is the program name.
 *
 * Returns 0 on success, 1 for data/runtime errors and 2 for usage errors.
 * Every failure writes exactly one line "error: <Code>: <message>" to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gaussot::cli
