#pragma once

#include "av2t/common.hpp"

namespace av2t {

/// Box-filter resampling with fractional pixel coverage. Preserves the mean.
Matrix resize_area(const Matrix& src, int rows, int cols);

/// Bilinear resampling with half-pixel centers. Output stays inside the
/// input's value range.
Matrix resize_bilinear(const Matrix& src, int rows, int cols);

/// Nearest-neighbour resampling with half-pixel centers; keeps binary maps binary.
Matrix resize_nearest(const Matrix& src, int rows, int cols);

/// Area when shrinking, bilinear when growing, copy when equal.
Matrix resize_image(const Matrix& src, int rows, int cols);

}  // namespace av2t
