#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maskwarp/image.hpp"

namespace maskwarp {

// Per-pixel 2-vector grid, interleaved (dx, dy), row-major.
class VectorGrid {
 public:
  VectorGrid() = default;
  VectorGrid(int height, int width);
  VectorGrid(int height, int width, std::vector<double> interleaved);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }

  double dx(int row, int col) const noexcept { return data_[index(row, col)]; }
  double dy(int row, int col) const noexcept { return data_[index(row, col) + 1]; }
  double& dx(int row, int col) noexcept { return data_[index(row, col)]; }
  double& dy(int row, int col) noexcept { return data_[index(row, col) + 1]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(int height, int width) const noexcept {
    return height_ == height && width_ == width;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const VectorGrid&, const VectorGrid&) = default;

 protected:
  std::size_t index(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * 2;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Backward displacement field: output pixel (row, col) samples its input at
// (col + dx, row + dy). Units are pixels of the grid it lives on.
class WarpField : public VectorGrid {
 public:
  using VectorGrid::VectorGrid;

  static WarpField constant(int height, int width, double dx, double dy);
};

// Partial derivatives of a scalar loss with respect to each displacement.
class FieldGradient : public VectorGrid {
 public:
  using VectorGrid::VectorGrid;

  FieldGradient& operator+=(const FieldGradient& other);
  FieldGradient& operator*=(double scale);
};

// Bilinear sample of one channel of an interleaved buffer at (x, y); taps
// outside the grid read as 0. The partials are those of the bilinear cell
// containing the sample point (right-continuous at integer coordinates).
struct BilinearSample {
  double value = 0.0;
  double d_dx = 0.0;
  double d_dy = 0.0;
};

BilinearSample sample_bilinear(std::span<const double> data, int height, int width, int channels,
                               int channel, double x, double y) noexcept;

SoftMask warp_apply(const WarpField& field, const SoftMask& input);
ImageBuffer warp_apply(const WarpField& field, const ImageBuffer& input);

// Bilinear upsampling by an integer factor (pixel-centre aligned, edge
// replicated); displacements are multiplied by the factor.
WarpField upsample_field(const WarpField& field, int factor);

// Upsampling to an explicit size, for grids whose dimensions are not exact
// multiples of the factor.
WarpField resample_field(const WarpField& field, int out_height, int out_width, int factor);

// Block-average downsampling; displacements are divided by the factor.
WarpField downsample_field(const WarpField& field, int factor);

}  // namespace maskwarp
