#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace maskwarp {

// Row-major single-channel grid. Shared storage for the mask types below;
// each wrapper validates its own value domain on construction.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, std::vector<T> values);
  Plane(int height, int width, T fill);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T operator()(int row, int col) const noexcept {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::span<const T> values() const noexcept { return values_; }

  bool same_shape(int height, int width) const noexcept {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return same_shape(other.height(), other.width());
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 protected:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

// Object silhouette with entries in {0,1}.
class BinaryMask : public Plane<std::uint8_t> {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::vector<std::uint8_t> bits);
  BinaryMask(int height, int width, bool fill = false);

  std::size_t count() const noexcept;
};

// Smoothed silhouette with entries in [0,1].
class SoftMask : public Plane<double> {
 public:
  SoftMask() = default;
  SoftMask(int height, int width, std::vector<double> values);
  SoftMask(int height, int width, double fill = 0.0);

  static SoftMask from(const BinaryMask& mask);
};

// Region labels; 0 is background.
class LabelMask : public Plane<std::uint32_t> {
 public:
  LabelMask() = default;
  LabelMask(int height, int width, std::vector<std::uint32_t> labels);

  // Sorted distinct labels present, always including 0.
  std::vector<std::uint32_t> label_set() const;
  BinaryMask indicator(std::uint32_t label) const;
};

// H x W x C image, channel-interleaved, samples in [0,1]. C is 1 or 3.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, int channels, std::vector<double> data);
  ImageBuffer(int height, int width, int channels, double fill = 0.0);

  static ImageBuffer from(const SoftMask& mask);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::span<const double> data() const noexcept { return data_; }

  double operator()(int row, int col, int ch) const noexcept {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
  }

  // Single channel as a SoftMask-shaped plane.
  SoftMask channel(int ch) const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace maskwarp
