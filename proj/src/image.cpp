#include "maskwarp/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskwarp/error.hpp"

namespace maskwarp {

namespace {

void check_dims(int height, int width, std::size_t actual, std::size_t per_pixel) {
  if (height < 0 || width < 0) {
    throw InvalidArgument("negative grid dimensions");
  }
  const auto expected = static_cast<std::size_t>(height) * width * per_pixel;
  if (actual != expected) {
    throw InvalidArgument("data length " + std::to_string(actual) + " does not match " +
                          std::to_string(height) + "x" + std::to_string(width) + "x" +
                          std::to_string(per_pixel));
  }
}

}  // namespace

template <typename T>
Plane<T>::Plane(int height, int width, std::vector<T> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims(height, width, values_.size(), 1);
}

template <typename T>
Plane<T>::Plane(int height, int width, T fill)
    : height_(height), width_(width) {
  check_dims(height, width, static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), 1);
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

template class Plane<std::uint8_t>;
template class Plane<double>;
template class Plane<std::uint32_t>;

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> bits)
    : Plane(height, width, std::move(bits)) {
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw InvalidArgument("binary mask entries must be 0 or 1");
  }
}

BinaryMask::BinaryMask(int height, int width, bool fill)
    : Plane(height, width, static_cast<std::uint8_t>(fill ? 1 : 0)) {}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

SoftMask::SoftMask(int height, int width, std::vector<double> values)
    : Plane(height, width, std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("soft mask entries must lie in [0,1]");
    }
  }
}

SoftMask::SoftMask(int height, int width, double fill) : Plane(height, width, fill) {
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw InvalidArgument("soft mask entries must lie in [0,1]");
  }
}

SoftMask SoftMask::from(const BinaryMask& mask) {
  std::vector<double> v(mask.values().begin(), mask.values().end());
  return SoftMask(mask.height(), mask.width(), std::move(v));
}

LabelMask::LabelMask(int height, int width, std::vector<std::uint32_t> labels)
    : Plane(height, width, std::move(labels)) {}

std::vector<std::uint32_t> LabelMask::label_set() const {
  std::vector<std::uint32_t> labels(values_.begin(), values_.end());
  labels.push_back(0);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

BinaryMask LabelMask::indicator(std::uint32_t label) const {
  std::vector<std::uint8_t> bits(values_.size());
  std::transform(values_.begin(), values_.end(), bits.begin(),
                 [label](std::uint32_t v) { return static_cast<std::uint8_t>(v == label); });
  return BinaryMask(height_, width_, std::move(bits));
}

ImageBuffer::ImageBuffer(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
  check_dims(height, width, data_.size(), static_cast<std::size_t>(channels));
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("image samples must lie in [0,1]");
    }
  }
}

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : ImageBuffer(height, width, channels,
                  std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                          std::max(width, 0) * std::max(channels, 0),
                                      fill)) {}

ImageBuffer ImageBuffer::from(const SoftMask& mask) {
  return ImageBuffer(mask.height(), mask.width(), 1,
                     std::vector<double>(mask.values().begin(), mask.values().end()));
}

SoftMask ImageBuffer::channel(int ch) const {
  if (ch < 0 || ch >= channels_) {
    throw InvalidArgument("channel index out of range");
  }
  std::vector<double> v(static_cast<std::size_t>(height_) * width_);
  for (std::size_t p = 0; p < v.size(); ++p) {
    v[p] = data_[p * channels_ + ch];
  }
  return SoftMask(height_, width_, std::move(v));
}

}  // namespace maskwarp
