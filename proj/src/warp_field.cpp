#include "maskwarp/warp_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskwarp/error.hpp"

namespace maskwarp {

VectorGrid::VectorGrid(int height, int width)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw InvalidArgument("negative field dimensions");
  data_.assign(static_cast<std::size_t>(height) * width * 2, 0.0);
}

VectorGrid::VectorGrid(int height, int width, std::vector<double> interleaved)
    : height_(height), width_(width), data_(std::move(interleaved)) {
  if (height < 0 || width < 0) throw InvalidArgument("negative field dimensions");
  if (data_.size() != static_cast<std::size_t>(height) * width * 2) {
    throw InvalidArgument("field data length does not match " + std::to_string(height) + "x" +
                          std::to_string(width) + "x2");
  }
  if (!all_finite()) throw InvalidArgument("field contains non-finite displacements");
}

bool VectorGrid::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

WarpField WarpField::constant(int height, int width, double dx, double dy) {
  WarpField f(height, width);
  auto d = f.data();
  for (std::size_t i = 0; i < d.size(); i += 2) {
    d[i] = dx;
    d[i + 1] = dy;
  }
  return f;
}

FieldGradient& FieldGradient::operator+=(const FieldGradient& other) {
  if (!same_shape(other.height(), other.width())) {
    throw InvalidArgument("gradient shapes differ");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

FieldGradient& FieldGradient::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

BilinearSample sample_bilinear(std::span<const double> data, int height, int width, int channels,
                               int channel, double x, double y) noexcept {
  if (!std::isfinite(x) || !std::isfinite(y)) return {};
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  // Entirely outside: every tap is zero padding.
  if (fx0 < -1.0|| fy0 < -1.0 || fx0 > width - 1 || fy0 > height - 1) return {};

  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;

  auto tap = [&](int r, int c) -> double {
    if (r < 0 || c < 0 || r >= height || c >= width) return 0.0;
    return data[(static_cast<std::size_t>(r) * width + c) * channels + channel];
  };
  const double v00 = tap(y0, x0);
  const double v01 = tap(y0, x0 + 1);
  const double v10 = tap(y0 + 1, x0);
  const double v11 = tap(y0 + 1, x0 + 1);

  BilinearSample s;
  s.value = (1.0 - ay) * ((1.0 - ax) * v00 + ax * v01) + ay * ((1.0 - ax) * v10 + ax * v11);
  s.d_dx = (1.0 - ay) * (v01 - v00) + ay * (v11 - v10);
  s.d_dy = (1.0 - ax) * (v10 - v00) + ax * (v11 - v01);
  return s;
}

namespace {

std::vector<double> warp_interleaved(const WarpField& field, std::span<const double> in,
                                     int height, int width, int channels) {
  if (!field.same_shape(height, width)) {
    throw InvalidArgument("warp_apply: field is " + std::to_string(field.height()) + "x" +
                          std::to_string(field.width()) + " but input is " +
                          std::to_string(height) + "x" + std::to_string(width));
  }
  std::vector<double> out(in.size());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double x = c + field.dx(r, c);
      const double y = r + field.dy(r, c);
      for (int ch = 0; ch < channels; ++ch) {
        const double v = sample_bilinear(in, height, width, channels, ch, x, y).value;
        out[(static_cast<std::size_t>(r) * width + c) * channels + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace

SoftMask warp_apply(const WarpField& field, const SoftMask& input) {
  return SoftMask(input.height(), input.width(),
                  warp_interleaved(field, input.values(), input.height(), input.width(), 1));
}

ImageBuffer warp_apply(const WarpField& field, const ImageBuffer& input) {
  return ImageBuffer(input.height(), input.width(), input.channels(),
                     warp_interleaved(field, input.data(), input.height(), input.width(),
                                      input.channels()));
}

WarpField resample_field(const WarpField& field, int out_height, int out_width, int factor) {
  if (factor < 1) throw InvalidArgument("resample factor must be >= 1");
  if (field.height() == 0 || field.width() == 0) return WarpField(out_height, out_width);
  WarpField out(out_height, out_width);
  const int h = field.height();
  const int w = field.width();
  for (int r = 0; r < out_height; ++r) {
    const double yc = std::clamp((r + 0.5) / factor - 0.5, 0.0, h - 1.0);
    const int y0 = std::min(static_cast<int>(yc), h - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ay = yc - y0;
    for (int c = 0; c < out_width; ++c) {
      const double xc = std::clamp((c + 0.5) / factor - 0.5, 0.0, w - 1.0);
      const int x0 = std::min(static_cast<int>(xc), w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double ax = xc - x0;
      auto lerp2 = [&](auto get) {
        return (1.0 - ay) * ((1.0 - ax) * get(y0, x0) + ax * get(y0, x1)) +
               ay * ((1.0 - ax) * get(y1, x0) + ax * get(y1, x1));
      };
      out.dx(r, c) = factor * lerp2([&](int y, int x) { return field.dx(y, x); });
      out.dy(r, c) = factor * lerp2([&](int y, int x) { return field.dy(y, x); });
    }
  }
  return out;
}

WarpField upsample_field(const WarpField& field, int factor) {
  if (factor < 2) throw InvalidArgument("upsample factor must be >= 2");
  return resample_field(field, field.height() * factor, field.width() * factor, factor);
}

WarpField downsample_field(const WarpField& field, int factor) {
  if (factor < 1) throw InvalidArgument("downsample factor must be >= 1");
  const int oh = (field.height() + factor - 1) / factor;
  const int ow = (field.width() + factor - 1) / factor;
  WarpField out(oh, ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      const int r1 = std::min(field.height(), (r + 1) * factor);
      const int c1 = std::min(field.width(), (c + 1) * factor);
      double sx = 0.0, sy = 0.0;
      for (int y = r * factor; y < r1; ++y) {
        for (int x = c * factor; x < c1; ++x) {
          sx += field.dx(y, x);
          sy += field.dy(y, x);
        }
      }
      const double n = static_cast<double>((r1 - r * factor) * (c1 - c * factor));
      out.dx(r, c) = sx / n / factor;
      out.dy(r, c) = sy / n / factor;
    }
  }
  return out;
}

}  // namespace maskwarp
