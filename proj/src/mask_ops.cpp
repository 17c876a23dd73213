#include "maskwarp/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "maskwarp/error.hpp"

namespace maskwarp {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": mask dimensions differ (" +
                          std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                          " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + ")");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  }
  return k;
}

// Separable blur of an interleaved buffer; each 1-D pass divides by the
// in-bounds kernel mass, which equals 2-D renormalization on a rectangle.
std::vector<double> blur_interleaved(std::span<const double> in, int height, int width,
                                     int channels, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(in.size());
  std::vector<double> out(in.size());

  auto idx = [&](int r, int c, int ch) {
    return (static_cast<std::size_t>(r) * width + c) * channels + ch;
  };

  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int lo = std::max(-radius, -c);
      const int hi = std::min(radius, width - 1 - c);
      double mass = 0.0;
      for (int t = lo; t <= hi; ++t) mass += kernel[t + radius];
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int t = lo; t <= hi; ++t) acc += kernel[t + radius] * in[idx(r, c + t, ch)];
        tmp[idx(r, c, ch)] = acc / mass;
      }
    }
  }
  for (int r = 0; r < height; ++r) {
    const int lo = std::max(-radius, -r);
    const int hi = std::min(radius, height - 1 - r);
    double mass = 0.0;
    for (int t = lo; t <= hi; ++t) mass += kernel[t + radius];
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int t = lo; t <= hi; ++t) acc += kernel[t + radius] * tmp[idx(r + t, c, ch)];
        out[idx(r, c, ch)] = std::clamp(acc / mass, 0.0, 1.0);
      }
    }
  }
  return out;
}

std::vector<double> downsample_interleaved(std::span<const double> in, int height, int width,
                                           int channels, int factor, int& out_h, int& out_w) {
  if (factor < 1) throw InvalidArgument("downsample factor must be >= 1");
  out_h = (height + factor - 1) / factor;
  out_w = (width + factor - 1) / factor;
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w * channels, 0.0);
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const int r1 = std::min(height, (r + 1) * factor);
      const int c1 = std::min(width, (c + 1) * factor);
      const double n = static_cast<double>((r1 - r * factor) * (c1 - c * factor));
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int y = r * factor; y < r1; ++y) {
          for (int x = c * factor; x < c1; ++x) {
            acc += in[(static_cast<std::size_t>(y) * width + x) * channels + ch];
          }
        }
        out[(static_cast<std::size_t>(r) * out_w + c) * channels + ch] =
            std::clamp(acc / n, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace

BinaryMask mask_logic(const BinaryMask& a, const BinaryMask& b, MaskOp op) {
  require_same_shape(a, b, "mask_logic");
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<std::uint8_t> out(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    switch (op) {
      case MaskOp::And: out[i] = va[i] & vb[i]; break;
      case MaskOp::Or: out[i] = va[i] | vb[i]; break;
      case MaskOp::Xor: out[i] = va[i] ^ vb[i]; break;
      case MaskOp::NotA: out[i] = va[i] ^ 1u; break;
    }
  }
  return BinaryMask(a.height(), a.width(), std::move(out));
}

BinaryMask mask_not(const BinaryMask& a) { return mask_logic(a, a, MaskOp::NotA); }

BinaryMask edge_band(const BinaryMask& mask, int kernel) {
  if (kernel < 3 || kernel % 2 == 0) {
    throw InvalidArgument("edge band kernel must be odd and >= 3, got " + std::to_string(kernel));
  }
  const int h = mask.height();
  const int w = mask.width();
  const int radius = kernel / 2;
  const int full = kernel * kernel;

  // Summed-area table with a one-pixel zero border.
  std::vector<int> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0);
  auto at = [&](int r, int c) -> int& { return sat[static_cast<std::size_t>(r) * (w + 1) + c]; };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      at(r + 1, c + 1) = mask(r, c) + at(r, c + 1) + at(r + 1, c) - at(r, c);
    }
  }

  std::vector<std::uint8_t> band(mask.size(), 0);
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(0, r - radius);
    const int r1 = std::min(h, r + radius + 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(0, c - radius);
      const int c1 = std::min(w, c + radius + 1);
      const int sum = at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0);
      band[static_cast<std::size_t>(r) * w + c] = (sum > 0 && sum < full) ? 1 : 0;
    }
  }
  return BinaryMask(h, w, std::move(band));
}

BinaryMask smoothness_mask(const BinaryMask& source, const BinaryMask& target, int kernel) {
  require_same_shape(source, target, "smoothness_mask");
  const BinaryMask compress = mask_logic(edge_band(target, kernel), source, MaskOp::And);
  const BinaryMask expand =
      mask_logic(mask_logic(source, target, MaskOp::Xor), target, MaskOp::And);
  return mask_logic(compress, expand, MaskOp::Or);
}

SoftMask soften(const BinaryMask& mask, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("soften: sigma must be >= 0");
  SoftMask soft = SoftMask::from(mask);
  if (sigma == 0.0) return soft;
  return gaussian_blur(soft, sigma);
}

SoftMask gaussian_blur(const SoftMask& mask, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("gaussian_blur: sigma must be >= 0");
  if (sigma == 0.0 || mask.empty()) return mask;
  return SoftMask(mask.height(), mask.width(),
                  blur_interleaved(mask.values(), mask.height(), mask.width(), 1, sigma));
}

ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("gaussian_blur: sigma must be >= 0");
  if (sigma == 0.0 || image.data().empty()) return image;
  return ImageBuffer(image.height(), image.width(), image.channels(),
                     blur_interleaved(image.data(), image.height(), image.width(),
                                      image.channels(), sigma));
}

BinaryMask binarize(const SoftMask& mask, double threshold) {
  std::vector<std::uint8_t> bits(mask.size());
  std::transform(mask.values().begin(), mask.values().end(), bits.begin(),
                 [threshold](double v) { return static_cast<std::uint8_t>(v >= threshold); });
  return BinaryMask(mask.height(), mask.width(), std::move(bits));
}

SoftMask area_downsample(const SoftMask& mask, int factor) {
  int oh = 0, ow = 0;
  auto v = downsample_interleaved(mask.values(), mask.height(), mask.width(), 1, factor, oh, ow);
  return SoftMask(oh, ow, std::move(v));
}

ImageBuffer area_downsample(const ImageBuffer& image, int factor) {
  int oh = 0, ow = 0;
  auto v = downsample_interleaved(image.data(), image.height(), image.width(), image.channels(),
                                  factor, oh, ow);
  return ImageBuffer(oh, ow, image.channels(), std::move(v));
}

BinaryMask max_pool(const BinaryMask& mask, int factor) {
  if (factor < 1) throw InvalidArgument("max_pool factor must be >= 1");
  const int oh = (mask.height() + factor - 1) / factor;
  const int ow = (mask.width() + factor - 1) / factor;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(oh) * ow, 0);
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask(r, c)) out[static_cast<std::size_t>(r / factor) * ow + c / factor] = 1;
    }
  }
  return BinaryMask(oh, ow, std::move(out));
}

}  // namespace maskwarp
