#include "maskwarp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskwarp/error.hpp"

namespace maskwarp {

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) throw InvalidArgument("iou: mask dimensions differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto p = pred.values();
  const auto g = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    inter += p[i] & g[i];
    uni += p[i] | g[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double miou(const std::vector<std::pair<BinaryMask, BinaryMask>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("miou: no pairs");
  double sum = 0.0;
  for (const auto& [pred, gt] : pairs) sum += iou(pred, gt);
  return sum / static_cast<double>(pairs.size());
}

void SsimParams::validate() const {
  if (window < 1 || window % 2 == 0) throw InvalidArgument("SSIM window must be odd and positive");
  if (!(sigma > 0.0 && k1 > 0.0 && k2 > 0.0 && dynamic_range > 0.0)) {
    throw InvalidArgument("SSIM constants must be positive");
  }
}

SoftMask luminance(const ImageBuffer& image) {
  if (image.channels() == 1) return image.channel(0);
  std::vector<double> y(static_cast<std::size_t>(image.height()) * image.width());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double v = 0.299 * image(r, c, 0) + 0.587 * image(r, c, 1) + 0.114 * image(r, c, 2);
      y[static_cast<std::size_t>(r) * image.width() + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return SoftMask(image.height(), image.width(), std::move(y));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
  params.validate();
  if (a.height() != b.height() || a.width() != b.width()) {
    throw InvalidArgument("ssim: image dimensions differ");
  }
  const int h = a.height();
  const int w = a.width();
  const int win = params.window;
  if (h < win || w < win) {
    throw InvalidArgument("ssim: image " + std::to_string(h) + "x" + std::to_string(w) +
                          " is smaller than the " + std::to_string(win) + "px window");
  }

  const SoftMask ya = luminance(a);
  const SoftMask yb = luminance(b);

  const int radius = win / 2;
  std::vector<double> g(win);
  double gsum = 0.0;
  for (int i = 0; i < win; ++i) {
    const double d = i - radius;
    g[i] = std::exp(-(d * d) / (2.0 * params.sigma * params.sigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);

  double total = 0.0;
  std::size_t windows = 0;
  for (int r = radius; r < h - radius; ++r) {
    for (int c = radius; c < w - radius; ++c) {
      double mu_a = 0.0, mu_b = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const double wt = g[dy + radius] * g[dx + radius];
          const double va = ya(r + dy, c + dx);
          const double vb = yb(r + dy, c + dx);
          mu_a += wt * va;
          mu_b += wt * vb;
          saa += wt * va * va;
          sbb += wt * vb * vb;
          sab += wt * va * vb;
        }
      }
      const double var_a = saa - mu_a * mu_a;
      const double var_b = sbb - mu_b * mu_b;
      const double cov = sab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

}  // namespace maskwarp
