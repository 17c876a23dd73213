#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace maskwarp::oracle {

BinaryMask edge_band(const BinaryMask& m, int k) {
  const int h = m.height();
  const int w = m.width();
  const int r = k / 2;
  std::vector<std::uint8_t> out(m.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int sum = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) sum += m(yy, xx);
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = (sum > 0 && sum < k * k) ? 1 : 0;
    }
  }
  return BinaryMask(h, w, std::move(out));
}

double bilinear(const std::vector<double>& plane, int h, int w, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double ax = x - fx;
  const double ay = y - fy;
  auto at = [&](double row, double col) {
    if (row < 0 || row >= h || col < 0 || col >= w) return 0.0;
    return plane[static_cast<std::size_t>(row) * w + static_cast<std::size_t>(col)];
  };
  return (1 - ax) * (1 - ay) * at(fy, fx) + ax * (1 - ay) * at(fy, fx + 1) +
         (1 - ax) * ay * at(fy + 1, fx) + ax * ay * at(fy + 1, fx + 1);
}

std::vector<double> plane_of(const SoftMask& m) { return {m.values().begin(), m.values().end()}; }

std::vector<double> plane_of(const ImageBuffer& img, int channel) {
  std::vector<double> out;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.push_back(img(r, c, channel));
  }
  return out;
}

double shape_term(const WarpField& field, const SoftMask& src, const SoftMask& tgt) {
  const auto plane = plane_of(src);
  const int h = src.height();
  const int w = src.width();
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double v = std::clamp(bilinear(plane, h, w, c + field.dx(r, c), r + field.dy(r, c)), 0.0, 1.0);
      sum += std::abs(v - tgt(r, c));
    }
  }
  return sum / (h * w);
}

double smooth_term(const WarpField& field, const BinaryMask& m) {
  const int h = m.height();
  const int w = m.width();
  double sum = 0.0;
  double count = 0.0;
  auto diff = [&](int r, int c, int nr, int nc) {
    if (nr < 0 || nr >= h || nc < 0 || nc >= w) return 0.0;
    return std::sqrt(std::pow(field.dx(nr, nc) - field.dx(r, c), 2) +
                     std::pow(field.dy(nr, nc) - field.dy(r, c), 2));
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!m(r, c)) continue;
      count += 1;
      sum += diff(r, c, r + 1, c) + diff(r, c, r, c + 1) + diff(r, c, r + 1, c + 1) +
             diff(r, c, r + 1, c - 1);
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

double rgb_term(const WarpField& field, const ImageBuffer& src, const ImageBuffer& tgt) {
  const int h = src.height();
  const int w = src.width();
  double sum = 0.0;
  for (int k = 0; k < src.channels(); ++k) {
    const auto plane = plane_of(src, k);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double v = std::clamp(bilinear(plane, h, w, c + field.dx(r, c), r + field.dy(r, c)), 0.0, 1.0);
        sum += std::abs(v - tgt(r, c, k));
      }
    }
  }
  return sum / (static_cast<double>(h) * w * src.channels());
}

std::vector<double> gaussian_blur(const std::vector<double>& plane, int h, int w, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> out(plane.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double num = 0.0, den = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int rr = r + dy;
          const int cc = c + dx;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const double wt = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
          num += wt * plane[static_cast<std::size_t>(rr) * w + cc];
          den += wt;
        }
      }
      out[static_cast<std::size_t>(r) * w + c] = std::clamp(num / den, 0.0, 1.0);
    }
  }
  return out;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& p) {
  const int h = a.height();
  const int w = a.width();
  auto luma = [](const ImageBuffer& img, int r, int c) {
    if (img.channels() == 1) return img(r, c, 0);
    return std::clamp(0.299 * img(r, c, 0) + 0.587 * img(r, c, 1) + 0.114 * img(r, c, 2), 0.0, 1.0);
  };
  const int rad = p.window / 2;
  std::vector<double> kernel;
  double ksum = 0.0;
  for (int dy = -rad; dy <= rad; ++dy) {
    for (int dx = -rad; dx <= rad; ++dx) {
      kernel.push_back(std::exp(-(dx * dx + dy * dy) / (2 * p.sigma * p.sigma)));
      ksum += kernel.back();
    }
  }
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double total = 0.0;
  int n = 0;
  for (int r = rad; r + rad < h; ++r) {
    for (int c = rad; c + rad < w; ++c) {
      double ma = 0, mb = 0;
      std::size_t i = 0;
      for (int dy = -rad; dy <= rad; ++dy) {
        for (int dx = -rad; dx <= rad; ++dx, ++i) {
          ma += kernel[i] / ksum * luma(a, r + dy, c + dx);
          mb += kernel[i] / ksum * luma(b, r + dy, c + dx);
        }
      }
      double va = 0, vb = 0, cov = 0;
      i = 0;
      for (int dy = -rad; dy <= rad; ++dy) {
        for (int dx = -rad; dx <= rad; ++dx, ++i) {
          const double da = luma(a, r + dy, c + dx) - ma;
          const double db = luma(b, r + dy, c + dx) - mb;
          va += kernel[i] / ksum * da * da;
          vb += kernel[i] / ksum * db * db;
          cov += kernel[i] / ksum * da * db;
        }
      }
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  }
  return total / n;
}

double point_loss(const InterestHeads& n, const InterestHeads& o) {
  double sum = 0.0;
  for (int h = 0; h < n.hc(); ++h) {
    for (int w = 0; w < n.wc(); ++w) {
      for (int k = 0; k < n.point_channels(); ++k) {
        const double d = n.point(h, w)[k] - o.point(h, w)[k];
        sum += d * d;
      }
    }
  }
  return sum / (n.hc() * n.wc());
}

double descriptor_loss(const InterestHeads& n, const InterestHeads& o, const IRParams& p) {
  const int hc = n.hc();
  const int wc = n.wc();
  const double s = n.cell_size();
  const auto& m = p.homography.m;
  double sum = 0.0;
  for (int h = 0; h < hc; ++h) {
    for (int w = 0; w < wc; ++w) {
      const double x = w * s + s / 2;
      const double y = h * s + s / 2;
      const double z = m[6] * x + m[7] * y + m[8];
      const double px = (m[0] * x + m[1] * y + m[2]) / z;
      const double py = (m[3] * x + m[4] * y + m[5]) / z;
      for (int i = 0; i < hc; ++i) {
        for (int j = 0; j < wc; ++j) {
          const double dist = std::sqrt(std::pow(px - (j * s + s / 2), 2) + std::pow(py - (i * s + s / 2), 2));
          const bool g = dist <= p.tau;
          double dot = 0.0;
          for (int k = 0; k < n.desc_channels(); ++k) dot += n.desc(h, w)[k] * o.desc(i, j)[k];
          sum += g ? p.beta_d * std::max(0.0, p.m_p - dot) : std::max(0.0, dot - p.m_n);
        }
      }
    }
  }
  const double cells = static_cast<double>(hc) * wc;
  return sum / (cells * cells);
}

GradientCheck check_gradient(const std::function<double(const WarpField&)>& f, const WarpField& at,
                             const FieldGradient& analytic, const std::vector<std::size_t>& coords,
                             double h, double tolerance) {
  GradientCheck out;
  for (std::size_t idx : coords) {
    WarpField plus = at;
    WarpField minus = at;
    plus.data()[idx] += h;
    minus.data()[idx] -= h;
    const double numeric = (f(plus) - f(minus)) / (2 * h);
    const double exact = analytic.data()[idx];
    const double scale = std::max({std::abs(numeric), std::abs(exact), 1e-10});
    const double rel = std::abs(numeric - exact) / scale;
    ++out.checked;
    if (rel <= tolerance) ++out.passed;
    out.worst = std::max(out.worst, rel);
  }
  return out;
}

SoftMask random_soft_mask(std::mt19937& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(h) * w);
  for (double& x : v) x = u(rng);
  return SoftMask(h, w, gaussian_blur(v, h, w, 1.0));
}

BinaryMask random_binary_mask(std::mt19937& rng, int h, int w, double density) {
  std::bernoulli_distribution b(density);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = b(rng) ? 1 : 0;
  return BinaryMask(h, w, std::move(v));
}

WarpField random_field(std::mt19937& rng, int h, int w, double amp, double margin) {
  std::uniform_real_distribution<double> u(-amp, amp);
  WarpField f(h, w);
  auto nudge = [&](double d) {
    const double frac = d - std::floor(d);
    if (frac < margin) return d + margin;
    if (frac > 1.0 - margin) return d - margin;
    return d;
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      f.dx(r, c) = nudge(u(rng));
      f.dy(r, c) = nudge(u(rng));
    }
  }
  return f;
}

ImageBuffer random_image(std::mt19937& rng, int h, int w, int channels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(h) * w * channels);
  for (double& x : v) x = u(rng);
  return ImageBuffer(h, w, channels, std::move(v));
}

InterestHeads random_heads(std::mt19937& rng, int hc, int wc, int cp, int cd, bool unit_desc) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(hc) * wc * cp);
  std::vector<double> d(static_cast<std::size_t>(hc) * wc * cd);
  for (double& x : p) x = n(rng);
  for (double& x : d) x = n(rng);
  if (unit_desc) {
    for (std::size_t cell = 0; cell < static_cast<std::size_t>(hc) * wc; ++cell) {
      double norm = 0.0;
      for (int k = 0; k < cd; ++k) norm += d[cell * cd + k] * d[cell * cd + k];
      norm = std::sqrt(norm);
      for (int k = 0; k < cd; ++k) d[cell * cd + k] /= norm;
    }
  }
  return InterestHeads(hc, wc, cp, cd, 8, std::move(p), std::move(d));
}

}  // namespace maskwarp::oracle
