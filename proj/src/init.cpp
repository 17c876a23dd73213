#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "maskwarp/error.hpp"
#include "maskwarp/mask_ops.hpp"
#include "maskwarp/optimizer.hpp"

namespace maskwarp {

namespace {

constexpr int kCell = 8;

// A cell's feature is the occupancy of every cell within kPatchRadius of
// it, mapped to [-1, 1] so that empty and full cells point in opposite
// directions, weighted against the unit-amplitude embedding.
constexpr int kPatchRadius = 7;
constexpr double kOccupancyWeight = 4.0;

// Unit-normalized per-cell features: the occupancy patch tiled over the
// channels plus the position embedding. Off-grid cells count as empty.
std::vector<double> cell_features(const SoftMask& cells, const PositionEmbedding& pe) {
  const int h = cells.height();
  const int w = cells.width();
  const int d = pe.channels();
  constexpr int side = 2 * kPatchRadius + 1;
  constexpr int taps = side * side;

  std::vector<double> feat(static_cast<std::size_t>(h) * w * d);
  std::array<double, taps> patch{};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int t = 0; t < taps; ++t) {
        const int y = i + t / side - kPatchRadius;
        const int x = j + t % side - kPatchRadius;
        const double occ = (y >= 0 && y < h && x >= 0 && x < w) ? cells(y, x) : 0.0;
        patch[t] = 2.0 * occ - 1.0;
      }
      const std::size_t cell = static_cast<std::size_t>(i) * w + j;
      double norm2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double v = kOccupancyWeight * patch[k % taps] + pe(i, j, k);
        feat[cell * d + k] = v;
        norm2 += v * v;
      }
      const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
      for (int k = 0; k < d; ++k) feat[cell * d + k] *= inv;
    }
  }
  return feat;
}

bool all_zero(const SoftMask& m) {
  return std::all_of(m.values().begin(), m.values().end(), [](double v) { return v == 0.0; });
}

}  // namespace

PositionEmbedding::PositionEmbedding(int rows, int cols, int channels, std::vector<double> values)
    : rows_(rows), cols_(cols), channels_(channels), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(rows) * cols * channels) {
    throw InvalidArgument("position embedding size mismatch");
  }
}

PositionEmbedding positional_encoding(int rows, int cols, int channels) {
  if (channels <= 0 || channels % 2 != 0) {
    throw InvalidArgument("positional encoding needs an even channel count, got " +
                          std::to_string(channels));
  }
  if (rows < 0 || cols < 0) throw InvalidArgument("negative embedding grid");
  std::vector<double> v(static_cast<std::size_t>(rows) * cols * channels);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double pos = static_cast<double>(j) * cols + i;
      for (int k = 0; k < channels; ++k) {
        const int even = k - (k % 2);
        const double angle = pos / std::pow(10000.0, static_cast<double>(even) / channels);
        v[(static_cast<std::size_t>(i) * cols + j) * channels + k] =
            (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
    }
  }
  return PositionEmbedding(rows, cols, channels, std::move(v));
}

WarpField centroid_init(const BinaryMask& source, const BinaryMask& target) {
  if (!source.same_shape(target)) throw InvalidArgument("centroid_init: mask dimensions differ");
  auto centroid = [](const BinaryMask& m, const char* which) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < m.height(); ++r) {
      for (int c = 0; c < m.width(); ++c) {
        if (m(r, c)) {
          sx += c;
          sy += r;
          ++n;
        }
      }
    }
    if (n == 0) throw InvalidArgument(std::string("no object in ") + which + " mask");
    return std::array<double, 2>{sx / n, sy / n};
  };
  const auto cs = centroid(source, "source");
  const auto ct = centroid(target, "target");
  return WarpField::constant(source.height(), source.width(), cs[0] - ct[0], cs[1] - ct[1]);
}

WarpField correlation_match(const SoftMask& source, const SoftMask& target, int channels) {
  if (!source.same_shape(target)) throw InvalidArgument("correlation_init: mask dimensions differ");
  if (source.height() % kCell != 0 || source.width() % kCell != 0) {
    throw InvalidArgument("correlation_init: dimensions " + std::to_string(source.height()) + "x" +
                          std::to_string(source.width()) + " are not divisible by 8");
  }
  const int h8 = source.height() / kCell;
  const int w8 = source.width() / kCell;
  WarpField coarse(h8, w8);
  if (all_zero(source) || all_zero(target)) return coarse;

  const auto pe = positional_encoding(h8, w8, channels);
  const auto fs = cell_features(area_downsample(source, kCell), pe);
  const auto ft = cell_features(area_downsample(target, kCell), pe);
  const std::size_t cells = static_cast<std::size_t>(h8) * w8;
  const auto d = static_cast<std::size_t>(channels);

  for (std::size_t t = 0; t < cells; ++t) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < cells; ++s) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += ft[t * d + k] * fs[s * d + k];
      if (dot > best_score) {
        best_score = dot;
        best = s;
      }
    }
    const int tr = static_cast<int>(t / w8), tc = static_cast<int>(t % w8);
    const int sr = static_cast<int>(best / w8), sc = static_cast<int>(best % w8);
    coarse.dx(tr, tc) = sc - tc;
    coarse.dy(tr, tc) = sr - tr;
  }
  return coarse;
}

WarpField median_filter3(const WarpField& field) {
  WarpField out(field.height(), field.width());
  std::vector<double> xs, ys;
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      xs.clear();
      ys.clear();
      for (int y = std::max(0, r - 1); y <= std::min(field.height() - 1, r + 1); ++y) {
        for (int x = std::max(0, c - 1); x <= std::min(field.width() - 1, c + 1); ++x) {
          xs.push_back(field.dx(y, x));
          ys.push_back(field.dy(y, x));
        }
      }
      const auto mid = xs.size() / 2;
      std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
      std::nth_element(ys.begin(), ys.begin() + mid, ys.end());
      out.dx(r, c) = xs[mid];
      out.dy(r, c) = ys[mid];
    }
  }
  return out;
}

WarpField correlation_init(const SoftMask& source, const SoftMask& target, int channels) {
  return upsample_field(median_filter3(correlation_match(source, target, channels)), kCell);
}

}  // namespace maskwarp
