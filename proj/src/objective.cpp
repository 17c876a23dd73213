#include "maskwarp/objective.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "maskwarp/error.hpp"
#include "maskwarp/mask_ops.hpp"

namespace maskwarp {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <typename A, typename B>
void require_shape(const A& a, const B& b, const char* what) {
  if (!(a.height() == b.height() && a.width() == b.width())) {
    throw InvalidArgument(std::string(what) + ": dimensions differ (" +
                          std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                          std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
  }
}

constexpr double kTinyNorm = 1e-12;

// Forward neighbour offsets (row, col) of the smoothness penalty.
constexpr int kNeighbours[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};

}  // namespace

namespace detail {

double shape_eval(const WarpField& field, const SoftMask& src, const SoftMask& tgt,
                  FieldGradient* grad, double weight) {
  require_shape(field, src, "shape_term");
  require_shape(src, tgt, "shape_term");
  const int h = src.height();
  const int w = src.width();
  if (h == 0 || w == 0) return 0.0;
  const double inv_n = 1.0 / (static_cast<double>(h) * w);
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto s = sample_bilinear(src.values(), h, w, 1, 0, c + field.dx(r, c), r + field.dy(r, c));
      const double diff = s.value - tgt(r, c);
      sum += std::abs(diff);
      if (grad) {
        const double k = weight * sign(diff) * inv_n;
        grad->dx(r, c) += k * s.d_dx;
        grad->dy(r, c) += k * s.d_dy;
      }
    }
  }
  return sum * inv_n;
}

double smooth_eval(const WarpField& field, const BinaryMask& m, FieldGradient* grad,
                   double weight) {
  require_shape(field, m, "smooth_term");
  const std::size_t count = m.count();
  if (count == 0) return 0.0;
  const int h = m.height();
  const int w = m.width();
  const double inv_m = 1.0 / static_cast<double>(count);
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!m(r, c)) continue;
      for (const auto& off : kNeighbours) {
        const int nr = r + off[0];
        const int nc = c + off[1];
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const double ex = field.dx(nr, nc) - field.dx(r, c);
        const double ey = field.dy(nr, nc) - field.dy(r, c);
        const double norm = std::hypot(ex, ey);
        sum += norm;
        if (grad && norm >= kTinyNorm) {
          const double gx = weight * inv_m * ex / norm;
          const double gy = weight * inv_m * ey / norm;
          grad->dx(nr, nc) += gx;
          grad->dy(nr, nc) += gy;
          grad->dx(r, c) -= gx;
          grad->dy(r, c) -= gy;
        }
      }
    }
  }
  return sum * inv_m;
}

double rgb_eval(const WarpField& field, const ImageBuffer& src_img, const ImageBuffer& tgt_img,
                FieldGradient* grad, double weight) {
  require_shape(field, src_img, "rgb_term");
  require_shape(src_img, tgt_img, "rgb_term");
  if (src_img.channels() != tgt_img.channels()) {
    throw InvalidArgument("rgb_term: channel counts differ");
  }
  const int h = src_img.height();
  const int w = src_img.width();
  const int ch = src_img.channels();
  if (h == 0 || w == 0) return 0.0;
  const double inv_n = 1.0 / (static_cast<double>(h) * w * ch);
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double x = c + field.dx(r, c);
      const double y = r + field.dy(r, c);
      for (int k = 0; k < ch; ++k) {
        const auto s = sample_bilinear(src_img.data(), h, w, ch, k, x, y);
        const double diff = s.value - tgt_img(r, c, k);
        sum += std::abs(diff);
        if (grad) {
          const double g = weight * sign(diff) * inv_n;
          grad->dx(r, c) += g * s.d_dx;
          grad->dy(r, c) += g * s.d_dy;
        }
      }
    }
  }
  return sum * inv_n;
}

}  // namespace detail

double shape_term(const WarpField& field, const SoftMask& src, const SoftMask& tgt) {
  return detail::shape_eval(field, src, tgt, nullptr, 1.0);
}

FieldGradient shape_grad(const WarpField& field, const SoftMask& src, const SoftMask& tgt) {
  FieldGradient g(field.height(), field.width());
  detail::shape_eval(field, src, tgt, &g, 1.0);
  return g;
}

double smooth_term(const WarpField& field, const BinaryMask& m) {
  return detail::smooth_eval(field, m, nullptr, 1.0);
}

FieldGradient smooth_grad(const WarpField& field, const BinaryMask& m) {
  FieldGradient g(field.height(), field.width());
  detail::smooth_eval(field, m, &g, 1.0);
  return g;
}

TotalLoss total_loss(const std::vector<WarpField>& fields, const SoftMask& src,
                     const SoftMask& tgt, const BinaryMask& smooth_m,
                     const WarpSchedule& schedule) {
  if (fields.size() != schedule.alpha.size() || fields.size() != schedule.beta.size()) {
    throw InvalidArgument("total_loss: " + std::to_string(fields.size()) +
                          " fields for a schedule of " + std::to_string(schedule.alpha.size()) +
                          " rounds");
  }
  TotalLoss out;
  for (std::size_t r = 0; r < fields.size(); ++r) {
    LossBreakdown b;
    b.round_index = static_cast<int>(r);
    b.shape = shape_term(fields[r], src, tgt);
    b.smooth = smooth_term(fields[r], smooth_m);
    b.alpha = schedule.alpha[r];
    b.beta = schedule.beta[r];
    b.gamma = schedule.gamma;
    b.total = b.recomputed_total();
    out.total += b.total;
    out.rounds.push_back(b);
  }
  return out;
}

double rgb_term(const WarpField& field, const ImageBuffer& src_img, const ImageBuffer& tgt_img) {
  return detail::rgb_eval(field, src_img, tgt_img, nullptr, 1.0);
}

FieldGradient rgb_grad(const WarpField& field, const ImageBuffer& src_img,
                       const ImageBuffer& tgt_img) {
  FieldGradient g(field.height(), field.width());
  detail::rgb_eval(field, src_img, tgt_img, &g, 1.0);
  return g;
}

RegionPairs region_pairs(const LabelMask& src_labels, const LabelMask& tgt_labels, double sigma) {
  require_shape(src_labels, tgt_labels, "region_shape_term");
  const auto labels = src_labels.label_set();
  if (labels != tgt_labels.label_set()) {
    throw InvalidArgument("region_shape_term: source and target label sets differ");
  }
  RegionPairs pairs;
  pairs.reserve(labels.size());
  for (auto label : labels) {
    pairs.emplace_back(soften(src_labels.indicator(label), sigma),
                       soften(tgt_labels.indicator(label), sigma));
  }
  return pairs;
}

double region_shape_term(const WarpField& field, const RegionPairs& pairs) {
  double sum = 0.0;
  for (const auto& [src, tgt] : pairs) sum += shape_term(field, src, tgt);
  return sum;
}

double region_shape_term(const WarpField& field, const LabelMask& src_labels,
                         const LabelMask& tgt_labels, double sigma) {
  return region_shape_term(field, region_pairs(src_labels, tgt_labels, sigma));
}

FieldGradient region_shape_grad(const WarpField& field, const RegionPairs& pairs) {
  FieldGradient g(field.height(), field.width());
  for (const auto& [src, tgt] : pairs) detail::shape_eval(field, src, tgt, &g, 1.0);
  return g;
}

void write_trace_csv(std::ostream& out, const std::vector<std::vector<LossBreakdown>>& traces) {
  out << "round,iter,shape,smooth,total\n";
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  for (const auto& round : traces) {
    for (const auto& b : round) {
      out << b.round_index + 1 << ',' << b.iter << ',' << b.shape << ',' << b.smooth << ','
          << b.total << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace maskwarp
