#include "maskwarp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>

#include "maskwarp/error.hpp"
#include "maskwarp/mask_ops.hpp"
#include "maskwarp/metrics.hpp"

namespace maskwarp {

namespace {

struct MaskTerm {
  SoftMask src;
  SoftMask tgt;
};
struct RgbTerm {
  ImageBuffer src;
  ImageBuffer tgt;
};
struct RegionTerm {
  RegionPairs pairs;
};
using DataTerm = std::variant<MaskTerm, RgbTerm, RegionTerm>;

// Full-resolution inputs for the data term, before pyramid construction.
struct MaskSpec {};
struct RgbSpec {
  const ImageBuffer* tgt_img;
};
struct RegionSpec {
  const LabelMask* src_labels;
  const LabelMask* tgt_labels;
};
using DataSpec = std::variant<MaskSpec, RgbSpec, RegionSpec>;

struct Level {
  int factor = 1;
  int height = 0;
  int width = 0;
  DataTerm data;
  BinaryMask smooth;
};

double data_eval(const DataTerm& term, const WarpField& field, FieldGradient* grad,
                 double weight) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, MaskTerm>) {
          return detail::shape_eval(field, t.src, t.tgt, grad, weight);
        } else if constexpr (std::is_same_v<T, RgbTerm>) {
          return detail::rgb_eval(field, t.src, t.tgt, grad, weight);
        } else {
          double sum = 0.0;
          for (const auto& [s, g] : t.pairs) sum += detail::shape_eval(field, s, g, grad, weight);
          return sum;
        }
      },
      term);
}

SoftMask level_mask(const BinaryMask& mask, int factor, double sigma) {
  return gaussian_blur(area_downsample(SoftMask::from(mask), factor), sigma);
}

DataTerm make_level_term(const DataSpec& spec, const ImageBuffer& src_img, const BinaryMask& m_s,
                         const BinaryMask& m_t, int factor, double sigma) {
  return std::visit(
      [&](const auto& s) -> DataTerm {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MaskSpec>) {
          return MaskTerm{level_mask(m_s, factor, sigma), level_mask(m_t, factor, sigma)};
        } else if constexpr (std::is_same_v<T, RgbSpec>) {
          return RgbTerm{gaussian_blur(area_downsample(src_img, factor), sigma),
                         gaussian_blur(area_downsample(*s.tgt_img, factor), sigma)};
        } else {
          RegionTerm term;
          const auto labels = s.src_labels->label_set();
          for (auto label : labels) {
            term.pairs.emplace_back(level_mask(s.src_labels->indicator(label), factor, sigma),
                                    level_mask(s.tgt_labels->indicator(label), factor, sigma));
          }
          return term;
        }
      },
      spec);
}

std::string trace_text(const std::vector<std::vector<LossBreakdown>>& traces) {
  std::ostringstream os;
  write_trace_csv(os, traces);
  return os.str();
}

struct Evaluation {
  LossBreakdown loss;
  FieldGradient grad;
};

Evaluation evaluate(const Level& level, const WarpField& field, double alpha, double beta,
                    double gamma) {
  Evaluation e{{}, FieldGradient(field.height(), field.width())};
  e.loss.alpha = alpha;
  e.loss.beta = beta;
  e.loss.gamma = gamma;
  e.loss.shape = data_eval(level.data, field, &e.grad, alpha);
  e.loss.smooth = detail::smooth_eval(field, level.smooth, &e.grad, gamma * beta);
  e.loss.total = e.loss.recomputed_total();
  return e;
}

// Zero-padded Gaussian smoothing of a vector grid, applied to the gradient
// so that neighbouring displacements move together.
FieldGradient smooth_gradient(const FieldGradient& g, double sigma) {
  if (sigma <= 0.0) return g;
  const int h = g.height();
  const int w = g.width();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));

  FieldGradient tmp(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double sx = 0.0, sy = 0.0;
      for (int t = std::max(-radius, -c); t <= std::min(radius, w - 1 - c); ++t) {
        sx += k[t + radius] * g.dx(r, c + t);
        sy += k[t + radius] * g.dy(r, c + t);
      }
      tmp.dx(r, c) = sx;
      tmp.dy(r, c) = sy;
    }
  }
  FieldGradient out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double sx = 0.0, sy = 0.0;
      for (int t = std::max(-radius, -r); t <= std::min(radius, h - 1 - r); ++t) {
        sx += k[t + radius] * tmp.dx(r + t, c);
        sy += k[t + radius] * tmp.dy(r + t, c);
      }
      out.dx(r, c) = sx;
      out.dy(r, c) = sy;
    }
  }
  return out;
}

double max_pixel_norm(const FieldGradient& g) {
  double m = 0.0;
  const auto d = g.data();
  for (std::size_t i = 0; i < d.size(); i += 2) m = std::max(m, std::hypot(d[i], d[i + 1]));
  return m;
}

// Backtracking descent along the smoothed gradient, scaled so the largest
// per-pixel move equals the current step (in pixels of this level). A trial
// is accepted only if it strictly lowers the loss.
void descend(const Level& level, WarpField& field, int round, int& iter,
             const WarpSchedule& schedule, std::vector<std::vector<LossBreakdown>>& traces) {
  const double alpha = schedule.alpha[round];
  const double beta = schedule.beta[round];
  auto& trace = traces[round];

  Evaluation cur = evaluate(level, field, alpha, beta, schedule.gamma);
  auto check = [&](const LossBreakdown& b) {
    if (!std::isfinite(b.total)) {
      throw NumericalError("non-finite loss in round " + std::to_string(round + 1) + ", level " +
                               std::to_string(level.factor),
                           trace_text(traces));
    }
  };
  check(cur.loss);
  cur.loss.round_index = round;
  cur.loss.level = level.factor;
  cur.loss.iter = iter;
  trace.push_back(cur.loss);

  double step = schedule.step_size;
  int rejections = 0;
  for (int trial = 0; trial < schedule.iters_per_level; ++trial) {
    const FieldGradient dir = smooth_gradient(cur.grad, schedule.update_sigma);
    const double dmax = max_pixel_norm(dir);
    if (dmax == 0.0) break;
    WarpField candidate = field;
    {
      auto d = candidate.data();
      const auto g = dir.data();
      const double scale = step / dmax;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= scale * g[i];
    }
    Evaluation next = evaluate(level, candidate, alpha, beta, schedule.gamma);
    check(next.loss);
    if (next.loss.total < cur.loss.total) {
      field = std::move(candidate);
      cur = std::move(next);
      cur.loss.round_index = round;
      cur.loss.level = level.factor;
      cur.loss.iter = ++iter;
      trace.push_back(cur.loss);
      rejections = 0;
      step = std::min(step * 1.5, schedule.step_size);
    } else {
      step *= 0.5;
      if (++rejections >= schedule.max_rejections) break;
    }
  }
}

WarpResult run(const ImageBuffer& src_img, const BinaryMask& m_s, const BinaryMask& m_t,
               const WarpSchedule& schedule, const DataSpec& spec) {
  schedule.validate();
  if (!m_s.same_shape(m_t)) throw InvalidArgument("optimize: source and target masks differ in size");
  if (src_img.height() != m_s.height() || src_img.width() != m_s.width()) {
    throw InvalidArgument("optimize: source image and masks differ in size");
  }
  if (m_s.count() == 0) throw InvalidArgument("optimize: no object in source mask");
  if (m_t.count() == 0) throw InvalidArgument("optimize: no object in target mask");

  const int h = m_s.height();
  const int w = m_s.width();

  WarpResult result;
  result.smoothness_mask = smoothness_mask(m_s, m_t, schedule.edge_kernel);

  std::vector<Level> levels;
  for (int l = 0; l < schedule.pyramid_levels; ++l) {
    Level lv;
    lv.factor = 1 << (schedule.pyramid_levels - 1 - l);
    lv.data = make_level_term(spec, src_img, m_s, m_t, lv.factor, schedule.soften_sigma);
    lv.smooth = max_pool(result.smoothness_mask, lv.factor);
    lv.height = lv.smooth.height();
    lv.width = lv.smooth.width();
    levels.push_back(std::move(lv));
  }

  WarpField field;
  switch (schedule.init) {
    case InitMode::Zero: field = WarpField(h, w); break;
    case InitMode::Centroid: field = centroid_init(m_s, m_t); break;
    case InitMode::Correlation:
      field = correlation_init(SoftMask::from(m_s), SoftMask::from(m_t),
                               schedule.correlation_channels);
      break;
  }

  const SoftMask soft_src = soften(m_s, schedule.soften_sigma);
  result.traces.resize(schedule.alpha.size());

  for (int round = 0; round < schedule.rounds(); ++round) {
    // Each level starts from the previous round's field seen at its own
    // resolution; the coarse correction is carried up as a residual so fine
    // detail from the previous round survives.
    std::vector<WarpField> start;
    for (const auto& lv : levels) {
      start.push_back(lv.factor == 1 ? field : downsample_field(field, lv.factor));
    }
    int iter = 0;
    WarpField cur = start[0];
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (l > 0) {
        WarpField delta = cur;
        auto dd = delta.data();
        const auto s0 = start[l - 1].data();
        for (std::size_t i = 0; i < dd.size(); ++i) dd[i] -= s0[i];
        const int up = levels[l - 1].factor / levels[l].factor;
        WarpField lifted = resample_field(delta, levels[l].height, levels[l].width, up);
        cur = start[l];
        auto cd = cur.data();
        const auto ld = lifted.data();
        for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += ld[i];
      }
      descend(levels[l], cur, round, iter, schedule, result.traces);
    }
    field = std::move(cur);
    result.fields.push_back(field);
    result.round_iou.push_back(iou(binarize(warp_apply(field, soft_src)), m_t));
  }

  result.final_warped_mask = binarize(warp_apply(field, SoftMask::from(m_s)));
  result.final_warped_image = warp_apply(field, src_img);
  return result;
}

}  // namespace

WarpResult optimize(const ImageBuffer& src_img, const BinaryMask& source_mask,
                    const BinaryMask& target_mask, const WarpSchedule& schedule) {
  return run(src_img, source_mask, target_mask, schedule, MaskSpec{});
}

WarpResult optimize_rgb(const ImageBuffer& src_img, const ImageBuffer& tgt_img,
                        const BinaryMask& source_mask, const BinaryMask& target_mask,
                        const WarpSchedule& schedule) {
  if (tgt_img.height() != src_img.height() || tgt_img.width() != src_img.width() ||
      tgt_img.channels() != src_img.channels()) {
    throw InvalidArgument("optimize_rgb: source and target images differ in shape");
  }
  return run(src_img, source_mask, target_mask, schedule, RgbSpec{&tgt_img});
}

WarpResult optimize_regions(const ImageBuffer& src_img, const LabelMask& source_labels,
                            const LabelMask& target_labels, const WarpSchedule& schedule) {
  if (!source_labels.same_shape(target_labels)) {
    throw InvalidArgument("optimize_regions: label maps differ in size");
  }
  if (source_labels.label_set() != target_labels.label_set()) {
    throw InvalidArgument("optimize_regions: source and target label sets differ");
  }
  auto foreground = [](const LabelMask& labels) {
    return mask_not(labels.indicator(0));
  };
  return run(src_img, foreground(source_labels), foreground(target_labels), schedule,
             RegionSpec{&source_labels, &target_labels});
}

}  // namespace maskwarp
