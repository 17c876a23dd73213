#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "maskwarp/image.hpp"
#include "maskwarp/schedule.hpp"
#include "maskwarp/warp_field.hpp"

namespace maskwarp {

// One evaluation of the weighted warping objective.
// total == alpha * shape + gamma * beta * smooth.
struct LossBreakdown {
  int round_index = 0;
  int level = 0;
  int iter = 0;
  double shape = 0.0;
  double smooth = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double total = 0.0;

  double recomputed_total() const noexcept { return alpha * shape + gamma * beta * smooth; }
};

// Mean |warp(src) - tgt| over pixels.
double shape_term(const WarpField& field, const SoftMask& src, const SoftMask& tgt);
FieldGradient shape_grad(const WarpField& field, const SoftMask& src, const SoftMask& tgt);

// Masked first-order smoothness: for every pixel with m = 1, the l2 norms of
// the differences to its (i+1,j), (i,j+1), (i+1,j+1) and (i+1,j-1)
// neighbours, averaged over the mask. Out-of-grid neighbours are skipped;
// an empty mask gives 0.
double smooth_term(const WarpField& field, const BinaryMask& m);
FieldGradient smooth_grad(const WarpField& field, const BinaryMask& m);

struct TotalLoss {
  std::vector<LossBreakdown> rounds;
  double total = 0.0;
};

// sum_r alpha_r * shape(w_r) + gamma * sum_r beta_r * smooth(w_r).
TotalLoss total_loss(const std::vector<WarpField>& fields, const SoftMask& src,
                     const SoftMask& tgt, const BinaryMask& smooth_m,
                     const WarpSchedule& schedule);

// Channel-averaged mean |warp(src_img) - tgt_img|.
double rgb_term(const WarpField& field, const ImageBuffer& src_img, const ImageBuffer& tgt_img);
FieldGradient rgb_grad(const WarpField& field, const ImageBuffer& src_img,
                       const ImageBuffer& tgt_img);

// Softened per-label indicator pairs, background included, sorted by label.
using RegionPairs = std::vector<std::pair<SoftMask, SoftMask>>;

RegionPairs region_pairs(const LabelMask& src_labels, const LabelMask& tgt_labels, double sigma);

// Sum over every label (background included) of the shape term between the
// softened indicators.
double region_shape_term(const WarpField& field, const LabelMask& src_labels,
                         const LabelMask& tgt_labels, double sigma = 2.0);
double region_shape_term(const WarpField& field, const RegionPairs& pairs);
FieldGradient region_shape_grad(const WarpField& field, const RegionPairs& pairs);

// CSV with header round,iter,shape,smooth,total. Rounds are 1-based.
void write_trace_csv(std::ostream& out, const std::vector<std::vector<LossBreakdown>>& traces);

namespace detail {

// Value of each term; when grad is non-null, weight * gradient is added to it.
double shape_eval(const WarpField& field, const SoftMask& src, const SoftMask& tgt,
                  FieldGradient* grad, double weight);
double smooth_eval(const WarpField& field, const BinaryMask& m, FieldGradient* grad,
                   double weight);
double rgb_eval(const WarpField& field, const ImageBuffer& src_img, const ImageBuffer& tgt_img,
                FieldGradient* grad, double weight);

}  // namespace detail

}  // namespace maskwarp
