#pragma once

#include <vector>

#include "maskwarp/image.hpp"
#include "maskwarp/objective.hpp"
#include "maskwarp/schedule.hpp"
#include "maskwarp/warp_field.hpp"

namespace maskwarp {

struct WarpResult {
  // One full-resolution field per round; the last one is the answer.
  std::vector<WarpField> fields;
  // Accepted-step losses per round, in level order. Values are in the units
  // of the level they were evaluated on, so they are non-increasing within
  // each (round, level) segment.
  std::vector<std::vector<LossBreakdown>> traces;
  // IoU of binarize(warp(w_r, soft source)) against the target, per round.
  std::vector<double> round_iou;
  BinaryMask smoothness_mask;
  BinaryMask final_warped_mask;
  ImageBuffer final_warped_image;
};

// Sinusoidal grid embedding over h8 x w8 cells and D channels:
//   P(i,j,k) = sin(pos / 10000^(k/D))      k even
//            = cos(pos / 10000^((k-1)/D))  k odd
// with pos = j * w8 + i, i the row and j the column.
class PositionEmbedding {
 public:
  PositionEmbedding(int rows, int cols, int channels, std::vector<double> values);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int channels() const noexcept { return channels_; }
  double operator()(int i, int j, int k) const noexcept {
    return values_[(static_cast<std::size_t>(i) * cols_ + j) * channels_ + k];
  }

 private:
  int rows_;
  int cols_;
  int channels_;
  std::vector<double> values_;
};

PositionEmbedding positional_encoding(int rows, int cols, int channels);

// Constant field moving the source centroid onto the target centroid.
WarpField centroid_init(const BinaryMask& source, const BinaryMask& target);

// Raw all-pairs matching on the 1/8 cell grid: for every target cell the
// displacement (in cells) to the best-correlated source cell.
WarpField correlation_match(const SoftMask& source, const SoftMask& target, int channels = 256);

// correlation_match, 3x3 median filtered, upsampled to full resolution.
WarpField correlation_init(const SoftMask& source, const SoftMask& target, int channels = 256);

// 3x3 component-wise median over in-bounds neighbours.
WarpField median_filter3(const WarpField& field);

// Warp the source silhouette (and image) onto the target silhouette by
// minimizing alpha_r * shape + gamma * beta_r * smooth, one warm-started
// coarse-to-fine round per schedule entry.
WarpResult optimize(const ImageBuffer& src_img, const BinaryMask& source_mask,
                    const BinaryMask& target_mask, const WarpSchedule& schedule);

// Same solver with the shape term replaced by the pixel term against a
// target image. The masks still drive the smoothness region and the
// initialization.
WarpResult optimize_rgb(const ImageBuffer& src_img, const ImageBuffer& tgt_img,
                        const BinaryMask& source_mask, const BinaryMask& target_mask,
                        const WarpSchedule& schedule);

// Region-constrained variant: the shape term is summed over corresponding
// labels, so each labelled target region is filled from the same label in
// the source.
WarpResult optimize_regions(const ImageBuffer& src_img, const LabelMask& source_labels,
                            const LabelMask& target_labels, const WarpSchedule& schedule);

}  // namespace maskwarp
