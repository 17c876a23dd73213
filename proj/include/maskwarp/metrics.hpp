#pragma once

#include <utility>
#include <vector>

#include "maskwarp/image.hpp"

namespace maskwarp {

// |pred & gt| / |pred | gt|; 1.0 when both are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

// Mean of per-pair IoU. Throws on an empty list.
double miou(const std::vector<std::pair<BinaryMask, BinaryMask>>& pairs);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  void validate() const;
};

// Rec. 601 luma for RGB; single-channel images pass through.
SoftMask luminance(const ImageBuffer& image);

// Mean SSIM over every window position that fits inside the image, with
// Gaussian-weighted local statistics on luminance.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

}  // namespace maskwarp
