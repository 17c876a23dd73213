#pragma once

#include "maskwarp/image.hpp"

namespace maskwarp {

enum class MaskOp { And, Or, Xor, NotA };

// Per-pixel boolean combination. NotA ignores b (its shape is still checked).
BinaryMask mask_logic(const BinaryMask& a, const BinaryMask& b, MaskOp op);
BinaryMask mask_not(const BinaryMask& a);

// Band of pixels whose k x k neighbourhood (zero padded) mixes inside and
// outside pixels: the all-ones convolution lies strictly inside (0, k*k).
BinaryMask edge_band(const BinaryMask& mask, int kernel = 9);

// Region on which the warp field is regularized:
//   (edge_band(target) & source) | ((source ^ target) & target)
// The first term covers compression near the target edge, the second the
// part of the target that has to be filled from outside the source.
BinaryMask smoothness_mask(const BinaryMask& source, const BinaryMask& target, int kernel = 9);

// Gaussian blur of a 0/1 mask, normalized over in-bounds taps and clamped
// to [0,1]. sigma == 0 is an exact copy.
SoftMask soften(const BinaryMask& mask, double sigma);
SoftMask gaussian_blur(const SoftMask& mask, double sigma);
ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma);

// Entries >= threshold become 1.
BinaryMask binarize(const SoftMask& mask, double threshold = 0.5);

// Block-average downsampling by an integer factor; trailing partial blocks
// average over the pixels they contain.
SoftMask area_downsample(const SoftMask& mask, int factor);
ImageBuffer area_downsample(const ImageBuffer& image, int factor);

// Block-wise OR downsampling.
BinaryMask max_pool(const BinaryMask& mask, int factor);

}  // namespace maskwarp
