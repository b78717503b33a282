#pragma once

#include "core/tensor.hpp"

namespace medivista {

// One level of the 2-D Haar transform of a [C,H,W] frame, orthonormal
// scaling: for a 2x2 block [[a,b],[c,d]]
//   ll = (a+b+c+d)/2   lh = (a-b+c-d)/2
//   hl = (a+b-c-d)/2   hh = (a-b-c+d)/2
// so the summed squared coefficients equal the squared norm of the input.
struct WaveletSubbands {
    Tensor ll, lh, hl, hh;  // each [C, ceil(H/2), ceil(W/2)]
    int orig_h = 0, orig_w = 0;  // pre-padding extents, restored by the inverse
};

// Odd extents are symmetric-padded by one row/column before the transform;
// the struct records the original size so haar_idwt2 can crop it back.
WaveletSubbands haar_dwt2(const Tensor& frame);
Tensor haar_idwt2(const WaveletSubbands& sb);

// Sub-bands stacked channel-wise into [4C, H2, W2] (LL, LH, HL, HH order).
Tensor subbands_channels(const WaveletSubbands& sb);

}  // namespace medivista
