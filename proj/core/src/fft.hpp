#pragma once

#include "ftlab/common.hpp"

namespace ftlab::detail {

// Unnormalized in-place DFT on contiguous row-major data of shape n^rank.
// sign = -1 forward (e^{-2 pi i jk/n}), +1 backward.
void fft_inplace(cplx* data, int n, int rank, int sign);

}  // namespace ftlab::detail
