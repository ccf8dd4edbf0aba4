#pragma once

#include "mkop/types.hpp"

namespace mkop {

/// Unnormalized in-place complex FFT; forward uses e^{-2 pi i jk/N}.
void fft_inplace(cplx* data, int n, bool forward);

}  // namespace mkop
