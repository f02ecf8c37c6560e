#pragma once

#include "pocodom/image.hpp"

namespace pocodom {

/// Unnormalized forward 2D DFT (FFTW, cached plans; safe to call from
/// several threads).
ComplexImage fft2(const Image& in);
ComplexImage fft2(const ComplexImage& in);
/// Inverse 2D DFT scaled by 1/(rows*cols).
ComplexImage ifft2(const ComplexImage& in);

}  // namespace pocodom
