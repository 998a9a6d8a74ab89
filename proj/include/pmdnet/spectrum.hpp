#pragma once

#include <span>

namespace pmdnet {

struct SpectralPeak {
  double frequency = 0.0;  // cycles per sample
  double period = 0.0;     // samples
  double magnitude = 0.0;
};

/// Peak of |sum_k (s_k - mean) exp(-2 pi i f k)| over f in [1/len, 1/2],
/// evaluated on a grid of `resolution` points. Throws DegenerateInputError
/// for signals shorter than 4 samples or with no variation.
SpectralPeak dominant_period(std::span<const double> signal, int resolution = 20000);

}  // namespace pmdnet
