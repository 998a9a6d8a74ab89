#include "pmdnet/spectrum.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "pmdnet/errors.hpp"

namespace pmdnet {

SpectralPeak dominant_period(std::span<const double> signal, int resolution) {
  const auto len = signal.size();
  if (len < 4) throw DegenerateInputError("dominant_period needs at least 4 samples");
  if (resolution < 2) throw DomainError("dominant_period needs resolution >= 2");
  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(len);
  std::vector<double> centred(signal.begin(), signal.end());
  double energy = 0.0;
  for (auto& v : centred) {
    v -= mean;
    energy += v * v;
  }
  if (!(energy > 0.0)) throw DegenerateInputError("dominant_period: signal is constant");

  const double f_lo = 1.0 / static_cast<double>(len);
  const double f_hi = 0.5;
  SpectralPeak best;
  for (int i = 0; i < resolution; ++i) {
    const double f = f_lo + (f_hi - f_lo) * i / (resolution - 1);
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      acc += centred[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k));
    }
    const double mag = std::abs(acc);
    if (mag > best.magnitude) best = {f, 1.0 / f, mag};
  }
  return best;
}

}  // namespace pmdnet
