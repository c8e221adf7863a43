#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trwopt/tensor.hpp"

namespace trwopt {

/// Relative square error ||real - estimate||_F / ||real||_F.
inline double rse(const DenseTensor& real, const DenseTensor& estimate) {
    detail::require_same_dims(real, estimate, "rse");
    const double ref = frobenius_norm(real);
    if (ref == 0.0) throw std::invalid_argument("rse: zero-norm reference tensor");
    return frobenius_norm(subtract(real, estimate)) / ref;
}

/// Mean square error ||real - estimate||_F^2 / num(real).
inline double mse(const DenseTensor& real, const DenseTensor& estimate) {
    detail::require_same_dims(real, estimate, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < real.size(); ++i) {
        const double d = real[i] - estimate[i];
        acc += d * d;
    }
    return acc / double(real.size());
}

/// Peak signal-to-noise ratio on a 0..255 scale: 10*log10(255^2 / MSE).
/// A perfect match (MSE = 0) reports positive infinity.
inline double psnr(const DenseTensor& real, const DenseTensor& estimate) {
    const double m = mse(real, estimate);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

inline DenseTensor clip_to_range(const DenseTensor& t, double lo, double hi) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::clamp(t[i], lo, hi);
    return DenseTensor::make_unchecked(t.dims(), std::move(out));
}

}  // namespace trwopt
