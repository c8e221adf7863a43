#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace trwopt {

/// Oscillator used for synthetic completion targets.
/// `literal` is sin(pi/4)*cos(x^2) -- a constant amplitude times a chirp;
/// `x_over_4` is sin(x/4)*cos(x^2), the variant with a slowly varying
/// envelope.
enum class SyntheticForm { literal, x_over_4 };

/// Samples the oscillator at x_k = k * (L / length) for k = 0..length-1.
/// `domain_scale` is L; values <= 0 select the default L = length / 1000,
/// which keeps the chirp phase well sampled (the per-sample phase increment
/// stays below 2*L^2/length = length/500000 cycles) while still sweeping
/// hundreds of oscillations.
inline std::vector<double> gen_synthetic(std::size_t length,
                                         SyntheticForm form = SyntheticForm::literal,
                                         double domain_scale = 0.0) {
    if (length < 1) throw std::invalid_argument("gen_synthetic: length must be >= 1");
    const double scale = domain_scale > 0.0 ? domain_scale : double(length) / 1000.0;
    const double step = scale / double(length);
    std::vector<double> out(length);
    for (std::size_t k = 0; k < length; ++k) {
        const double x = double(k) * step;
        const double envelope =
            form == SyntheticForm::literal ? std::sin(std::numbers::pi / 4.0) : std::sin(x / 4.0);
        out[k] = envelope * std::cos(x * x);
    }
    return out;
}

}  // namespace trwopt
