#pragma once

#include "qab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace qab::testdata {

// Procedural test data. Both generators lay a chirp over a smooth level v in
// [0, 1]; the chirp's local wavenumber is sqrt(1.3 - v) and its amplitude
// (1.3 - v)^(-1/4), the WKB shape of a bound state with energy 1.3 at unit
// kinetic weight. Dark regions therefore carry finer detail than bright ones.

inline constexpr double kChirpEnergy = 1.3;

/// Synthetic 1D signal (default length 512), values roughly in [0.1, 1.3].
inline Potential synthetic_signal(std::size_t n = 512) {
    std::vector<double> x(n);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n);
        const double level = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * 2.0 * u);
        const double gap = kChirpEnergy - level;
        phase += std::sqrt(gap);
        x[i] = 0.2 + level + 0.1 * std::pow(gap, -0.25) * std::sin(phase);
    }
    return Potential::one_d(std::move(x));
}

/// Textured n x n image scaled so its maximum is 1: smooth blobs plus an
/// oblique grating that is finer where the blobs are dark.
inline Potential textured_image(std::size_t n) {
    const double pi = std::numbers::pi;
    std::vector<double> x(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double u = static_cast<double>(r) / static_cast<double>(n);
            const double w = static_cast<double>(c) / static_cast<double>(n);
            double level = 0.5 + 0.25 * std::cos(2 * pi * (1.2 * u + 0.1)) * std::cos(2 * pi * (0.9 * w - 0.2)) +
                           0.25 * std::sin(2 * pi * 0.7 * (u + w));
            level = std::clamp(level, 0.0, 1.0);
            const double gap = kChirpEnergy - level;
            const double k = std::sqrt(gap);
            const double grating = std::sin(k * (0.8 * static_cast<double>(r) + 0.6 * static_cast<double>(c)));
            x[r * n + c] = 0.1 + level + 0.1 * std::pow(gap, -0.25) * grating;
        }
    }
    const double peak = *std::max_element(x.begin(), x.end());
    for (auto& v : x) v /= peak;
    return Potential::two_d(n, n, std::move(x));
}

} // namespace qab::testdata
