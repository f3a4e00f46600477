#pragma once

#include "qab/potential.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qab {

/// Variance sigma^2 of the Gaussian pre-filter, in samples^2 (pixels^2).
struct SmoothSpec {
    double sigma2 = 0.0;

    void validate() const {
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
            throw std::invalid_argument("SmoothSpec: sigma2 must be finite and >= 0, got " + std::to_string(sigma2));
        }
    }
};

/// Sampled Gaussian on [-r, r], r = ceil(3 sigma), normalised to unit sum.
/// sigma2 == 0 yields the identity kernel [1].
inline std::vector<double> gaussian_kernel(double sigma2) {
    SmoothSpec{sigma2}.validate();
    if (sigma2 == 0.0) return {1.0};
    const double sigma = std::sqrt(sigma2);
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    for (std::ptrdiff_t u = -radius; u <= radius; ++u) {
        k[static_cast<std::size_t>(u + radius)] = std::exp(-static_cast<double>(u * u) / (2.0 * sigma2));
    }
    // Sum symmetric pairs from the tails inward so the normalised kernel stays
    // exactly symmetric.
    double sum = k[static_cast<std::size_t>(radius)];
    for (std::ptrdiff_t u = radius; u >= 1; --u) sum += 2.0 * k[static_cast<std::size_t>(radius + u)];
    for (auto& w : k) w /= sum;
    return k;
}

/// Half-sample symmetric reflection: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

namespace detail {

// Convolves `count` samples spaced `stride` apart starting at `first`.
inline void convolve_line(std::span<const double> in, std::span<double> out, std::size_t first, std::size_t count,
                          std::size_t stride, std::span<const double> kernel, std::vector<double>& scratch) {
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    scratch.resize(count);
    for (std::size_t i = 0; i < count; ++i) scratch[i] = in[first + i * stride];
    for (std::size_t i = 0; i < count; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t u = -radius; u <= radius; ++u) {
            acc += kernel[static_cast<std::size_t>(u + radius)] *
                   scratch[reflect_index(static_cast<std::ptrdiff_t>(i) - u, count)];
        }
        out[first + i * stride] = acc;
    }
}

} // namespace detail

/// Gaussian low-pass with symmetric-reflection boundaries. 2D inputs are
/// filtered separably, rows first, then columns. Geometry is preserved.
inline Potential smooth(const Potential& x, SmoothSpec spec) {
    spec.validate();
    if (spec.sigma2 == 0.0) return x;
    const auto kernel = gaussian_kernel(spec.sigma2);
    const std::size_t rows = x.rows();
    const std::size_t cols = x.cols();
    std::vector<double> buf(x.values().begin(), x.values().end());
    std::vector<double> scratch;

    for (std::size_t r = 0; r < rows; ++r) {
        detail::convolve_line(buf, buf, r * cols, cols, 1, kernel, scratch);
    }
    if (x.is_2d()) {
        for (std::size_t c = 0; c < cols; ++c) {
            detail::convolve_line(buf, buf, c, rows, cols, kernel, scratch);
        }
    }
    return x.with_values(std::move(buf));
}

} // namespace qab
