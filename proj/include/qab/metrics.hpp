#pragma once

#include "qab/noise.hpp"
#include "qab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qab {

/// Axis-aligned region of interest in pixel units.
struct Roi {
    std::size_t row0 = 0;
    std::size_t col0 = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] bool overlaps(const Roi& o) const noexcept {
        return row0 < o.row0 + o.rows && o.row0 < row0 + rows && col0 < o.col0 + o.cols && o.col0 < col0 + cols;
    }
};

namespace detail {

inline void check_same_geometry(const Potential& a, const Potential& b, const char* who) {
    if (a.geometry() != b.geometry()) throw std::invalid_argument(std::string(who) + ": geometry mismatch");
}

inline double mean_squared_error(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

} // namespace detail

/// Peak convention when none is given: 255 for 8-bit data, otherwise the
/// reference maximum.
inline double default_peak(const Potential& reference, bool eight_bit) {
    if (eight_bit) return 255.0;
    const auto v = reference.values();
    return v.empty() ? 1.0 : *std::max_element(v.begin(), v.end());
}

/// 10 log10(peak^2 / MSE); +inf for identical inputs.
inline double psnr(const Potential& reference, const Potential& test, double peak) {
    detail::check_same_geometry(reference, test, "psnr");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    const double mse = detail::mean_squared_error(reference.values(), test.values());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

inline double snr(const Potential& reference, const Potential& test) { return measured_snr(reference, test); }

struct SsimOptions {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean structural similarity over every fully-contained Gaussian window.
inline double ssim(const Potential& reference, const Potential& test, double peak, SsimOptions opt = {}) {
    detail::check_same_geometry(reference, test, "ssim");
    if (!reference.is_2d()) throw std::invalid_argument("ssim: requires 2D images");
    if (!(peak > 0.0)) throw std::invalid_argument("ssim: peak must be positive");
    const std::size_t rows = reference.rows();
    const std::size_t cols = reference.cols();
    const std::size_t w = opt.window;
    if (rows < w || cols < w) {
        throw std::invalid_argument("ssim: image smaller than the " + std::to_string(w) + "x" + std::to_string(w) +
                                    " window");
    }

    std::vector<double> g(w);
    const double centre = static_cast<double>(w - 1) / 2.0;
    double gsum = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        const double u = static_cast<double>(i) - centre;
        g[i] = std::exp(-u * u / (2.0 * opt.sigma * opt.sigma));
        gsum += g[i];
    }
    for (auto& v : g) v /= gsum;

    const double c1 = (opt.k1 * peak) * (opt.k1 * peak);
    const double c2 = (opt.k2 * peak) * (opt.k2 * peak);
    const auto a = reference.values();
    const auto b = test.values();

    double total = 0.0;
    const std::size_t out_rows = rows - w + 1;
    const std::size_t out_cols = cols - w + 1;
    for (std::size_t r = 0; r < out_rows; ++r) {
        for (std::size_t c = 0; c < out_cols; ++c) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < w; ++i) {
                for (std::size_t j = 0; j < w; ++j) {
                    const double wt = g[i] * g[j];
                    const std::size_t k = (r + i) * cols + (c + j);
                    ma += wt * a[k];
                    mb += wt * b[k];
                    saa += wt * a[k] * a[k];
                    sbb += wt * b[k] * b[k];
                    sab += wt * a[k] * b[k];
                }
            }
            const double va = saa - ma * ma;
            const double vb = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    return total / static_cast<double>(out_rows * out_cols);
}

struct RoiStats {
    double mean = 0.0;
    double variance = 0.0;   // population variance
};

inline RoiStats roi_stats(const Potential& image, const Roi& roi) {
    if (!image.is_2d()) throw std::invalid_argument("roi_stats: requires a 2D image");
    if (roi.rows == 0 || roi.cols == 0) throw std::invalid_argument("roi_stats: empty ROI");
    if (roi.row0 + roi.rows > image.rows() || roi.col0 + roi.cols > image.cols()) {
        throw std::invalid_argument("roi_stats: ROI exceeds image bounds");
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < roi.rows; ++r) {
        for (std::size_t c = 0; c < roi.cols; ++c) sum += image.at(roi.row0 + r, roi.col0 + c);
    }
    const double n = static_cast<double>(roi.rows * roi.cols);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t r = 0; r < roi.rows; ++r) {
        for (std::size_t c = 0; c < roi.cols; ++c) {
            const double d = image.at(roi.row0 + r, roi.col0 + c) - mean;
            sq += d * d;
        }
    }
    return {mean, sq / n};
}

/// Contrast-to-noise ratio in dB:
/// 20 log10(|mu_a - mu_b| / sqrt((var_a + var_b) / 2)).
/// Returns +inf when both regions are flat and -inf when the means coincide.
inline double cnr(const Potential& image, const Roi& a, const Roi& b) {
    if (a.overlaps(b)) throw std::invalid_argument("cnr: ROIs must be disjoint");
    const auto sa = roi_stats(image, a);
    const auto sb = roi_stats(image, b);
    const double contrast = std::abs(sa.mean - sb.mean);
    const double pooled = std::sqrt((sa.variance + sb.variance) / 2.0);
    if (pooled == 0.0) {
        return contrast == 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    if (contrast == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(contrast / pooled);
}

} // namespace qab
