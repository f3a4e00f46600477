#pragma once

#include "qab/hamiltonian.hpp"
#include "qab/parallel.hpp"
#include "qab/smoothing.hpp"
#include "qab/spectral.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qab {

/// Largest dimension processed as a single block.
inline constexpr std::size_t kMaxUnblockedDim = 4096;

/// Soft energy-rank cutoff: keep ranks 1..s, then ramp down with slope 1/rho.
struct ThresholdParams {
    std::size_t s = 1;
    double rho = 1.0;

    void validate() const {
        if (s < 1) throw std::invalid_argument("ThresholdParams: s must be >= 1");
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            throw std::invalid_argument("ThresholdParams: rho must be positive, got " + std::to_string(rho));
        }
    }
};

/// Weight of the basis vector with 1-based energy rank `rank`.
inline double tau(std::size_t rank, const ThresholdParams& p) {
    if (rank < 1) throw std::invalid_argument("tau: rank is 1-based");
    if (rank <= p.s) return 1.0;
    const double ramp = 1.0 - static_cast<double>(rank - p.s) / p.rho;
    return ramp > 0.0 ? ramp : 0.0;
}

inline std::vector<double> tau_profile(std::size_t dim, const ThresholdParams& p) {
    p.validate();
    std::vector<double> w(dim);
    for (std::size_t i = 0; i < dim; ++i) w[i] = tau(i + 1, p);
    return w;
}

/// Same ramp as tau(), applied to the energy value instead of the rank.
inline std::vector<double> energy_tau_profile(std::span<const double> energies, double cutoff, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("energy_tau_profile: rho must be positive");
    std::vector<double> w(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) {
        if (energies[i] <= cutoff) {
            w[i] = 1.0;
        } else {
            const double ramp = 1.0 - (energies[i] - cutoff) / rho;
            w[i] = ramp > 0.0 ? ramp : 0.0;
        }
    }
    return w;
}

enum class ThresholdMode { Rank, Energy };

struct Hyperparams {
    double planck = 0.5;                ///< hbar^2 / 2m
    SmoothSpec smooth{4.0};             ///< pre-filter for the potential only
    std::optional<std::size_t> s;       ///< rank cutoff; defaults to ceil(0.15 * block dim)
    double rho = 1.0;
    std::optional<std::size_t> block;   ///< square block side (segment length in 1D)
    bool smooth_per_block = false;      ///< smooth each block separately instead of the whole input
    ThresholdMode threshold_mode = ThresholdMode::Rank;
    double energy_cutoff = 0.0;         ///< used when threshold_mode == Energy

    void validate() const {
        PlanckFactor{planck};
        smooth.validate();
        if (s && *s < 1) throw std::invalid_argument("Hyperparams: s must be >= 1");
        if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("Hyperparams: rho must be positive");
        if (block && *block < 4) throw std::invalid_argument("Hyperparams: block size must be >= 4");
        if (threshold_mode == ThresholdMode::Energy && !std::isfinite(energy_cutoff)) {
            throw std::invalid_argument("Hyperparams: energy cutoff must be finite");
        }
    }

    [[nodiscard]] ThresholdParams threshold_for(std::size_t dim) const {
        const std::size_t rank = s ? *s : static_cast<std::size_t>(std::ceil(0.15 * static_cast<double>(dim)));
        return ThresholdParams{std::max<std::size_t>(rank, 1), rho};
    }
};

struct CoefficientVector {
    std::vector<double> alphas;
};

/// alpha_i = <x, psi_i>.
inline CoefficientVector project(std::span<const double> x, const AdaptiveBasis& basis) {
    if (x.size() != basis.dim()) {
        throw std::invalid_argument("project: signal length " + std::to_string(x.size()) + " != basis dim " +
                                    std::to_string(basis.dim()));
    }
    CoefficientVector c;
    c.alphas.resize(basis.dim());
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto psi = basis.vector(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * psi[k];
        c.alphas[i] = acc;
    }
    return c;
}

inline CoefficientVector project(const Potential& x, const AdaptiveBasis& basis) { return project(x.values(), basis); }

/// x_hat = sum_i alpha_i tau_i psi_i, accumulated in ascending rank order.
inline std::vector<double> reconstruct(const CoefficientVector& alphas, const AdaptiveBasis& basis,
                                       const ThresholdParams& p) {
    p.validate();
    if (alphas.alphas.size() != basis.dim()) {
        throw std::invalid_argument("reconstruct: coefficient count " + std::to_string(alphas.alphas.size()) +
                                    " != basis dim " + std::to_string(basis.dim()));
    }
    std::vector<double> out(basis.dim(), 0.0);
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const double w = alphas.alphas[i] * tau(i + 1, p);
        if (w == 0.0) continue;
        const auto psi = basis.vector(i);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * psi[k];
    }
    return out;
}

namespace detail {

inline std::vector<double> filter_weights(const SpectralTransform& transform, const Hyperparams& hp,
                                          std::size_t s_override = 0) {
    if (hp.threshold_mode == ThresholdMode::Energy) {
        return energy_tau_profile(transform.energies(), hp.energy_cutoff, hp.rho);
    }
    auto p = hp.threshold_for(transform.dim());
    if (s_override != 0) p.s = s_override;
    return tau_profile(transform.dim(), p);
}

// Algorithm core on one block: basis from `smoothed`, coefficients from
// `noisy`. One output per requested rank cutoff (or one for hp's own cutoff
// when `s_values` is empty).
inline std::vector<std::vector<double>> denoise_block(const Potential& noisy, const Potential& smoothed,
                                                      const Hyperparams& hp, std::span<const std::size_t> s_values) {
    const SpectralTransform transform(build_hamiltonian(smoothed, PlanckFactor{hp.planck}));
    const auto alpha = transform.analyze(noisy.values());
    std::vector<std::vector<double>> outputs;
    const std::size_t runs = s_values.empty() ? 1 : s_values.size();
    outputs.reserve(runs);
    for (std::size_t k = 0; k < runs; ++k) {
        const auto weights = filter_weights(transform, hp, s_values.empty() ? 0 : s_values[k]);
        auto scaled = alpha;
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= weights[i];
        outputs.push_back(transform.synthesize(scaled));
    }
    return outputs;
}

struct BlockLayout {
    std::size_t rows = 0;         ///< original grid
    std::size_t cols = 0;
    std::size_t block_rows = 0;   ///< block extent (1 for 1D)
    std::size_t block_cols = 0;
    std::size_t padded_rows = 0;
    std::size_t padded_cols = 0;

    [[nodiscard]] std::size_t blocks_down() const { return padded_rows / block_rows; }
    [[nodiscard]] std::size_t blocks_across() const { return padded_cols / block_cols; }
    [[nodiscard]] std::size_t count() const { return blocks_down() * blocks_across(); }
};

inline BlockLayout make_layout(const Potential& x, std::size_t block_rows, std::size_t block_cols) {
    BlockLayout l;
    l.rows = x.rows();
    l.cols = x.cols();
    l.block_rows = block_rows;
    l.block_cols = block_cols;
    l.padded_rows = (l.rows + l.block_rows - 1) / l.block_rows * l.block_rows;
    l.padded_cols = (l.cols + l.block_cols - 1) / l.block_cols * l.block_cols;
    return l;
}

inline Potential pad_reflect(const Potential& x, const BlockLayout& l) {
    std::vector<double> out(l.padded_rows * l.padded_cols);
    for (std::size_t r = 0; r < l.padded_rows; ++r) {
        const std::size_t sr = reflect_index(static_cast<std::ptrdiff_t>(r), l.rows);
        for (std::size_t c = 0; c < l.padded_cols; ++c) {
            out[r * l.padded_cols + c] = x.values()[sr * l.cols + reflect_index(static_cast<std::ptrdiff_t>(c), l.cols)];
        }
    }
    if (x.is_1d()) return Potential::one_d(std::move(out));
    return Potential::two_d(l.padded_rows, l.padded_cols, std::move(out));
}

inline Potential extract_block(const Potential& padded, const BlockLayout& l, std::size_t index) {
    const std::size_t r0 = (index / l.blocks_across()) * l.block_rows;
    const std::size_t c0 = (index % l.blocks_across()) * l.block_cols;
    std::vector<double> out(l.block_rows * l.block_cols);
    for (std::size_t r = 0; r < l.block_rows; ++r) {
        for (std::size_t c = 0; c < l.block_cols; ++c) {
            out[r * l.block_cols + c] = padded.values()[(r0 + r) * l.padded_cols + c0 + c];
        }
    }
    if (padded.is_1d()) return Potential::one_d(std::move(out));
    return Potential::two_d(l.block_rows, l.block_cols, std::move(out));
}

// Blocked driver shared by every public entry point.
inline std::vector<Potential> denoise_blocked(const Potential& x, const Hyperparams& hp, const BlockLayout& layout,
                                              std::span<const std::size_t> s_values, std::size_t threads) {
    const Potential padded = pad_reflect(x, layout);
    const Potential smoothed = hp.smooth_per_block ? padded : smooth(padded, hp.smooth);
    const std::size_t runs = s_values.empty() ? 1 : s_values.size();

    std::vector<std::vector<std::vector<double>>> per_block(layout.count());
    parallel_for(layout.count(), threads, [&](std::size_t b) {
        const Potential noisy_block = extract_block(padded, layout, b);
        const Potential smooth_block = hp.smooth_per_block ? smooth(noisy_block, hp.smooth)
                                                           : extract_block(smoothed, layout, b);
        per_block[b] = denoise_block(noisy_block, smooth_block, hp, s_values);
    });

    std::vector<Potential> results;
    results.reserve(runs);
    for (std::size_t k = 0; k < runs; ++k) {
        std::vector<double> out(layout.rows * layout.cols);
        for (std::size_t b = 0; b < layout.count(); ++b) {
            const std::size_t r0 = (b / layout.blocks_across()) * layout.block_rows;
            const std::size_t c0 = (b % layout.blocks_across()) * layout.block_cols;
            const auto& values = per_block[b][k];
            for (std::size_t r = 0; r < layout.block_rows && r0 + r < layout.rows; ++r) {
                for (std::size_t c = 0; c < layout.block_cols && c0 + c < layout.cols; ++c) {
                    out[(r0 + r) * layout.cols + c0 + c] = values[r * layout.block_cols + c];
                }
            }
        }
        results.push_back(x.with_values(std::move(out)));
    }
    return results;
}

inline BlockLayout square_blocks(const Potential& x, std::size_t block) {
    return make_layout(x, x.is_2d() ? block : 1, block);
}

inline BlockLayout whole_input(const Potential& x) { return make_layout(x, x.rows(), x.cols()); }

inline void check_unblocked(const Potential& x) {
    if (x.size() > kMaxUnblockedDim) {
        throw std::invalid_argument("denoise: dimension " + std::to_string(x.size()) + " exceeds " +
                                    std::to_string(kMaxUnblockedDim) + " without blocking; set a block size");
    }
    if (x.is_1d() && x.size() < 2) throw std::invalid_argument("denoise: need at least 2 samples");
    if (x.is_2d() && (x.rows() < 2 || x.cols() < 2)) {
        throw std::invalid_argument("denoise: both image dimensions must be >= 2");
    }
}

} // namespace detail

/// Splits the (reflection-padded) input into non-overlapping blocks of side
/// `hp.block`, denoises each against its own adaptive basis and reassembles.
inline Potential denoise_blockwise(const Potential& x, const Hyperparams& hp,
                                   std::size_t threads = default_thread_count()) {
    hp.validate();
    if (!hp.block) throw std::invalid_argument("denoise_blockwise: no block size set");
    return detail::denoise_blocked(x, hp, detail::square_blocks(x, *hp.block), {}, threads).front();
}

/// Adaptive-basis denoising:
///   1. smooth x with the Gaussian pre-filter,
///   2. build the Hamiltonian from the smoothed copy,
///   3. diagonalise it,
///   4. project the original (unsmoothed) x onto the eigenvectors,
///   5. weight the coefficients by tau and reconstruct.
/// With hp.block set the steps run per block (see denoise_blockwise).
inline Potential denoise(const Potential& x, const Hyperparams& hp, std::size_t threads = default_thread_count()) {
    hp.validate();
    if (hp.block) return denoise_blockwise(x, hp, threads);
    detail::check_unblocked(x);
    return detail::denoise_blocked(x, hp, detail::whole_input(x), {}, threads).front();
}

/// One denoised output per rank cutoff in `s_values`, sharing the bases.
inline std::vector<Potential> denoise_thresholds(const Potential& x, const Hyperparams& hp,
                                                 std::span<const std::size_t> s_values,
                                                 std::size_t threads = default_thread_count()) {
    hp.validate();
    if (s_values.empty()) throw std::invalid_argument("denoise_thresholds: no rank cutoffs given");
    for (auto s : s_values) {
        if (s < 1) throw std::invalid_argument("denoise_thresholds: s must be >= 1");
    }
    if (hp.block) return detail::denoise_blocked(x, hp, detail::square_blocks(x, *hp.block), s_values, threads);
    detail::check_unblocked(x);
    return detail::denoise_blocked(x, hp, detail::whole_input(x), s_values, threads);
}

} // namespace qab
