#pragma once

#include "qab/noise.hpp"
#include "qab/parallel.hpp"
#include "qab/smoothing.hpp"
#include "qab/spectral.hpp"
#include "qab/transform.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace qab {

/// Inverse participation ratio (sum psi^2)^2 / sum psi^4. For a unit vector
/// this is sum psi^2 / sum psi^4, roughly the number of occupied sites.
inline double ipr(std::span<const double> psi) {
    double s2 = 0.0;
    double s4 = 0.0;
    for (double v : psi) {
        const double q = v * v;
        s2 += q;
        s4 += q * q;
    }
    if (s2 == 0.0) throw std::invalid_argument("ipr: zero vector");
    return s2 * s2 / s4;
}

struct IprReport {
    std::vector<double> per_vector;   // aligned with basis rank
    double mean = 0.0;
};

inline IprReport ipr_report(const AdaptiveBasis& basis) {
    IprReport r;
    r.per_vector.resize(basis.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        r.per_vector[i] = ipr(basis.vector(i));
        sum += r.per_vector[i];
    }
    r.mean = basis.dim() == 0 ? 0.0 : sum / static_cast<double>(basis.dim());
    return r;
}

struct IprCurvePoint {
    double snr_db = 0.0;   // +inf means noiseless
    double mean_ipr = 0.0;
    double std_ipr = 0.0;  // sample std over trials; 0 for a single trial
};

/// Mean IPR of the full basis built from noisy copies of `clean`, one point
/// per SNR. Trial k at SNR index j draws its noise from
/// derive_seed(seed, {j, k}).
inline std::vector<IprCurvePoint> ipr_curve(const Potential& clean, NoiseFamily family,
                                            std::span<const double> snr_list, std::size_t trials,
                                            const Hyperparams& hp, std::uint64_t seed,
                                            std::size_t threads = default_thread_count()) {
    if (trials < 1) throw std::invalid_argument("ipr_curve: trials must be >= 1");
    if (snr_list.empty()) throw std::invalid_argument("ipr_curve: empty SNR list");
    for (double s : snr_list) {
        if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
            throw std::invalid_argument("ipr_curve: invalid SNR value");
        }
    }
    hp.validate();

    const std::size_t jobs = snr_list.size() * trials;
    std::vector<double> means(jobs);
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t j = job / trials;
        const std::size_t k = job % trials;
        Potential noisy = clean;
        if (std::isfinite(snr_list[j])) noisy = add_noise(clean, {family, snr_list[j], derive_seed(seed, {j, k})});
        const auto basis = eigendecompose(build_hamiltonian(smooth(noisy, hp.smooth), PlanckFactor{hp.planck}));
        means[job] = ipr_report(basis).mean;
    });

    std::vector<IprCurvePoint> curve(snr_list.size());
    for (std::size_t j = 0; j < snr_list.size(); ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < trials; ++k) sum += means[j * trials + k];
        const double mean = sum / static_cast<double>(trials);
        double sq = 0.0;
        for (std::size_t k = 0; k < trials; ++k) {
            const double d = means[j * trials + k] - mean;
            sq += d * d;
        }
        curve[j] = {snr_list[j], mean, trials > 1 ? std::sqrt(sq / static_cast<double>(trials - 1)) : 0.0};
    }
    return curve;
}

/// Sign changes between consecutive masked samples, divided by the mask size.
/// Exact zeros carry no sign and are skipped.
inline double zero_crossing_density(std::span<const double> psi, std::span<const std::size_t> mask) {
    if (mask.empty()) throw std::invalid_argument("zero_crossing_density: empty mask");
    std::size_t changes = 0;
    int previous = 0;
    for (std::size_t idx : mask) {
        if (idx >= psi.size()) throw std::out_of_range("zero_crossing_density: mask index out of range");
        const double v = psi[idx];
        const int sign = (v > 0.0) - (v < 0.0);
        if (sign == 0) continue;
        if (previous != 0 && sign != previous) ++changes;
        previous = sign;
    }
    return static_cast<double>(changes) / static_cast<double>(mask.size());
}

} // namespace qab
