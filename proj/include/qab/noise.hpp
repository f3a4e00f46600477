#pragma once

#include "qab/error.hpp"
#include "qab/potential.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qab {

// Random streams
// --------------
// Each stream is a std::mt19937_64 engine. Seeds for independent streams
// (per trial, per grid point) are derived from a master seed with the
// SplitMix64 finaliser, so every stream depends only on (master, indices) and
// never on the order in which work is scheduled.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return h;
}

enum class NoiseFamily { Gaussian, Poisson, Speckle };

inline std::string_view to_string(NoiseFamily f) {
    switch (f) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Poisson: return "poisson";
    case NoiseFamily::Speckle: return "speckle";
    }
    return "unknown";
}

inline NoiseFamily parse_noise_family(std::string_view name) {
    if (name == "gaussian") return NoiseFamily::Gaussian;
    if (name == "poisson") return NoiseFamily::Poisson;
    if (name == "speckle") return NoiseFamily::Speckle;
    throw std::invalid_argument("unknown noise family '" + std::string(name) + "'");
}

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::Gaussian;
    double target_snr_db = 15.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double energy(std::span<const double> x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

} // namespace detail

/// Standard deviation of additive Gaussian noise giving the target SNR:
/// sqrt(sum x^2 / (n * 10^(S/10))).
inline double gaussian_noise_std(std::span<const double> x, double snr_db) {
    return std::sqrt(detail::energy(x) / (static_cast<double>(x.size()) * std::pow(10.0, snr_db / 10.0)));
}

/// Photon-count scale c for y = Poisson(c x) / c. The noise variance is x / c
/// per sample, so c = 10^(S/10) * sum x / sum x^2.
inline double poisson_scale(std::span<const double> x, double snr_db) {
    double sum = 0.0;
    for (double v : x) sum += v;
    return std::pow(10.0, snr_db / 10.0) * sum / detail::energy(x);
}

/// Variance of the multiplicative perturbation u in y = x (1 + u).
inline double speckle_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// Adds noise calibrated so that E[sum (y-x)^2] = sum x^2 / 10^(S/10).
/// Deterministic for a given (x, spec).
inline Potential add_noise(const Potential& x, const NoiseSpec& spec) {
    if (!std::isfinite(spec.target_snr_db)) throw std::invalid_argument("add_noise: target SNR must be finite");
    const auto values = x.values();
    if (detail::energy(values) == 0.0) throw DataError("add_noise: input has zero energy");

    std::mt19937_64 rng(spec.seed);
    std::vector<double> out(values.size());
    switch (spec.family) {
    case NoiseFamily::Gaussian: {
        std::normal_distribution<double> normal(0.0, gaussian_noise_std(values, spec.target_snr_db));
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] + normal(rng);
        break;
    }
    case NoiseFamily::Poisson: {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0.0) {
                throw DataError("add_noise: Poisson noise needs non-negative data (index " + std::to_string(i) + ")");
            }
        }
        const double c = poisson_scale(values, spec.target_snr_db);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double lambda = c * values[i];
            if (lambda <= 0.0) {
                out[i] = 0.0;
                continue;
            }
            std::poisson_distribution<long long> poisson(lambda);
            out[i] = static_cast<double>(poisson(rng)) / c;
        }
        break;
    }
    case NoiseFamily::Speckle: {
        std::normal_distribution<double> normal(0.0, std::sqrt(speckle_variance(spec.target_snr_db)));
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * (1.0 + normal(rng));
        break;
    }
    }
    return x.with_values(std::move(out));
}

/// 10 log10(sum clean^2 / sum (noisy - clean)^2); +inf when identical.
inline double measured_snr(std::span<const double> clean, std::span<const double> noisy) {
    if (clean.size() != noisy.size()) throw std::invalid_argument("measured_snr: length mismatch");
    const double signal = detail::energy(clean);
    if (signal == 0.0) throw std::invalid_argument("measured_snr: clean signal has zero energy");
    double err = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double d = noisy[i] - clean[i];
        err += d * d;
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / err);
}

inline double measured_snr(const Potential& clean, const Potential& noisy) {
    if (clean.geometry() != noisy.geometry()) throw std::invalid_argument("measured_snr: geometry mismatch");
    return measured_snr(clean.values(), noisy.values());
}

} // namespace qab
