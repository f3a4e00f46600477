#pragma once

#include "qab/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qab {

// Implicit QL iteration with Wilkinson-style shifts for symmetric tridiagonal
// matrices (the tql1/tql2 scheme of Bowdler, Martin, Reinsch and Wilkinson).
//
// Every plane rotation produced by the sweep is handed to a sink as
// (i, c, s), meaning: for the eigenvector matrix Z,
//     Z[:, i]   <- c * Z[:, i] - s * Z[:, i+1]
//     Z[:, i+1] <- s * Z[:, i] + c * Z[:, i+1]
// Z starts as the identity, so after the iteration the columns of Z are the
// eigenvectors of the tridiagonal matrix, in the (unsorted) order of `diag`.

/// Discards rotations; eigenvalues only.
struct DiscardRotations {
    void operator()(std::size_t, double, double) noexcept {}
};

/// Applies each rotation to the columns of an explicit matrix.
struct AccumulateRotations {
    Eigen::MatrixXd* z;

    void operator()(std::size_t i, double c, double s) noexcept {
        const Eigen::Index rows = z->rows();
        double* left = z->col(static_cast<Eigen::Index>(i)).data();
        double* right = z->col(static_cast<Eigen::Index>(i) + 1).data();
        for (Eigen::Index k = 0; k < rows; ++k) {
            const double h = right[k];
            right[k] = s * left[k] + c * h;
            left[k] = c * left[k] - s * h;
        }
    }
};

/// The rotation sequence Z = G_1 G_2 ... G_k, stored so it can be applied to
/// vectors without ever forming Z.
class RotationSequence {
public:
    void operator()(std::size_t i, double c, double s) {
        index_.push_back(static_cast<std::uint32_t>(i));
        cos_.push_back(c);
        sin_.push_back(s);
    }

    [[nodiscard]] std::size_t size() const noexcept { return index_.size(); }

    /// v <- Z^T v.
    void apply_transpose(std::span<double> v) const noexcept {
        for (std::size_t k = 0; k < index_.size(); ++k) {
            const std::size_t i = index_[k];
            const double c = cos_[k];
            const double s = sin_[k];
            const double a = v[i];
            const double b = v[i + 1];
            v[i] = c * a - s * b;
            v[i + 1] = s * a + c * b;
        }
    }

    /// v <- Z v.
    void apply(std::span<double> v) const noexcept {
        for (std::size_t k = index_.size(); k-- > 0;) {
            const std::size_t i = index_[k];
            const double c = cos_[k];
            const double s = sin_[k];
            const double a = v[i];
            const double b = v[i + 1];
            v[i] = c * a + s * b;
            v[i + 1] = -s * a + c * b;
        }
    }

    void reserve(std::size_t n) {
        index_.reserve(n);
        cos_.reserve(n);
        sin_.reserve(n);
    }

private:
    std::vector<std::uint32_t> index_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

inline constexpr int kMaxQlIterations = 60;

/// Diagonalises the symmetric tridiagonal matrix with main diagonal `diag`
/// (length n) and sub-diagonal `offdiag` (length n-1; offdiag[i] couples i
/// and i+1). On return `diag` holds the eigenvalues, unsorted.
///
/// Throws NumericalError if an eigenvalue fails to converge within
/// kMaxQlIterations sweeps.
template <class RotationSink>
void implicit_ql(std::span<double> diag, std::span<const double> offdiag, RotationSink&& sink) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (offdiag.size() + 1 != n) {
        throw std::invalid_argument("implicit_ql: off-diagonal must have length n-1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(diag[i]) || (i + 1 < n && !std::isfinite(offdiag[i]))) {
            throw std::invalid_argument("implicit_ql: non-finite matrix entry");
        }
    }

    // e[i] couples i and i+1; e[n-1] is a zero sentinel.
    std::vector<double> e(n, 0.0);
    std::copy(offdiag.begin(), offdiag.end(), e.begin());

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double shift_total = 0.0;
    double norm_estimate = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        norm_estimate = std::max(norm_estimate, std::abs(diag[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m + 1 < n && std::abs(e[m]) > eps * norm_estimate) ++m;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > kMaxQlIterations) {
                    std::ostringstream msg;
                    msg << "implicit_ql: eigenvalue " << l << " did not converge after " << kMaxQlIterations
                        << " iterations (residual coupling " << std::abs(e[l]) << ")";
                    throw NumericalError(msg.str());
                }

                // Shift from the leading 2x2 block.
                double g = diag[l];
                double p = (diag[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                diag[l] = e[l] / (p + r);
                diag[l + 1] = e[l] * (p + r);
                const double dl1 = diag[l + 1];
                double h = g - diag[l];
                for (std::size_t i = l + 2; i < n; ++i) diag[i] -= h;
                shift_total += h;

                // Chase the bulge from m back up to l.
                p = diag[m];
                double c = 1.0;
                double c2 = c;
                double c3 = c;
                const double el1 = e[l + 1];
                double s = 0.0;
                double s2 = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    sink(i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                diag[l] = c * p;
            } while (std::abs(e[l]) > eps * norm_estimate);
        }
        diag[l] += shift_total;
        e[l] = 0.0;
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix, ascending.
inline std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag, std::span<const double> offdiag) {
    std::vector<double> d(diag.begin(), diag.end());
    implicit_ql(std::span<double>(d), offdiag, DiscardRotations{});
    std::sort(d.begin(), d.end());
    return d;
}

} // namespace qab
