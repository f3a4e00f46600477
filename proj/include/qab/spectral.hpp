#pragma once

#include "qab/hamiltonian.hpp"
#include "qab/tridiagonal_ql.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qab {

/// Components at or below this magnitude are skipped when fixing signs.
inline constexpr double kSignThreshold = 1e-12;

/// Orthonormal eigenvectors of a Hamiltonian, sorted by ascending energy.
///
/// Column i of `vectors` is psi_i (0-based rank i). Each column is oriented so
/// that its first component with magnitude > kSignThreshold is positive.
struct AdaptiveBasis {
    std::vector<double> energies;
    Eigen::MatrixXd vectors;

    [[nodiscard]] std::size_t dim() const noexcept { return energies.size(); }

    [[nodiscard]] std::span<const double> vector(std::size_t rank) const {
        if (rank >= dim()) throw std::out_of_range("AdaptiveBasis::vector: rank out of range");
        return {vectors.col(static_cast<Eigen::Index>(rank)).data(), dim()};
    }
};

namespace detail {

inline void check_finite(const HamiltonianMatrix& h) {
    for (std::size_t i = 0; i < h.dim(); ++i) {
        if (!std::isfinite(h.diagonal()[i])) {
            throw std::invalid_argument("eigendecompose: non-finite diagonal entry at " + std::to_string(i));
        }
    }
    if (!std::isfinite(h.planck())) throw std::invalid_argument("eigendecompose: non-finite coupling");
}

inline void orient(Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) > kSignThreshold) {
            if (v[k] < 0) v = -v;
            return;
        }
    }
}

// Stable ascending order of eigenvalues; exact ties fall back to the
// lexicographic order of the (already oriented) eigenvectors when provided.
inline std::vector<std::size_t> ascending_order(std::span<const double> values, const Eigen::MatrixXd* vectors) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        if (vectors == nullptr) return false;
        const auto ca = vectors->col(static_cast<Eigen::Index>(a));
        const auto cb = vectors->col(static_cast<Eigen::Index>(b));
        for (Eigen::Index k = 0; k < ca.size(); ++k) {
            if (ca[k] != cb[k]) return ca[k] < cb[k];
        }
        return false;
    });
    return order;
}

struct TridiagonalForm {
    std::vector<double> diag;
    std::vector<double> offdiag;
    std::optional<Eigen::Tridiagonalization<Eigen::MatrixXd>> householder;
};

// A 1D Hamiltonian is already tridiagonal; a 2D one is reduced by Householder
// similarity transforms H = Q T Q^T.
inline TridiagonalForm tridiagonalize(const HamiltonianMatrix& h) {
    TridiagonalForm form;
    const std::size_t n = h.dim();
    if (h.is_tridiagonal()) {
        form.diag.assign(h.diagonal().begin(), h.diagonal().end());
        form.offdiag.assign(n - 1, h.coupling());
        return form;
    }
    form.householder.emplace(h.dense());
    const auto& tri = *form.householder;
    const Eigen::VectorXd d = tri.diagonal();
    const Eigen::VectorXd e = tri.subDiagonal();
    form.diag.assign(d.data(), d.data() + d.size());
    form.offdiag.assign(e.data(), e.data() + e.size());
    return form;
}

} // namespace detail

/// Full eigendecomposition of H as an explicit, sign-fixed basis.
inline AdaptiveBasis eigendecompose(const HamiltonianMatrix& h) {
    if (h.dim() < 2) throw std::invalid_argument("eigendecompose: dimension must be >= 2");
    detail::check_finite(h);
    const auto n = static_cast<Eigen::Index>(h.dim());

    auto form = detail::tridiagonalize(h);
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
    implicit_ql(std::span<double>(form.diag), form.offdiag, AccumulateRotations{&z});
    if (form.householder) z.applyOnTheLeft(form.householder->matrixQ());

    for (Eigen::Index i = 0; i < n; ++i) detail::orient(z.col(i));
    const auto order = detail::ascending_order(form.diag, &z);

    AdaptiveBasis basis;
    basis.energies.resize(h.dim());
    basis.vectors.resize(n, n);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        basis.energies[rank] = form.diag[order[rank]];
        basis.vectors.col(static_cast<Eigen::Index>(rank)) = z.col(static_cast<Eigen::Index>(order[rank]));
    }
    return basis;
}

/// ||H psi_i - E_i psi_i||_2 for every eigenpair.
inline std::vector<double> residual_report(const HamiltonianMatrix& h, const AdaptiveBasis& basis) {
    if (basis.dim() != h.dim() || static_cast<std::size_t>(basis.vectors.rows()) != h.dim()) {
        throw std::invalid_argument("residual_report: basis dimension " + std::to_string(basis.dim()) +
                                    " does not match Hamiltonian dimension " + std::to_string(h.dim()));
    }
    std::vector<double> residuals(basis.dim());
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto psi = basis.vector(i);
        const auto hpsi = h.apply(psi);
        double sq = 0.0;
        for (std::size_t k = 0; k < psi.size(); ++k) {
            const double d = hpsi[k] - basis.energies[i] * psi[k];
            sq += d * d;
        }
        residuals[i] = std::sqrt(sq);
    }
    return residuals;
}

/// The eigenbasis of H kept in factored form: Householder reflectors (2D
/// only), the QL rotation sequence, and the ascending-energy permutation.
///
/// analyze() and synthesize() cost O(dim^2) instead of the O(dim^3) needed to
/// materialise every eigenvector. Coefficient signs are not normalised, so
/// individual coefficients may differ in sign from project() on an
/// AdaptiveBasis; products alpha_i * psi_i are identical.
class SpectralTransform {
public:
    explicit SpectralTransform(const HamiltonianMatrix& h) : dim_(h.dim()) {
        if (h.dim() < 2) throw std::invalid_argument("SpectralTransform: dimension must be >= 2");
        detail::check_finite(h);
        auto form = detail::tridiagonalize(h);
        rotations_.reserve(h.dim() * h.dim() / 2);
        implicit_ql(std::span<double>(form.diag), form.offdiag, rotations_);
        householder_ = std::move(form.householder);
        order_ = detail::ascending_order(form.diag, nullptr);
        energies_.resize(dim_);
        for (std::size_t rank = 0; rank < dim_; ++rank) energies_[rank] = form.diag[order_[rank]];
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<const double> energies() const noexcept { return energies_; }

    /// Coefficients <x, psi_i> in ascending energy order.
    [[nodiscard]] std::vector<double> analyze(std::span<const double> x) const {
        check_length(x.size(), "analyze");
        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(dim_));
        if (householder_) y = householder_->matrixQ().transpose() * y;
        rotations_.apply_transpose(std::span<double>(y.data(), dim_));
        std::vector<double> alpha(dim_);
        for (std::size_t rank = 0; rank < dim_; ++rank) alpha[rank] = y[static_cast<Eigen::Index>(order_[rank])];
        return alpha;
    }

    /// sum_i alpha_i psi_i for coefficients in ascending energy order.
    [[nodiscard]] std::vector<double> synthesize(std::span<const double> alpha) const {
        check_length(alpha.size(), "synthesize");
        Eigen::VectorXd y(static_cast<Eigen::Index>(dim_));
        for (std::size_t rank = 0; rank < dim_; ++rank) y[static_cast<Eigen::Index>(order_[rank])] = alpha[rank];
        rotations_.apply(std::span<double>(y.data(), dim_));
        if (householder_) y = householder_->matrixQ() * y;
        return {y.data(), y.data() + y.size()};
    }

    /// sum_i w_i <x, psi_i> psi_i.
    [[nodiscard]] std::vector<double> filter(std::span<const double> x, std::span<const double> weights) const {
        check_length(weights.size(), "filter");
        auto alpha = analyze(x);
        for (std::size_t i = 0; i < dim_; ++i) alpha[i] *= weights[i];
        return synthesize(alpha);
    }

    [[nodiscard]] std::size_t rotation_count() const noexcept { return rotations_.size(); }

private:
    void check_length(std::size_t n, const char* what) const {
        if (n != dim_) {
            throw std::invalid_argument(std::string("SpectralTransform::") + what + ": length " + std::to_string(n) +
                                        " != dim " + std::to_string(dim_));
        }
    }

    std::size_t dim_;
    std::vector<double> energies_;
    std::vector<std::size_t> order_;
    RotationSequence rotations_;
    std::optional<Eigen::Tridiagonalization<Eigen::MatrixXd>> householder_;
};

} // namespace qab
