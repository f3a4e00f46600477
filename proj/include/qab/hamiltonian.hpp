#pragma once

#include "qab/potential.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qab {

/// The kinetic weight hbar^2 / 2m in front of the discrete Laplacian.
class PlanckFactor {
public:
    explicit PlanckFactor(double t) : t_(t) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw std::invalid_argument("PlanckFactor: must be positive and finite, got " + std::to_string(t));
        }
    }
    [[nodiscard]] double value() const noexcept { return t_; }

private:
    double t_;
};

/// Sparse symmetric Hamiltonian H = -t * Laplacian + diag(x).
///
/// Only the diagonal is stored. Every off-diagonal nonzero is exactly -t and
/// the sparsity pattern is implied by the grid: (i, i+1) is coupled when both
/// sites sit in the same row, (i, i+cols) is coupled for 2D grids. A 1D
/// signal is a single row, so its matrix is tridiagonal.
class HamiltonianMatrix {
public:
    HamiltonianMatrix(std::vector<double> diagonal, double t, std::size_t rows, std::size_t cols)
        : diag_(std::move(diagonal)), t_(t), rows_(rows), cols_(cols) {
        if (diag_.size() != rows_ * cols_) {
            throw std::invalid_argument("HamiltonianMatrix: diagonal length does not match grid");
        }
    }

    [[nodiscard]] std::size_t dim() const noexcept { return diag_.size(); }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double planck() const noexcept { return t_; }
    [[nodiscard]] double coupling() const noexcept { return -t_; }
    [[nodiscard]] bool is_tridiagonal() const noexcept { return rows_ == 1; }
    [[nodiscard]] std::span<const double> diagonal() const noexcept { return diag_; }

    [[nodiscard]] bool coupled(std::size_t i, std::size_t j) const noexcept {
        if (i > j) std::swap(i, j);
        if (j >= dim() || i == j) return false;
        if (j == i + 1) return (j % cols_) != 0;
        return rows_ > 1 && j == i + cols_;
    }

    /// Element access; zero outside the stencil.
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        if (i >= dim() || j >= dim()) throw std::out_of_range("HamiltonianMatrix: index out of range");
        if (i == j) return diag_[i];
        return coupled(i, j) ? -t_ : 0.0;
    }

    /// Number of stored off-diagonal entries, counting (i,j) and (j,i) separately.
    [[nodiscard]] std::size_t coupling_count() const noexcept {
        const std::size_t horizontal = rows_ * (cols_ - 1);
        const std::size_t vertical = rows_ > 1 ? cols_ * (rows_ - 1) : 0;
        return 2 * (horizontal + vertical);
    }

    /// Exact sparse mat-vec.
    [[nodiscard]] std::vector<double> apply(std::span<const double> v) const {
        if (v.size() != dim()) {
            throw std::invalid_argument("HamiltonianMatrix::apply: vector length " + std::to_string(v.size()) +
                                        " != dim " + std::to_string(dim()));
        }
        std::vector<double> out(dim());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                const std::size_t i = r * cols_ + c;
                double acc = diag_[i] * v[i];
                if (c > 0) acc -= t_ * v[i - 1];
                if (c + 1 < cols_) acc -= t_ * v[i + 1];
                if (r > 0) acc -= t_ * v[i - cols_];
                if (r + 1 < rows_) acc -= t_ * v[i + cols_];
                out[i] = acc;
            }
        }
        return out;
    }

    [[nodiscard]] Eigen::MatrixXd dense() const {
        const auto n = static_cast<Eigen::Index>(dim());
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                const auto i = static_cast<Eigen::Index>(r * cols_ + c);
                h(i, i) = diag_[static_cast<std::size_t>(i)];
                if (c + 1 < cols_) h(i, i + 1) = h(i + 1, i) = -t_;
                if (r + 1 < rows_) {
                    const auto below = i + static_cast<Eigen::Index>(cols_);
                    h(i, below) = h(below, i) = -t_;
                }
            }
        }
        return h;
    }

private:
    std::vector<double> diag_;
    double t_;
    std::size_t rows_;
    std::size_t cols_;
};

/// 1D stencil: H(i,i) = x(i) + 2t at every site (endpoints included),
/// H(i,i+-1) = -t.
inline HamiltonianMatrix build_1d(const Potential& x, PlanckFactor planck) {
    if (!x.is_1d()) throw std::invalid_argument("build_1d: potential is not one-dimensional");
    if (x.size() < 2) throw std::invalid_argument("build_1d: need at least 2 samples");
    const double t = planck.value();
    std::vector<double> diag(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diag[i] = x[i] + 2.0 * t;
    return HamiltonianMatrix(std::move(diag), t, 1, x.size());
}

/// 2D five-point stencil with zero padding outside the image: the diagonal is
/// x(i) + t * (number of in-image neighbours), i.e. 4t inside, 3t on edges
/// and 2t at corners. No coupling wraps from the end of one row to the next.
inline HamiltonianMatrix build_2d(const Potential& x, PlanckFactor planck) {
    if (!x.is_2d()) throw std::invalid_argument("build_2d: potential is not two-dimensional");
    const std::size_t rows = x.rows();
    const std::size_t cols = x.cols();
    if (rows < 2 || cols < 2) throw std::invalid_argument("build_2d: both image dimensions must be >= 2");
    const double t = planck.value();
    std::vector<double> diag(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const int neighbours = (r > 0) + (r + 1 < rows) + (c > 0) + (c + 1 < cols);
            diag[r * cols + c] = x.at(r, c) + neighbours * t;
        }
    }
    return HamiltonianMatrix(std::move(diag), t, rows, cols);
}

inline HamiltonianMatrix build_hamiltonian(const Potential& x, PlanckFactor planck) {
    return x.is_1d() ? build_1d(x, planck) : build_2d(x, planck);
}

} // namespace qab
