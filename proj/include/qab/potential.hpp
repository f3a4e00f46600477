#pragma once

#include "qab/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qab {

struct OneD {
    std::size_t n = 0;
    bool operator==(const OneD&) const = default;
};

struct TwoD {
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool operator==(const TwoD&) const = default;
};

using Geometry = std::variant<OneD, TwoD>;

inline std::size_t element_count(const Geometry& g) {
    return std::visit(
        [](const auto& v) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, OneD>) {
                return v.n;
            } else {
                return v.rows * v.cols;
            }
        },
        g);
}

/// A signal or image used as the potential of the Hamiltonian.
///
/// 2D data is stored row-major (lexicographic order), so pixel (r, c) lives
/// at index r * cols + c. Values are always finite.
class Potential {
public:
    Potential() = default;

    Potential(Geometry geometry, std::vector<double> values)
        : geometry_(geometry), values_(std::move(values)) {
        if (values_.size() != element_count(geometry_)) {
            throw std::invalid_argument("Potential: value count " + std::to_string(values_.size()) +
                                        " does not match geometry (" +
                                        std::to_string(element_count(geometry_)) + ")");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::invalid_argument("Potential: non-finite value at index " + std::to_string(i));
            }
        }
    }

    static Potential one_d(std::vector<double> values) {
        const std::size_t n = values.size();
        return Potential(OneD{n}, std::move(values));
    }

    static Potential two_d(std::size_t rows, std::size_t cols, std::vector<double> values) {
        return Potential(TwoD{rows, cols}, std::move(values));
    }

    /// Same geometry, new samples.
    [[nodiscard]] Potential with_values(std::vector<double> values) const {
        return Potential(geometry_, std::move(values));
    }

    [[nodiscard]] const Geometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] bool is_1d() const noexcept { return std::holds_alternative<OneD>(geometry_); }
    [[nodiscard]] bool is_2d() const noexcept { return std::holds_alternative<TwoD>(geometry_); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Rows of the sample grid; a 1D signal is a single row.
    [[nodiscard]] std::size_t rows() const noexcept {
        return is_2d() ? std::get<TwoD>(geometry_).rows : 1;
    }
    [[nodiscard]] std::size_t cols() const noexcept {
        return is_2d() ? std::get<TwoD>(geometry_).cols : values_.size();
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values_.at(r * cols() + c); }

    bool operator==(const Potential&) const = default;

private:
    Geometry geometry_{OneD{0}};
    std::vector<double> values_;
};

} // namespace qab
