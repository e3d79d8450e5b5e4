#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semtts {

/// Dense row-major matrix of doubles.
///
/// Used for hidden-state dumps (tokens x hidden width), acoustic embeddings,
/// projection weights and attention maps. Values are computed in 64-bit even
/// when the on-disk form is 32-bit.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// Builds a matrix from nested rows; all rows must share a length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols_, cols_};
    }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const noexcept;

    /// Element-wise bitwise equality, shape included.
    friend bool operator==(const Matrix& a, const Matrix& b) noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Stacks matrices of equal width vertically.
Matrix vconcat(std::span<const Matrix> parts);

} // namespace semtts
