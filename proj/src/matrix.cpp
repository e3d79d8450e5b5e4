#include "semtts/matrix.hpp"

#include "semtts/errors.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace semtts {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw ShapeError("matrix buffer holds " + std::to_string(values_.size()) +
                         " values but shape is " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw ShapeError("ragged rows in Matrix::from_rows");
        values.insert(values.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(values));
}

bool Matrix::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool operator==(const Matrix& a, const Matrix& b) noexcept {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    if (a.values_.empty()) return true;
    return std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

Matrix vconcat(std::span<const Matrix> parts) {
    std::size_t rows = 0;
    std::size_t cols = parts.empty() ? 0 : parts.front().cols();
    for (const auto& p : parts) {
        if (p.cols() != cols) {
            throw ShapeError("vconcat width mismatch: " + std::to_string(p.cols()) + " vs " +
                             std::to_string(cols));
        }
        rows += p.rows();
    }
    std::vector<double> values;
    values.reserve(rows * cols);
    for (const auto& p : parts) values.insert(values.end(), p.values().begin(), p.values().end());
    return Matrix(rows, cols, std::move(values));
}

} // namespace semtts
