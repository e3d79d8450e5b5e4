#include "semtts/linalg.hpp"

#include "semtts/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semtts {

SymmetricEigen symmetric_eigen(const Matrix& sym) {
    const std::size_t n = sym.rows();
    if (n != sym.cols()) throw ShapeError("symmetric_eigen needs a square matrix");
    Matrix a = sym;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double frob = 0.0;
    for (double x : a.values()) frob += x * x;

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-32 * frob || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

Matrix multiply_rows(const Matrix& w, const Matrix& x) {
    if (x.cols() != w.cols()) {
        throw ShapeError("projection expects width " + std::to_string(w.cols()) + ", got " + std::to_string(x.cols()));
    }
    Matrix y(x.rows(), w.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto xr = x.row(r);
        for (std::size_t o = 0; o < w.rows(); ++o) {
            const auto wo = w.row(o);
            double acc = 0.0;
            for (std::size_t i = 0; i < xr.size(); ++i) acc += wo[i] * xr[i];
            y(r, o) = acc;
        }
    }
    return y;
}

} // namespace semtts
