#include "semtts/strategies.hpp"

#include "semtts/errors.hpp"
#include "semtts/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace semtts {

namespace {

void require_rows(const Matrix& h, const char* op) {
    if (h.rows() == 0 || h.cols() == 0) throw DegenerateInputError(std::string(op) + ": empty hidden-state matrix");
}

std::vector<double> column_mean(const Matrix& h) {
    std::vector<double> mean(h.cols(), 0.0);
    for (std::size_t r = 0; r < h.rows(); ++r) {
        const auto row = h.row(r);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
    }
    const double inv = 1.0 / static_cast<double>(h.rows());
    for (double& m : mean) m *= inv;
    return mean;
}

} // namespace

std::string_view to_string(GlobalStrategy s) noexcept {
    switch (s) {
    case GlobalStrategy::ave: return "ave";
    case GlobalStrategy::pca: return "pca";
    case GlobalStrategy::last: return "last";
    case GlobalStrategy::eis_word: return "eis-word";
    case GlobalStrategy::eis_sentence: return "eis-sentence";
    }
    return "?";
}

std::string_view to_string(SequenceKind k) noexcept { return k == SequenceKind::tex ? "tex" : "pho"; }

std::optional<GlobalStrategy> parse_global_strategy(std::string_view name) noexcept {
    for (auto s : {GlobalStrategy::ave, GlobalStrategy::pca, GlobalStrategy::last, GlobalStrategy::eis_word,
                   GlobalStrategy::eis_sentence}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::optional<SequenceKind> parse_sequence_kind(std::string_view name) noexcept {
    if (name == "tex") return SequenceKind::tex;
    if (name == "pho") return SequenceKind::pho;
    return std::nullopt;
}

GlobalToken extract_ave(const Matrix& h) {
    require_rows(h, "ave");
    return {GlobalStrategy::ave, column_mean(h)};
}

GlobalToken extract_last(const Matrix& h) {
    require_rows(h, "last");
    const auto row = h.row(h.rows() - 1);
    return {GlobalStrategy::last, {row.begin(), row.end()}};
}

std::vector<double> principal_axis(const Matrix& h) {
    require_rows(h, "pca");
    const std::size_t n = h.rows();
    const std::size_t d = h.cols();
    if (n < 2) throw DegenerateInputError("pca: needs at least 2 token rows, got " + std::to_string(n));

    bool identical = true;
    for (std::size_t r = 1; r < n && identical; ++r) {
        identical = std::equal(h.row(r).begin(), h.row(r).end(), h.row(0).begin());
    }
    if (identical) throw DegenerateInputError("pca: zero variance (all token rows identical)");

    const auto mean = column_mean(h);
    Matrix centered(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = h(r, c) - mean[c];

    // Eigen-solve the smaller of the d x d covariance and the n x n Gram
    // matrix; both share their nonzero spectrum.
    const double scale = 1.0 / static_cast<double>(n - 1);
    std::vector<double> axis(d, 0.0);
    if (d <= n) {
        Matrix cov(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < n; ++r) acc += centered(r, i) * centered(r, j);
                cov(i, j) = cov(j, i) = acc * scale;
            }
        }
        const auto eig = symmetric_eigen(cov);
        for (std::size_t i = 0; i < d; ++i) axis[i] = eig.vectors(i, 0);
    } else {
        Matrix gram(n, n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a; b < n; ++b) {
                double acc = 0.0;
                const auto ra = centered.row(a), rb = centered.row(b);
                for (std::size_t c = 0; c < d; ++c) acc += ra[c] * rb[c];
                gram(a, b) = gram(b, a) = acc * scale;
            }
        }
        const auto eig = symmetric_eigen(gram);
        for (std::size_t r = 0; r < n; ++r) {
            const double u = eig.vectors(r, 0);
            const auto row = centered.row(r);
            for (std::size_t c = 0; c < d; ++c) axis[c] += u * row[c];
        }
        double norm = 0.0;
        for (double x : axis) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw DegenerateInputError("pca: zero variance");
        for (double& x : axis) x /= norm;
    }

    std::size_t pivot = 0;
    for (std::size_t c = 1; c < d; ++c) {
        if (std::abs(axis[c]) > std::abs(axis[pivot])) pivot = c;
    }
    if (axis[pivot] < 0.0) {
        for (double& x : axis) x = -x;
    }
    return axis;
}

GlobalToken extract_pca(const Matrix& h) {
    auto axis = principal_axis(h);
    const auto [hmin, hmax] = std::minmax_element(h.values().begin(), h.values().end());
    const auto [amin_it, amax_it] = std::minmax_element(axis.begin(), axis.end());
    const double amin = *amin_it, amax = *amax_it;
    if (amax == amin) throw DegenerateInputError("pca: principal axis is constant, nothing to rescale");
    const double lo = *hmin, hi = *hmax;
    const double gain = (hi - lo) / (amax - amin);
    for (double& x : axis) x = lo + (x - amin) * gain;
    // Pin the extremes exactly; the affine map can be off by an ulp.
    *amin_it = lo;
    *amax_it = hi;
    return {GlobalStrategy::pca, std::move(axis)};
}

GlobalToken extract_eis_word(const Matrix& emotion, const Matrix& intention, const Matrix& style) {
    require_rows(emotion, "eis-word (emotion)");
    require_rows(intention, "eis-word (intention)");
    require_rows(style, "eis-word (style)");
    if (emotion.cols() != intention.cols() || emotion.cols() != style.cols()) {
        throw ShapeError("eis-word: answer widths differ (" + std::to_string(emotion.cols()) + ", " +
                         std::to_string(intention.cols()) + ", " + std::to_string(style.cols()) + ")");
    }
    const std::array<Matrix, 3> parts{emotion, intention, style};
    return {GlobalStrategy::eis_word, column_mean(vconcat(parts))};
}

GlobalToken extract_eis_sentence(const Matrix& answer) {
    require_rows(answer, "eis-sentence");
    return {GlobalStrategy::eis_sentence, column_mean(answer)};
}

SemanticSequence make_sequence(const Matrix& h, SequenceKind kind) {
    require_rows(h, kind == SequenceKind::tex ? "tex" : "pho");
    return {kind, h};
}

} // namespace semtts
