#include "semtts/fusion.hpp"

#include "semtts/errors.hpp"
#include "semtts/linalg.hpp"
#include "semtts/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semtts {

namespace {

std::string shape_str(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void check_inputs(const Matrix& q, const Matrix& kv, const MaskPair& masks) {
    if (q.empty() || kv.empty()) throw DegenerateInputError("attention fusion: empty query or key sequence");
    if (q.cols() != kv.cols()) {
        throw ShapeError("attention fusion: query " + shape_str(q) + " and key/value " + shape_str(kv) +
                         " widths differ");
    }
    if (masks.tgt_mask && masks.tgt_mask->size() != q.rows()) {
        throw ShapeError("tgt_mask length " + std::to_string(masks.tgt_mask->size()) + " != query length " +
                         std::to_string(q.rows()));
    }
    if (masks.src_mask) {
        if (masks.src_mask->size() != kv.rows()) {
            throw ShapeError("src_mask length " + std::to_string(masks.src_mask->size()) + " != key length " +
                             std::to_string(kv.rows()));
        }
        if (std::none_of(masks.src_mask->begin(), masks.src_mask->end(), [](bool b) { return b; })) {
            throw DegenerateInputError("attention fusion: every key is masked");
        }
    }
}

bool row_valid(const MaskPair& masks, std::size_t i) { return !masks.tgt_mask || (*masks.tgt_mask)[i]; }
bool key_valid(const MaskPair& masks, std::size_t j) { return !masks.src_mask || (*masks.src_mask)[j]; }

// Softmax attention weights before dropout; rows masked by tgt_mask are zero.
Matrix attention_weights(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks) {
    const std::size_t t = q.rows(), m = kv.rows(), d = q.cols();
    const double inv_gamma = 1.0 / cfg.effective_gamma(d);
    Matrix w(t, m);
    std::vector<double> scores(m);
    for (std::size_t i = 0; i < t; ++i) {
        if (!row_valid(masks, i)) continue;
        const auto qi = q.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (!key_valid(masks, j)) {
                scores[j] = cfg.mask_fill;
                continue;
            }
            const auto kj = kv.row(j);
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += qi[c] * kj[c];
            scores[j] = acc * inv_gamma;
        }
        const double peak = *std::max_element(scores.begin(), scores.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            w(i, j) = std::exp(scores[j] - peak);
            sum += w(i, j);
        }
        for (std::size_t j = 0; j < m; ++j) w(i, j) /= sum;
    }
    return w;
}

Matrix weighted_values(const Matrix& w, const Matrix& kv) {
    const std::size_t t = w.rows(), m = w.cols(), d = kv.cols();
    Matrix out(t, d);
    for (std::size_t i = 0; i < t; ++i) {
        auto oi = out.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double wij = w(i, j);
            if (wij == 0.0) continue;
            const auto vj = kv.row(j);
            for (std::size_t c = 0; c < d; ++c) oi[c] += wij * vj[c];
        }
    }
    return out;
}

} // namespace

ProjectionMatrix ProjectionMatrix::seeded(std::size_t d_out, std::size_t d_in, std::uint64_t seed) {
    if (d_out == 0 || d_in == 0) throw ValidationError("projection dimensions must be positive");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    Matrix w(d_out, d_in);
    for (double& x : w.values()) x = rng.uniform(-bound, bound);
    return {std::move(w)};
}

double FusionConfig::effective_gamma(std::size_t d) const {
    return gamma ? *gamma : std::sqrt(static_cast<double>(d));
}

void FusionConfig::validate() const {
    if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) throw ValidationError("gamma must be positive and finite");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ValidationError("dropout_p must lie in [0, 1)");
    if (!std::isfinite(mask_fill)) throw ValidationError("mask_fill must be finite");
}

MaskPair MaskPair::from_lengths(std::optional<std::size_t> t_valid, std::size_t t, std::optional<std::size_t> m_valid,
                                std::size_t m) {
    MaskPair masks;
    if (t_valid) {
        if (*t_valid > t) throw ShapeError("valid query length exceeds sequence length");
        masks.tgt_mask = std::vector<bool>(t, false);
        std::fill_n(masks.tgt_mask->begin(), *t_valid, true);
    }
    if (m_valid) {
        if (*m_valid > m) throw ShapeError("valid key length exceeds sequence length");
        masks.src_mask = std::vector<bool>(m, false);
        std::fill_n(masks.src_mask->begin(), *m_valid, true);
    }
    return masks;
}

std::vector<double> project(const ProjectionMatrix& w, std::span<const double> x) {
    if (x.size() != w.d_in()) {
        throw ShapeError("projection expects width " + std::to_string(w.d_in()) + ", got " + std::to_string(x.size()));
    }
    std::vector<double> y(w.d_out(), 0.0);
    for (std::size_t o = 0; o < y.size(); ++o) {
        const auto row = w.w.row(o);
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    return y;
}

std::vector<double> project(const ProjectionMatrix& w, const GlobalToken& token) { return project(w, token.vector); }

Matrix project(const ProjectionMatrix& w, const Matrix& x) { return multiply_rows(w.w, x); }

Matrix project(const ProjectionMatrix& w, const SemanticSequence& seq) { return multiply_rows(w.w, seq.matrix); }

FusedEmbedding fuse_global(const Matrix& acoustic, std::span<const double> token) {
    if (token.size() != acoustic.cols()) {
        throw ShapeError("global fusion: acoustic " + shape_str(acoustic) + " vs token width " +
                         std::to_string(token.size()));
    }
    Matrix out = acoustic;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += token[c];
    }
    return {std::move(out), std::nullopt};
}

FusedEmbedding fuse_sequential(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks) {
    cfg.validate();
    check_inputs(q, kv, masks);
    Matrix w = attention_weights(q, kv, cfg, masks);
    if (cfg.train_mode && cfg.dropout_p > 0.0) {
        Rng rng(cfg.rng_seed);
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_p);
        for (double& x : w.values()) {
            const bool drop = rng.uniform() < cfg.dropout_p;
            x = drop ? 0.0 : x * keep_scale;
        }
    }
    Matrix out = weighted_values(w, kv);
    return {std::move(out), std::move(w)};
}

FusionGrads fuse_sequential_backward(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks,
                                     const Matrix& grad_out) {
    cfg.validate();
    if (cfg.train_mode && cfg.dropout_p > 0.0) {
        throw ValidationError("attention backward is defined for eval mode (no dropout) only");
    }
    check_inputs(q, kv, masks);
    if (grad_out.rows() != q.rows() || grad_out.cols() != q.cols()) {
        throw ShapeError("grad_out " + shape_str(grad_out) + " does not match output " + shape_str(q));
    }
    const std::size_t t = q.rows(), m = kv.rows(), d = q.cols();
    const double inv_gamma = 1.0 / cfg.effective_gamma(d);
    const Matrix w = attention_weights(q, kv, cfg, masks);

    FusionGrads g{Matrix(t, d), Matrix(m, d)};
    std::vector<double> dw(m), ds(m);
    for (std::size_t i = 0; i < t; ++i) {
        if (!row_valid(masks, i)) continue;
        const auto go = grad_out.row(i);
        // Value path: d kv_j += w_ij * grad_out_i.
        for (std::size_t j = 0; j < m; ++j) {
            auto gkv = g.grad_kv.row(j);
            for (std::size_t c = 0; c < d; ++c) gkv[c] += w(i, j) * go[c];
        }
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto vj = kv.row(j);
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += go[c] * vj[c];
            dw[j] = acc;
            dot += acc * w(i, j);
        }
        // Softmax Jacobian; masked scores are constants and pass no gradient.
        for (std::size_t j = 0; j < m; ++j) ds[j] = key_valid(masks, j) ? w(i, j) * (dw[j] - dot) * inv_gamma : 0.0;

        const auto qi = q.row(i);
        auto gq = g.grad_q.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (ds[j] == 0.0) continue;
            const auto kj = kv.row(j);
            auto gkv = g.grad_kv.row(j);
            for (std::size_t c = 0; c < d; ++c) {
                gq[c] += ds[j] * kj[c];
                gkv[c] += ds[j] * qi[c];
            }
        }
    }
    return g;
}

} // namespace semtts
