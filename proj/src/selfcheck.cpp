#include "semtts/selfcheck.hpp"

#include "semtts/errors.hpp"
#include "semtts/fusion.hpp"
#include "semtts/metrics.hpp"
#include "semtts/oracles.hpp"
#include "semtts/random.hpp"
#include "semtts/strategies.hpp"
#include "semtts/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace semtts::selfcheck {

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.values()) x = rng.uniform(lo, hi);
    return m;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

std::vector<bool> random_mask(Rng& rng, std::size_t n, bool force_masked) {
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < 0.7;
    const std::size_t keep = rng.below(n);
    mask[keep] = true;
    if (force_masked && n > 1) {
        std::size_t j = rng.below(n - 1);
        if (j >= keep) ++j;
        mask[j] = false;
    }
    return mask;
}

void fail(SuiteResult& r, const std::string& why) {
    if (r.passed) r.failure = why;
    r.passed = false;
}

std::string seed_note(std::uint64_t s) { return " (seed " + std::to_string(s) + ")"; }

} // namespace

SuiteResult gradient_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"attention-gradient", true, 0.0, 1e-5, 0, {}, {}};
    for (std::size_t k = 0; k < instances; ++k) {
        const std::uint64_t s = mix_seed(seed, k);
        Rng rng(s);
        const std::size_t t = pick(rng, 1, 8), m = pick(rng, 1, 8), d = pick(rng, 1, 8);
        const Matrix q = random_matrix(rng, t, d), kv = random_matrix(rng, m, d), go = random_matrix(rng, t, d);
        FusionConfig cfg;
        cfg.train_mode = false;
        if (rng.uniform() < 0.5) cfg.gamma = rng.uniform(0.5, 3.0);
        MaskPair masks;
        const double roll = rng.uniform();
        if (roll < 0.33) masks.src_mask = random_mask(rng, m, false);
        else if (roll < 0.5) masks.tgt_mask = random_mask(rng, t, false);
        const auto analytic = fuse_sequential_backward(q, kv, cfg, masks, go);
        const auto numeric = oracle::finite_difference_grads(q, kv, cfg, masks, go, 1e-6);
        const double err = oracle::gradient_relative_error(analytic, numeric);
        r.max_error = std::max(r.max_error, err);
        if (!(err < r.threshold)) fail(r, "relative error " + std::to_string(err) + seed_note(s));
        ++r.cases;
    }
    return r;
}

SuiteResult attention_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"attention-invariants", true, 0.0, 0.0, 0, {}, {}};
    double worst_rowsum = 0.0, worst_masked = 0.0, worst_uniform = 0.0;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::uint64_t s = mix_seed(seed, k);
        Rng rng(s);
        const std::size_t t = pick(rng, 1, 8), m = pick(rng, 2, 8), d = pick(rng, 1, 8);

        // Row sums in eval mode.
        {
            FusionConfig cfg;
            const auto q = random_matrix(rng, t, d, -2, 2), kv = random_matrix(rng, m, d, -2, 2);
            MaskPair masks;
            masks.src_mask = random_mask(rng, m, false);
            const auto w = *fuse_sequential(q, kv, cfg, masks).attention;
            for (std::size_t i = 0; i < t; ++i) {
                double sum = 0.0;
                for (double x : w.row(i)) sum += x;
                worst_rowsum = std::max(worst_rowsum, std::abs(sum - 1.0));
            }
        }
        // Masked keys with unmasked logits bounded by 100 in magnitude.
        {
            FusionConfig cfg;
            cfg.gamma = 1.0;
            const double bound = std::sqrt(100.0 / static_cast<double>(d));
            const auto q = random_matrix(rng, t, d, -bound, bound), kv = random_matrix(rng, m, d, -bound, bound);
            MaskPair masks;
            masks.src_mask = random_mask(rng, m, true);
            const auto w = *fuse_sequential(q, kv, cfg, masks).attention;
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (!(*masks.src_mask)[j]) worst_masked = std::max(worst_masked, w(i, j));
        }
        // Very large temperature flattens rows to uniform over valid keys.
        // Entries in +-1/sqrt(d) keep |q.k| <= 1 before the temperature.
        {
            FusionConfig cfg;
            cfg.gamma = 1e6;
            const double unit = 1.0 / std::sqrt(static_cast<double>(d));
            const auto q = random_matrix(rng, t, d, -unit, unit), kv = random_matrix(rng, m, d, -unit, unit);
            MaskPair masks;
            masks.src_mask = random_mask(rng, m, false);
            const auto valid = static_cast<double>(std::count(masks.src_mask->begin(), masks.src_mask->end(), true));
            const auto w = *fuse_sequential(q, kv, cfg, masks).attention;
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if ((*masks.src_mask)[j]) worst_uniform = std::max(worst_uniform, std::abs(w(i, j) - 1.0 / valid));
        }
        if (worst_rowsum > 1e-9) fail(r, "row sum off by " + std::to_string(worst_rowsum) + seed_note(s));
        if (!(worst_masked < 1e-30)) fail(r, "masked weight " + std::to_string(worst_masked) + seed_note(s));
        if (!(worst_uniform < 1e-6)) fail(r, "uniform deviation " + std::to_string(worst_uniform) + seed_note(s));
        ++r.cases;
    }
    r.max_error = std::max({worst_rowsum, worst_uniform});
    r.threshold = 1e-9;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "rowsum %.3g, masked %.3g, uniform %.3g", worst_rowsum, worst_masked,
                  worst_uniform);
    r.note = buf;
    return r;
}

SuiteResult pca_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"pca-oracle", true, 0.0, 1e-8, 0, {}, {}};
    std::uint64_t k = 0;
    while (r.cases < instances) {
        const std::uint64_t s = mix_seed(seed, k++);
        Rng rng(s);
        const std::size_t n = pick(rng, 2, 10), d = pick(rng, 2, 10);
        const Matrix h = random_matrix(rng, n, d);
        const auto ref = oracle::covariance_top_eigen(h);
        if (ref.top_value - ref.second_value < 1e-3 * ref.top_value) continue;

        const auto axis = principal_axis(h);
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += axis[c] * ref.top_vector[c];
        const double deviation = 1.0 - std::abs(dot);
        r.max_error = std::max(r.max_error, deviation);
        if (!(deviation <= r.threshold)) fail(r, "|cos| deficit " + std::to_string(deviation) + seed_note(s));

        const auto token = extract_pca(h);
        const auto [hmin, hmax] = std::minmax_element(h.values().begin(), h.values().end());
        const auto [tmin, tmax] = std::minmax_element(token.vector.begin(), token.vector.end());
        const double lo_err = std::abs(*tmin - *hmin) / std::max(std::abs(*hmin), 1e-12);
        const double hi_err = std::abs(*tmax - *hmax) / std::max(std::abs(*hmax), 1e-12);
        if (lo_err > 1e-9 || hi_err > 1e-9) fail(r, "rescaled range mismatch" + seed_note(s));
        ++r.cases;
    }
    return r;
}

SuiteResult eis_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"eis-equivalence", true, 0.0, 0.0, 0, {}, {}};
    for (std::size_t k = 0; k < instances; ++k) {
        const std::uint64_t s = mix_seed(seed, k);
        Rng rng(s);
        const std::size_t d = pick(rng, 1, 8);
        const std::array<Matrix, 3> parts{random_matrix(rng, pick(rng, 1, 4), d), random_matrix(rng, pick(rng, 1, 4), d),
                                          random_matrix(rng, pick(rng, 1, 4), d)};
        const auto word = extract_eis_word(parts[0], parts[1], parts[2]);
        const auto ave = extract_ave(vconcat(parts));
        for (std::size_t c = 0; c < d; ++c) r.max_error = std::max(r.max_error, std::abs(word.vector[c] - ave.vector[c]));
        if (r.max_error > r.threshold) fail(r, "pooled answers differ from concatenated mean" + seed_note(s));
        ++r.cases;
    }
    return r;
}

SuiteResult edit_distance_suite() {
    SuiteResult r{"edit-distance-exhaustive", true, 0.0, 0.0, 0, {}, {}};
    const auto lists = oracle::enumerate_lists(3, 6);
    const auto table = oracle::edit_distance_table(lists, 3);
    for (std::size_t a = 0; a < lists.size(); ++a) {
        for (std::size_t b = 0; b < lists.size(); ++b) {
            const auto stats = edit_stats<int>(lists[a], lists[b]);
            const int expected = table[a * lists.size() + b];
            const double diff = std::abs(static_cast<double>(stats.errors()) - expected);
            r.max_error = std::max(r.max_error, diff);
            if (diff != 0.0 && r.passed) {
                fail(r, "pair #" + std::to_string(a) + "/#" + std::to_string(b) + " got " +
                            std::to_string(stats.errors()) + " expected " + std::to_string(expected));
            }
            ++r.cases;
        }
    }
    const double w = wer("hello world", "hello word");
    if (std::abs(w - 0.5) > 1e-12) fail(r, "WER(hello world, hello word) = " + std::to_string(w));
    return r;
}

SuiteResult roundtrip_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"array-roundtrip", true, 0.0, 0.0, 0, {}, {}};
    for (std::size_t k = 0; k < instances; ++k) {
        const std::uint64_t s = mix_seed(seed, k);
        Rng rng(s);
        const std::size_t rows = pick(rng, 1, 16), cols = pick(rng, 1, 16);
        const Dtype dtype = (k % 2 == 0) ? Dtype::f32 : Dtype::f64;
        Matrix m(rows, cols);
        for (double& x : m.values()) {
            // Spread magnitudes over many binades; f32 values are exactly representable.
            const double mag = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(60)) - 30);
            x = dtype == Dtype::f32 ? static_cast<double>(static_cast<float>(mag)) : mag;
        }
        const std::string bytes = encode_array(m, dtype);
        const auto back = decode_array(bytes);
        if (!(back.matrix == m) || back.dtype != dtype) fail(r, "round-trip mismatch" + seed_note(s));
        if (encode_array(m, dtype) != bytes) fail(r, "non-canonical bytes" + seed_note(s));
        if (bytes.size() < 10 || (10 + (static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8))) % 64 != 0) {
            fail(r, "header not 64-byte aligned" + seed_note(s));
        }
        ++r.cases;
    }
    return r;
}

SuiteResult mcd_suite(std::uint64_t seed, std::size_t instances) {
    SuiteResult r{"mcd", true, 0.0, 1e-5, 0, {}, {}};
    const double anchor = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::uint64_t s = mix_seed(seed, k);
        Rng rng(s);
        const std::size_t order = pick(rng, 1, 24);
        MelCepstra a{random_matrix(rng, 1, order + 1, -5, 5), 22050, 256, order};
        MelCepstra b = a;
        std::vector<double> dir(order);
        double norm = 0.0;
        for (double& x : dir) {
            x = rng.uniform(-1, 1);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (std::size_t c = 1; c <= order; ++c) b.coeffs(0, c) += dir[c - 1] / norm;
        const double got = mcd(a, b);
        r.max_error = std::max(r.max_error, std::abs(got - anchor));
        if (std::abs(got - anchor) > r.threshold) fail(r, "unit anchor gave " + std::to_string(got) + seed_note(s));
        if (mcd(a, a) != 0.0) fail(r, "mcd(a, a) != 0" + seed_note(s));

        const std::size_t frames = pick(rng, 1, 20);
        MelCepstra x{random_matrix(rng, frames, order + 1), 22050, 256, order};
        MelCepstra y{random_matrix(rng, frames, order + 1), 22050, 256, order};
        double diagonal = 0.0;
        for (std::size_t f = 0; f < frames; ++f) diagonal += cepstral_distance(x, f, y, f);
        if (dtw_align(x, y).cost > diagonal * (1 + 1e-12)) fail(r, "dtw cost above diagonal" + seed_note(s));
        ++r.cases;
    }
    return r;
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
    return {gradient_suite(seed), attention_suite(seed), pca_suite(seed),   eis_suite(seed),
            edit_distance_suite(), roundtrip_suite(seed), mcd_suite(seed)};
}

std::string format_result(const SuiteResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-26s %s  cases=%zu  max_error=%.3e", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                  r.cases, r.max_error);
    std::string out = buf;
    if (!r.note.empty()) out += "  (" + r.note + ")";
    if (!r.failure.empty()) out += "  [" + r.failure + "]";
    return out;
}

} // namespace semtts::selfcheck
