#pragma once

#include "semtts/audio.hpp"
#include "semtts/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semtts {

// ---------------------------------------------------------------------------
// Mel-cepstral analysis

struct MelConfig {
    int sample_rate = 22050;
    std::size_t window = 1024;
    std::size_t shift = 256;
    std::size_t n_mels = 80;
    std::size_t order = 12;  ///< K; frames keep c_0..c_K
    double fmin = 0.0;
    double fmax = 0.0;       ///< 0 means Nyquist
    double log_floor = 1e-10;

    void validate() const;
};

struct MelCepstra {
    Matrix coeffs; ///< frames x (order + 1)
    int sample_rate = 0;
    std::size_t frame_shift = 0;
    std::size_t order = 0;

    std::size_t frames() const noexcept { return coeffs.rows(); }
};

/// Frames = floor((samples - window) / shift) + 1, no padding. Each frame:
/// periodic Hann window, |FFT|, HTK mel filterbank, natural log with floor,
/// orthonormal DCT-II, first order + 1 coefficients.
MelCepstra mel_cepstra_from_audio(std::span<const double> pcm, const MelConfig& cfg = {});
MelCepstra mel_cepstra_from_audio(const Audio& audio, MelConfig cfg = {});

/// Triangular HTK-mel filterbank, n_mels x (window / 2 + 1).
Matrix mel_filterbank(const MelConfig& cfg);

// ---------------------------------------------------------------------------
// Alignment and distortion

using FramePair = std::pair<std::size_t, std::size_t>;

struct DtwResult {
    std::vector<FramePair> path;
    double cost = 0.0; ///< summed Euclidean distance over c_1..c_K along the path
};

/// Euclidean distance between frames over c_1..c_K.
double cepstral_distance(const MelCepstra& a, std::size_t i, const MelCepstra& b, std::size_t j);

/// Minimum-cost monotonic path with steps (1,0), (0,1), (1,1). Backtracking
/// prefers the diagonal, then (1,0), then (0,1) on ties.
DtwResult dtw_align(const MelCepstra& a, const MelCepstra& b);

struct McdOptions {
    bool use_dtw = true;
    bool skip_c0 = true;
};

/// Mean over aligned frame pairs of (10 / ln 10) * sqrt(2 * sum_k (c_k - c'_k)^2), in dB.
double mcd(const MelCepstra& a, const MelCepstra& b, const McdOptions& opts = {});

/// Per-frame distortion for one pair of coefficient rows.
double frame_mcd(std::span<const double> a, std::span<const double> b, bool skip_c0);

// ---------------------------------------------------------------------------
// Error rates

struct EditStats {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_len = 0;

    std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
    /// (S + D + I) / ref_len; empty when the reference is empty.
    std::optional<double> rate() const noexcept;

    friend bool operator==(const EditStats&, const EditStats&) = default;
};

/// Unit-cost Levenshtein alignment. Among optimal alignments, backtracking
/// prefers substitution (or match), then deletion, then insertion.
template <typename T>
EditStats edit_stats(std::span<const T> ref, std::span<const T> hyp);

struct TextNormalization {
    bool lowercase = true;
    bool collapse_whitespace = true;
    bool strip_punctuation = true;
    bool count_spaces = true; ///< whether spaces are CER tokens
};

std::string normalize_text(std::string_view text, const TextNormalization& opts = {});

/// UTF-8 to code points; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

std::vector<std::string> split_words(std::string_view text);

EditStats char_edit_stats(std::string_view ref, std::string_view hyp, const TextNormalization& opts = {});
EditStats word_edit_stats(std::string_view ref, std::string_view hyp, const TextNormalization& opts = {});

/// Character error rate; throws ValidationError for an empty normalized reference.
double cer(std::string_view ref, std::string_view hyp, const TextNormalization& opts = {});
double wer(std::string_view ref, std::string_view hyp, const TextNormalization& opts = {});

// ---------------------------------------------------------------------------
// Summaries

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; ///< population standard deviation
    std::size_t count = 0;
};

MeanStd mean_std(std::span<const double> values);

/// "7.32 ± 0.61" style with fixed decimals.
std::string format_mean_std(const MeanStd& s, int decimals = 2);

// ---------------------------------------------------------------------------

template <typename T>
EditStats edit_stats(std::span<const T> ref, std::span<const T> hyp) {
    const std::size_t n = ref.size(), m = hyp.size();
    const std::size_t w = m + 1;
    std::vector<std::size_t> dist((n + 1) * w);
    for (std::size_t i = 0; i <= n; ++i) dist[i * w] = i;
    for (std::size_t j = 0; j <= m; ++j) dist[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = dist[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            const std::size_t del = dist[(i - 1) * w + j] + 1;
            const std::size_t ins = dist[i * w + j - 1] + 1;
            dist[i * w + j] = std::min(sub, std::min(del, ins));
        }
    }
    EditStats s;
    s.ref_len = n;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        const std::size_t here = dist[i * w + j];
        if (i > 0 && j > 0) {
            const bool same = ref[i - 1] == hyp[j - 1];
            if (dist[(i - 1) * w + j - 1] + (same ? 0 : 1) == here) {
                if (!same) ++s.substitutions;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && dist[(i - 1) * w + j] + 1 == here) {
            ++s.deletions;
            --i;
            continue;
        }
        ++s.insertions;
        --j;
    }
    return s;
}

} // namespace semtts
