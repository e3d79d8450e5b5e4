#include "semtts/metrics.hpp"

#include "semtts/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

namespace semtts {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n), in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
        if (!in_ || !out_) throw std::bad_alloc();
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
        if (!plan_) throw Error("fftw planning failed");
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() noexcept { return in_.get(); }

    /// Magnitudes of bins 0..n/2 for the current input.
    void magnitudes(std::vector<double>& mag) {
        fftw_execute(plan_);
        mag.resize(n_ / 2 + 1);
        for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out_.get()[k][0], out_.get()[k][1]);
    }

private:
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    fftw_plan plan_ = nullptr;
};

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x00A0 ||
           c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
}

bool is_punct(char32_t c) {
    if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                         (c >= 0x7B && c <= 0x7E);
    switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7: case 0x00BB: case 0x00BF:
        return true;
    default:
        break;
    }
    return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
           (c >= 0x3008 && c <= 0x3011) || (c >= 0xFF01 && c <= 0xFF0F);
}

char32_t to_lower(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    return c;
}

} // namespace

void MelConfig::validate() const {
    if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
    if (window < 2 || shift == 0) throw ValidationError("window must be >= 2 and shift > 0");
    if (n_mels == 0) throw ValidationError("need at least one mel band");
    if (order + 1 > n_mels) throw ValidationError("cepstral order exceeds mel band count");
    const double top = fmax > 0.0 ? fmax : sample_rate / 2.0;
    if (fmin < 0.0 || top <= fmin || top > sample_rate / 2.0) throw ValidationError("bad mel frequency range");
    if (!(log_floor > 0.0)) throw ValidationError("log floor must be positive");
}

Matrix mel_filterbank(const MelConfig& cfg) {
    cfg.validate();
    const std::size_t bins = cfg.window / 2 + 1;
    const double top = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
    const double mel_lo = hz_to_mel(cfg.fmin), mel_hi = hz_to_mel(top);
    std::vector<double> edges(cfg.n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
    }
    Matrix fb(cfg.n_mels, bins);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.window);
            const double rise = (f - left) / (centre - left);
            const double fall = (right - f) / (right - centre);
            fb(m, k) = std::max(0.0, std::min(rise, fall));
        }
    }
    return fb;
}

MelCepstra mel_cepstra_from_audio(std::span<const double> pcm, const MelConfig& cfg) {
    cfg.validate();
    if (pcm.size() < cfg.window) {
        throw DegenerateInputError("audio has " + std::to_string(pcm.size()) + " samples, shorter than one window (" +
                                   std::to_string(cfg.window) + ")");
    }
    for (double s : pcm) {
        if (!std::isfinite(s)) throw ValidationError("audio contains non-finite samples");
    }
    const std::size_t frames = (pcm.size() - cfg.window) / cfg.shift + 1;
    const std::size_t n_coef = cfg.order + 1;
    const Matrix fb = mel_filterbank(cfg);

    std::vector<double> window(cfg.window);
    for (std::size_t i = 0; i < cfg.window; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(cfg.window));
    }
    Matrix dct(n_coef, cfg.n_mels);
    for (std::size_t k = 0; k < n_coef; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(cfg.n_mels));
        for (std::size_t n = 0; n < cfg.n_mels; ++n) {
            dct(k, n) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(n) + 1.0) /
                                         (2.0 * static_cast<double>(cfg.n_mels)));
        }
    }

    RealFft fft(cfg.window);
    std::vector<double> mag, logmel(cfg.n_mels);
    MelCepstra out{Matrix(frames, n_coef), cfg.sample_rate, cfg.shift, cfg.order};
    for (std::size_t f = 0; f < frames; ++f) {
        const double* frame = pcm.data() + f * cfg.shift;
        double* in = fft.input();
        for (std::size_t i = 0; i < cfg.window; ++i) in[i] = frame[i] * window[i];
        fft.magnitudes(mag);
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
            const auto w = fb.row(m);
            double e = 0.0;
            for (std::size_t k = 0; k < mag.size(); ++k) e += w[k] * mag[k];
            logmel[m] = std::log(std::max(e, cfg.log_floor));
        }
        for (std::size_t k = 0; k < n_coef; ++k) {
            const auto basis = dct.row(k);
            double acc = 0.0;
            for (std::size_t n = 0; n < cfg.n_mels; ++n) acc += basis[n] * logmel[n];
            out.coeffs(f, k) = acc;
        }
    }
    return out;
}

MelCepstra mel_cepstra_from_audio(const Audio& audio, MelConfig cfg) {
    cfg.sample_rate = audio.sample_rate;
    return mel_cepstra_from_audio(audio.samples, cfg);
}

double cepstral_distance(const MelCepstra& a, std::size_t i, const MelCepstra& b, std::size_t j) {
    const auto ra = a.coeffs.row(i), rb = b.coeffs.row(j);
    double acc = 0.0;
    for (std::size_t k = 1; k < ra.size(); ++k) {
        const double diff = ra[k] - rb[k];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

DtwResult dtw_align(const MelCepstra& a, const MelCepstra& b) {
    if (a.frames() == 0 || b.frames() == 0) throw DegenerateInputError("dtw: empty cepstral sequence");
    if (a.coeffs.cols() != b.coeffs.cols()) {
        throw ShapeError("dtw: cepstral orders differ (" + std::to_string(a.coeffs.cols() - 1) + " vs " +
                         std::to_string(b.coeffs.cols() - 1) + ")");
    }
    const std::size_t fa = a.frames(), fb = b.frames();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Matrix acc(fa, fb, inf);
    for (std::size_t i = 0; i < fa; ++i) {
        for (std::size_t j = 0; j < fb; ++j) {
            double best = 0.0;
            if (i > 0 || j > 0) {
                best = inf;
                if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
                if (i > 0) best = std::min(best, acc(i - 1, j));
                if (j > 0) best = std::min(best, acc(i, j - 1));
            }
            acc(i, j) = best + cepstral_distance(a, i, b, j);
        }
    }

    DtwResult out;
    out.cost = acc(fa - 1, fb - 1);
    std::size_t i = fa - 1, j = fb - 1;
    out.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        out.path.emplace_back(i, j);
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

double frame_mcd(std::span<const double> a, std::span<const double> b, bool skip_c0) {
    if (a.size() != b.size()) throw ShapeError("frame_mcd: coefficient counts differ");
    double acc = 0.0;
    for (std::size_t k = skip_c0 ? 1 : 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return 10.0 / std::numbers::ln10 * std::sqrt(2.0 * acc);
}

double mcd(const MelCepstra& a, const MelCepstra& b, const McdOptions& opts) {
    if (a.coeffs.cols() != b.coeffs.cols()) {
        throw ShapeError("mcd: cepstral orders differ (" + std::to_string(a.coeffs.cols() - 1) + " vs " +
                         std::to_string(b.coeffs.cols() - 1) + ")");
    }
    if (a.frames() == 0 || b.frames() == 0) throw DegenerateInputError("mcd: empty cepstral sequence");
    double total = 0.0;
    std::size_t pairs = 0;
    if (opts.use_dtw) {
        for (const auto& [i, j] : dtw_align(a, b).path) {
            total += frame_mcd(a.coeffs.row(i), b.coeffs.row(j), opts.skip_c0);
            ++pairs;
        }
    } else {
        if (a.frames() != b.frames()) {
            throw ShapeError("mcd without alignment needs equal frame counts (" + std::to_string(a.frames()) + " vs " +
                             std::to_string(b.frames()) + ")");
        }
        for (std::size_t f = 0; f < a.frames(); ++f) total += frame_mcd(a.coeffs.row(f), b.coeffs.row(f), opts.skip_c0);
        pairs = a.frames();
    }
    return total / static_cast<double>(pairs);
}

std::optional<double> EditStats::rate() const noexcept {
    if (ref_len == 0) return std::nullopt;
    return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && i + len <= text.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    for (char32_t cp : text) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }
    return out;
}

std::string normalize_text(std::string_view text, const TextNormalization& opts) {
    std::u32string out;
    bool pending_space = false;
    for (char32_t c : decode_utf8(text)) {
        if (opts.strip_punctuation && is_punct(c)) continue;
        if (opts.lowercase) c = to_lower(c);
        if (opts.collapse_whitespace && is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return encode_utf8(out);
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char32_t c : decode_utf8(text)) {
        if (is_space(c)) {
            if (!current.empty()) words.push_back(std::move(current));
            current.clear();
        } else {
            current += encode_utf8(std::u32string_view(&c, 1));
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

EditStats char_edit_stats(std::string_view ref, std::string_view hyp, const TextNormalization& opts) {
    auto tokens = [&](std::string_view s) {
        std::u32string cps = decode_utf8(normalize_text(s, opts));
        if (!opts.count_spaces) std::erase_if(cps, is_space);
        return cps;
    };
    const auto r = tokens(ref), h = tokens(hyp);
    return edit_stats<char32_t>(r, h);
}

EditStats word_edit_stats(std::string_view ref, std::string_view hyp, const TextNormalization& opts) {
    const auto r = split_words(normalize_text(ref, opts));
    const auto h = split_words(normalize_text(hyp, opts));
    return edit_stats<std::string>(r, h);
}

double cer(std::string_view ref, std::string_view hyp, const TextNormalization& opts) {
    const auto s = char_edit_stats(ref, hyp, opts);
    if (!s.rate()) throw ValidationError("reference is empty after normalization");
    return *s.rate();
}

double wer(std::string_view ref, std::string_view hyp, const TextNormalization& opts) {
    const auto s = word_edit_stats(ref, hyp, opts);
    if (!s.rate()) throw ValidationError("reference is empty after normalization");
    return *s.rate();
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

std::string format_mean_std(const MeanStd& s, int decimals) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.*f ± %.*f", decimals, s.mean, decimals, s.std);
    return buf;
}

} // namespace semtts
