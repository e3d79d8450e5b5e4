#include "semtts/metrics.hpp"
#include "semtts/errors.hpp"
#include "semtts/oracles.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace semtts;

namespace {

std::vector<double> tone(double hz, std::size_t n, int rate = 22050) {
    std::vector<double> pcm(n);
    for (std::size_t i = 0; i < n; ++i) pcm[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
    return pcm;
}

MelCepstra from_rows(const std::vector<std::vector<double>>& rows) {
    MelCepstra c;
    c.coeffs = Matrix::from_rows(rows);
    c.sample_rate = 22050;
    c.frame_shift = 256;
    c.order = c.coeffs.cols() - 1;
    return c;
}

const double kUnit = 10.0 / std::log(10.0) * std::sqrt(2.0);

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("mel-cepstra frame count and width") {
    const auto c = mel_cepstra_from_audio(tone(440.0, 22050));
    CHECK(c.frames() == 83);
    CHECK(c.coeffs.cols() == 13);
    CHECK(c.coeffs.all_finite());
    CHECK(mel_cepstra_from_audio(tone(440.0, 1024)).frames() == 1);
    CHECK_THROWS_AS(mel_cepstra_from_audio(tone(440.0, 1023)), DegenerateInputError);
}

TEST_CASE("silence gives identical floored frames") {
    const auto c = mel_cepstra_from_audio(std::vector<double>(4096, 0.0));
    for (std::size_t f = 1; f < c.frames(); ++f)
        for (std::size_t k = 0; k < c.coeffs.cols(); ++k) CHECK(c.coeffs(f, k) == c.coeffs(0, k));
    CHECK(c.coeffs(0, 0) < 0.0);
}

TEST_CASE("mel filterbank shape and non-negativity") {
    const auto fb = mel_filterbank(MelConfig{});
    CHECK(fb.rows() == 80);
    CHECK(fb.cols() == 513);
    for (double v : fb.values()) CHECK(v >= 0.0);
    for (std::size_t m = 0; m < fb.rows(); ++m) {
        double peak = 0.0;
        for (double v : fb.row(m)) peak = std::max(peak, v);
        CHECK(peak > 0.0);
    }
}

TEST_CASE("config validation") {
    MelConfig cfg;
    cfg.order = 80;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = MelConfig{};
    cfg.shift = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("dtw: identical sequences align on the diagonal at zero cost") {
    const auto a = from_rows({{0, 1, 2}, {0, 3, 4}, {0, -1, 0}});
    const auto r = dtw_align(a, a);
    CHECK(r.cost == 0.0);
    CHECK(r.path == std::vector<FramePair>{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("dtw: a duplicated frame costs nothing and lengthens the path by one") {
    const auto a = from_rows({{0, 1, 0}, {0, 5, 5}, {0, -2, 3}});
    const auto b = from_rows({{0, 1, 0}, {0, 5, 5}, {0, 5, 5}, {0, -2, 3}});
    const auto r = dtw_align(a, b);
    CHECK(r.cost == 0.0);
    CHECK(r.path.size() == 4);
    CHECK(r.path.front() == FramePair{0, 0});
    CHECK(r.path.back() == FramePair{2, 3});
    CHECK(mcd(a, b) == 0.0);
}

TEST_CASE("dtw: single frame against many") {
    const auto a = from_rows({{0, 1}});
    const auto b = from_rows({{0, 1}, {0, 2}, {0, 3}});
    const auto r = dtw_align(a, b);
    CHECK(r.path == std::vector<FramePair>{{0, 0}, {0, 1}, {0, 2}});
    CHECK(r.cost == doctest::Approx(3.0));
}

TEST_CASE("dtw: path is monotone and covers both ends") {
    Rng rng(4);
    for (int k = 0; k < 30; ++k) {
        MelCepstra a, b;
        a.coeffs = semtts::testing::random_matrix(rng, 1 + rng.below(12), 4);
        b.coeffs = semtts::testing::random_matrix(rng, 1 + rng.below(12), 4);
        a.order = b.order = 3;
        const auto r = dtw_align(a, b);
        CHECK(r.path.front() == FramePair{0, 0});
        CHECK(r.path.back() == FramePair{a.frames() - 1, b.frames() - 1});
        for (std::size_t s = 1; s < r.path.size(); ++s) {
            const auto di = r.path[s].first - r.path[s - 1].first;
            const auto dj = r.path[s].second - r.path[s - 1].second;
            CHECK(di <= 1);
            CHECK(dj <= 1);
            CHECK(di + dj >= 1);
        }
        double sum = 0.0;
        for (const auto& [i, j] : r.path) sum += cepstral_distance(a, i, b, j);
        CHECK(r.cost == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("mcd: unit difference anchor and c0 handling") {
    const auto a = from_rows({{0, 0, 0}});
    const auto b = from_rows({{7, 1, 0}});
    CHECK(mcd(a, b) == doctest::Approx(kUnit).epsilon(1e-12));
    CHECK(kUnit == doctest::Approx(6.1418).epsilon(1e-4));
    CHECK(mcd(a, b, {.use_dtw = false, .skip_c0 = false}) == doctest::Approx(10.0 / std::log(10.0) * std::sqrt(100.0)));
    CHECK(frame_mcd(std::vector<double>{1, 2}, std::vector<double>{5, 2}, true) == 0.0);
}

TEST_CASE("mcd: symmetry, identity and homogeneity") {
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        MelCepstra a, b;
        const std::size_t fa = 2 + rng.below(8), fb = 2 + rng.below(8);
        a.coeffs = semtts::testing::random_matrix(rng, fa, 6);
        b.coeffs = semtts::testing::random_matrix(rng, fb, 6);
        a.order = b.order = 5;
        CHECK(mcd(a, a) == 0.0);
        const double ab = mcd(a, b);
        CHECK(ab == doctest::Approx(mcd(b, a)).epsilon(1e-12));
        MelCepstra a2 = a, b2 = b;
        for (double& v : a2.coeffs.values()) v *= 3.0;
        for (double& v : b2.coeffs.values()) v *= 3.0;
        CHECK(mcd(a2, b2) == doctest::Approx(3.0 * ab).epsilon(1e-9));
    }
}

TEST_CASE("mcd: lengths and orders") {
    const auto a = from_rows({{0, 1}, {0, 2}});
    const auto b = from_rows({{0, 1}});
    CHECK_THROWS_AS(mcd(a, b, {.use_dtw = false}), ShapeError);
    CHECK_THROWS_AS(mcd(a, from_rows({{0, 1, 2}})), ShapeError);
}

TEST_CASE("mcd on audio: same signal is zero, detuned is positive") {
    const auto a = mel_cepstra_from_audio(tone(220.0, 8000));
    const auto b = mel_cepstra_from_audio(tone(260.0, 8500));
    CHECK(mcd(a, a) == 0.0);
    CHECK(mcd(a, b) > 0.0);
}

TEST_CASE("edit stats: worked examples") {
    const auto s = word_edit_stats("the cat sat", "the cat");
    CHECK(s == EditStats{0, 1, 0, 3});
    CHECK(wer("the cat sat", "the cat") == doctest::Approx(1.0 / 3));
    const auto c = char_edit_stats("abc", "axc");
    CHECK(c == EditStats{1, 0, 0, 3});
    CHECK(cer("abc", "axc") == doctest::Approx(1.0 / 3));
    CHECK(wer("hello world", "hello word") == 0.5);
    CHECK(cer("hello world", "hello word") == doctest::Approx(1.0 / 11));
    CHECK(cer("hello world", "hello word", {.count_spaces = false}) == doctest::Approx(1.0 / 10));
    CHECK(wer("a b", "") == 1.0);
    CHECK(wer("a", "a b c") == 2.0);
    CHECK_THROWS_AS(wer("  ...", "x"), ValidationError);
    CHECK_THROWS_AS(cer("", "x"), ValidationError);
}

TEST_CASE("edit stats: tie-breaking prefers substitution, then deletion") {
    const std::vector<int> ref{1, 2}, hyp{3};
    const auto s = edit_stats<int>(ref, hyp);
    CHECK(s.substitutions == 1);
    CHECK(s.deletions == 1);
    CHECK(s.insertions == 0);
}

TEST_CASE("edit stats: exhaustive check against shortest edit paths") {
    const auto lists = oracle::enumerate_lists(3, 5);
    const auto table = oracle::edit_distance_table(lists, 3);
    const std::size_t n = lists.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto s = edit_stats<int>(lists[i], lists[j]);
            REQUIRE(static_cast<int>(s.errors()) == table[i * n + j]);
            REQUIRE(s.ref_len + s.insertions - s.deletions == lists[j].size());
        }
    }
}

TEST_CASE("normalization") {
    CHECK(normalize_text("  Hello,   WORLD!! ") == "hello world");
    CHECK(normalize_text("Ünïcode  Ça") == "ünïcode ça");
    CHECK(normalize_text("don't", {.strip_punctuation = false}) == "don't");
    Rng rng(3);
    const std::string alphabet = "aB c,.!?  \tZ";
    for (int k = 0; k < 200; ++k) {
        std::string s;
        for (std::size_t i = 0, len = rng.below(20); i < len; ++i) s += alphabet[rng.below(alphabet.size())];
        const auto once = normalize_text(s);
        CHECK(normalize_text(once) == once);
    }
    CHECK(split_words(" a  bb\tc ") == std::vector<std::string>{"a", "bb", "c"});
    CHECK(decode_utf8("\xff").front() == U'�');
}

TEST_CASE("mean and population std") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = mean_std(v);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
    CHECK(s.count == 4);
    CHECK(format_mean_std({7.3249, 0.6051, 10}) == "7.32 ± 0.61");
    CHECK(format_mean_std({1.0, 0.0, 1}, 1) == "1.0 ± 0.0");
}

}
