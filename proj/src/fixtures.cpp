#include "semtts/fixtures.hpp"

#include "semtts/audio.hpp"
#include "semtts/errors.hpp"
#include "semtts/manifest.hpp"
#include "semtts/prompts.hpp"
#include "semtts/random.hpp"
#include "semtts/tensor_io.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace semtts {

namespace {

struct Line {
    const char* text;
    const char* heard;
    const char* phonemes;
    const char* emotion;
};

constexpr std::array<Line, 8> kLines{{
    {"I can't believe you did that!", "I can't believe you did it", "aɪ kænt bɪlˈiːv juː dɪd ðæt", "angry"},
    {"That is the funniest thing I have heard all week.", "that is the funniest thing I heard all week",
     "ðæt ɪz ðə fˈʌniəst θˈɪŋ aɪ hæv hˈɜːd ɔːl wˈiːk", "amused"},
    {"Please put the box on the table.", "please put the box on the table", "pliːz pʊt ðə bˈɑːks ɑːn ðə tˈeɪbəl",
     "neutral"},
    {"Ugh, this soup smells awful.", "ugh this soup smell awful", "ʌɡ ðɪs sˈuːp smˈɛlz ˈɔːfəl", "disgusted"},
    {"I could sleep for a whole day.", "I could sleep for the whole day", "aɪ kʊd slˈiːp fɔːɹ ə hˈoʊl dˈeɪ",
     "sleepy"},
    {"The meeting starts at noon.", "the meeting starts at noon", "ðə mˈiːɾɪŋ stˈɑːɹts æt nˈuːn", "neutral"},
    {"Stop touching my things!", "stop touching my thing", "stˈɑːp tˈʌtʃɪŋ maɪ θˈɪŋz", "angry"},
    {"What a lovely surprise.", "what a lovely surprise", "wˌʌɾə lˈʌvli sɚpɹˈaɪz", "amused"},
}};

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    // Stored as f32, so generate f32-exact values.
    for (double& x : m.values()) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return m;
}

Audio tone(Rng& rng, int sample_rate, std::size_t samples, double f0, double noise) {
    Audio a{sample_rate, std::vector<double>(samples)};
    for (std::size_t n = 0; n < samples; ++n) {
        const double t = static_cast<double>(n) / sample_rate;
        double v = 0.0;
        for (int h = 1; h <= 4; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t) / (h * 2.0);
        a.samples[n] = 0.5 * v + noise * rng.uniform(-1.0, 1.0);
    }
    return a;
}

} // namespace

std::filesystem::path write_fixtures(const std::filesystem::path& dir, const FixtureSpec& spec) {
    if (spec.utterances == 0 || spec.utterances > kLines.size()) {
        throw ValidationError("fixture utterance count must be in 1.." + std::to_string(kLines.size()));
    }
    if (spec.d_sem == 0 || spec.d_model == 0) throw ValidationError("fixture widths must be positive");
    std::filesystem::create_directories(dir / "hs");
    std::filesystem::create_directories(dir / "audio");
    std::filesystem::create_directories(dir / "acoustic");

    Rng rng(spec.seed);
    std::vector<UtteranceRecord> records;
    for (std::size_t i = 0; i < spec.utterances; ++i) {
        const Line& line = kLines[i];
        UtteranceRecord rec;
        char id[32];
        std::snprintf(id, sizeof(id), "utt%03zu", i + 1);
        rec.utt_id = id;
        rec.transcript = line.text;
        rec.phonemes = line.phonemes;

        auto dump = [&](const std::string& suffix, std::size_t rows, std::size_t cols, const std::string& sub) {
            const std::string rel = sub + "/" + rec.utt_id + "_" + suffix + ".npy";
            write_array(random_matrix(rng, rows, cols), dir / rel);
            return rel;
        };
        rec.hs_text_path = dump("text", 4 + i, spec.d_sem, "hs");
        rec.hs_phoneme_path = dump("pho", 6 + 2 * i, spec.d_sem, "hs");
        rec.hs_eis_e_path = dump("eis_e", 1 + i % 2, spec.d_sem, "hs");
        rec.hs_eis_i_path = dump("eis_i", 1, spec.d_sem, "hs");
        rec.hs_eis_s_path = dump("eis_s", 2, spec.d_sem, "hs");
        rec.hs_eis_sentence_path = dump("eis_sentence", 3 + i, spec.d_sem, "hs");

        const std::size_t samples = static_cast<std::size_t>(spec.sample_rate) / 4 + 512 * i;
        const double f0 = 110.0 + 20.0 * static_cast<double>(i);
        const std::string ref_audio = "audio/" + rec.utt_id + ".wav";
        const std::string hyp_audio = "audio/" + rec.utt_id + "_hyp.wav";
        write_wav(tone(rng, spec.sample_rate, samples, f0, 0.0), dir / ref_audio);
        write_wav(tone(rng, spec.sample_rate, samples + 768, f0 * 1.03, 0.01), dir / hyp_audio);
        rec.audio_path = ref_audio;

        rec.emotion_annotated = line.emotion;
        rec.emotion_predicted = (i % 4 == 3) ? std::string("neutral") : normalize_label(line.emotion);

        rec.set_extra("speaker", i == 2 ? "sam" : "bea");
        rec.set_extra("duration", static_cast<double>(samples) / spec.sample_rate);
        rec.set_extra("hyp_transcript", line.heard);
        rec.set_extra("hyp_audio_path", hyp_audio);
        rec.set_extra("acoustic_path", dump("acoustic", 5 + i, spec.d_model, "acoustic"));
        records.push_back(std::move(rec));
    }
    const auto manifest = dir / "manifest.jsonl";
    write_manifest(records, manifest);
    return manifest;
}

} // namespace semtts
