#include "semtts/manifest.hpp"
#include "semtts/audio.hpp"
#include "semtts/tensor_io.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace semtts;
using semtts::testing::TempDir;

TEST_SUITE("manifest") {

TEST_CASE("empty text gives no records") {
    CHECK(parse_manifest("").empty());
    CHECK(parse_manifest("\n\n").empty());
}

TEST_CASE("two records round-trip in order") {
    TempDir dir;
    UtteranceRecord a;
    a.utt_id = "b2";
    a.transcript = "second first";
    a.hs_text_path = "hs/b2.npy";
    UtteranceRecord b;
    b.utt_id = "a1";
    b.transcript = "Hello.";
    b.emotion_annotated = "angry";
    write_manifest({a, b}, dir / "m.jsonl");
    const auto back = read_manifest(dir / "m.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
}

TEST_CASE("unknown fields survive byte-for-byte") {
    const std::string line =
        R"({"utt_id":"u1","transcript":"hi","audio_path":"a.wav","speaker":"bea","scores":[1,2.5,{"x":null}],"note":"ünï"})";
    const auto records = parse_manifest(line + "\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].extra_string("speaker") == "bea");
    CHECK(format_manifest(records) == line + "\n");
}

TEST_CASE("duplicate ids and malformed lines report their line number") {
    try {
        parse_manifest("{\"utt_id\":\"x\",\"transcript\":\"\"}\n\n{\"utt_id\":\"x\",\"transcript\":\"\"}\n");
        FAIL("expected duplicate error");
    } catch (const ManifestError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse_manifest("{\"utt_id\":\"x\",\"transcript\":\"\"}\n{oops\n");
        FAIL("expected malformed error");
    } catch (const ManifestError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_manifest("{\"transcript\":\"no id\"}\n"), ManifestError);
    CHECK_THROWS_AS(parse_manifest("[1,2]\n"), ManifestError);
}

TEST_CASE("path rebasing keeps relative paths valid") {
    UtteranceRecord r;
    r.utt_id = "u";
    r.hs_text_path = "hs/u.npy";
    r.set_extra("acoustic_path", "ac/u.npy");
    r.set_extra("other", "hs/u.npy");
    const auto moved = rebase_paths(r, "/data/corpus", "/data/corpus/out");
    CHECK(moved.hs_text_path == "../hs/u.npy");
    CHECK(moved.extra_string("acoustic_path") == "../ac/u.npy");
    CHECK(moved.extra_string("other") == "hs/u.npy");
    r.audio_path = "/abs/a.wav";
    CHECK(rebase_paths(r, "/x", "/y").audio_path == "/abs/a.wav");
}

TEST_CASE("validation flags unparseable files") {
    TempDir dir;
    write_array(Matrix(2, 2, 1.0), dir / "ok.npy");
    semtts::testing::spit(dir / "bad.npy", "garbage");
    write_wav(Audio{16000, std::vector<double>(100, 0.0)}, dir / "ok.wav");
    UtteranceRecord r;
    r.utt_id = "u";
    r.hs_text_path = "ok.npy";
    r.hs_phoneme_path = "bad.npy";
    r.audio_path = "ok.wav";
    const auto problems = validate_manifest({r}, dir.path());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("hs_phoneme_path") != std::string::npos);
}

}
