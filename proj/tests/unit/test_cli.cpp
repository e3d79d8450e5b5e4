#include "semtts/cli.hpp"
#include "semtts/fixtures.hpp"
#include "semtts/manifest.hpp"
#include "semtts/tensor_io.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace semtts;
using semtts::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code;
    std::string out, err;
};

Invocation invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("extract, fuse and eval on the fixture corpus") {
    TempDir dir;
    const auto data = (dir / "data").string();
    REQUIRE(invoke({"fixtures", "--out-dir", data}).code == 0);
    const auto manifest = data + "/manifest.jsonl";

    for (const std::string s : {"ave", "pca", "last", "eis-word", "eis-sentence", "tex", "pho"}) {
        const auto tok = (dir / ("tok-" + s)).string();
        const auto r = invoke({"extract", "--manifest", manifest, "--out-dir", tok, "--strategy", s});
        INFO(s, " ", r.err);
        CHECK(r.code == 0);
        const auto recs = read_manifest(tok + "/manifest.jsonl");
        REQUIRE(recs.size() == 5);
        const auto key = "token_" + std::string(s == "eis-word" ? "eis_word" : s == "eis-sentence" ? "eis_sentence" : s) + "_path";
        const auto token = read_array(resolve_path(tok, *recs[0].extra_string(key)));
        if (s == "tex" || s == "pho") {
            CHECK(token.rows() > 1);
        } else {
            CHECK(token.rows() == 1);
        }
        CHECK(token.cols() == 16);

        const auto fused_dir = (dir / ("fused-" + s)).string();
        const bool seq = s == "tex" || s == "pho";
        const auto f = invoke({"fuse", "--manifest", tok + "/manifest.jsonl", "--out-dir", fused_dir, "--strategy", s,
                               "--mode", seq ? "att" : "add"});
        INFO(f.err);
        CHECK(f.code == 0);
        const auto frecs = read_manifest(fused_dir + "/manifest.jsonl");
        const auto fused = read_array(resolve_path(fused_dir, *frecs[2].extra_string("fused_path")));
        const auto acoustic = read_array(resolve_path(fused_dir, *frecs[2].extra_string("acoustic_path")));
        CHECK(fused.rows() == acoustic.rows());
        CHECK(fused.cols() == 8);
        CHECK(frecs[2].extra_string("attention_path").has_value() == seq);
    }

    const auto report_dir = (dir / "report").string();
    const auto e = invoke({"eval", "--manifest", manifest, "--out-dir", report_dir});
    INFO(e.err);
    CHECK(e.code == 0);
    const auto rows = lines_of(semtts::testing::slurp(report_dir + "/report.jsonl"));
    REQUIRE(rows.size() == 6);
    const auto summary = nlohmann::json::parse(rows.back());
    CHECK(summary["summary"] == true);
    CHECK(summary["count"] == 5);
    CHECK(summary["mcd_db"].get<std::string>().find(" ± ") != std::string::npos);
    const auto first = nlohmann::json::parse(rows.front());
    CHECK(first["mcd"].get<double>() > 0.0);
}

TEST_CASE("a failing row is reported and the rest still written") {
    TempDir dir;
    write_array(Matrix::from_rows({{1, 2, 3}}), dir / "one.npy");
    write_array(Matrix::from_rows({{1, 2, 3}, {0, 1, 5}}), dir / "two.npy");
    UtteranceRecord a, b;
    a.utt_id = "a";
    a.transcript = "x";
    a.hs_text_path = "one.npy";
    b.utt_id = "b";
    b.transcript = "y";
    b.hs_text_path = "two.npy";
    write_manifest({a, b}, dir / "in.jsonl");
    const auto r = invoke({"extract", "--manifest", (dir / "in.jsonl").string(), "--out-dir", (dir / "out").string(),
                           "--strategy", "pca"});
    CHECK(r.code == 1);
    CHECK(r.err.find("a: ") != std::string::npos);
    const auto recs = read_manifest(dir / "out" / "manifest.jsonl");
    REQUIRE(recs.size() == 2);
    CHECK_FALSE(recs[0].extra_string("token_pca_path"));
    CHECK(recs[1].extra_string("token_pca_path") == "b.pca.npy");
}

TEST_CASE("additive fusion with a zero token reproduces the acoustic array") {
    TempDir dir;
    const Matrix acoustic = Matrix::from_rows({{0.5, -1.25}, {3, 0.125}, {7, 8}});
    write_array(acoustic, dir / "ac.npy");
    write_array(Matrix(1, 3), dir / "tok.npy");
    write_array(Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}), dir / "w.npy");
    UtteranceRecord r;
    r.utt_id = "z";
    r.transcript = "t";
    r.set_extra("acoustic_path", "ac.npy");
    r.set_extra("token_ave_path", "tok.npy");
    write_manifest({r}, dir / "in.jsonl");
    const auto res = invoke({"fuse", "--manifest", (dir / "in.jsonl").string(), "--out-dir", (dir / "out").string(),
                             "--strategy", "ave", "--mode", "add", "--projection", (dir / "w.npy").string()});
    INFO(res.err);
    REQUIRE(res.code == 0);
    CHECK(semtts::testing::slurp(dir / "out" / "z.fused.npy") == semtts::testing::slurp(dir / "ac.npy"));
}

TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"nonsense"}).code == 2);
    CHECK(invoke({"extract", "--manifest", "x.jsonl"}).code == 2);
    CHECK(invoke({"extract", "--manifest", "x", "--out-dir", "y", "--strategy", "median"}).code == 2);
    CHECK(invoke({"fuse", "--manifest", "x", "--out-dir", "y", "--strategy", "ave", "--mode", "att"}).code == 2);
    CHECK(invoke({"fuse", "--manifest", "x", "--out-dir", "y", "--strategy", "tex", "--mode", "att", "--dropout", "1.5"})
              .code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("the input manifest is never overwritten") {
    TempDir dir;
    REQUIRE(invoke({"fixtures", "--out-dir", dir.path().string(), "--utterances", "3"}).code == 0);
    const auto before = semtts::testing::slurp(dir / "manifest.jsonl");
    const auto r = invoke({"extract", "--manifest", (dir / "manifest.jsonl").string(), "--out-dir", dir.path().string(),
                           "--strategy", "ave"});
    CHECK(r.code == 2);
    CHECK(semtts::testing::slurp(dir / "manifest.jsonl") == before);
}

TEST_CASE("prompt and filter subcommands") {
    TempDir dir;
    const auto data = (dir / "data").string();
    REQUIRE(invoke({"fixtures", "--out-dir", data}).code == 0);
    const auto manifest = data + "/manifest.jsonl";

    const auto p = invoke({"prompt", "--manifest", manifest, "--out-dir", (dir / "p").string(), "--kind", "emotion",
                           "--labels", "calm,tense"});
    CHECK(p.code == 0);
    const auto prompts = lines_of(semtts::testing::slurp(dir / "p" / "prompts.jsonl"));
    REQUIRE(prompts.size() == 5);
    CHECK(nlohmann::json::parse(prompts[0])["prompt"].get<std::string>().find("calm, tense") != std::string::npos);

    const auto f = invoke({"filter", "--manifest", manifest, "--out-dir", (dir / "f").string(), "--agreement"});
    CHECK(f.code == 0);
    CHECK(read_manifest(dir / "f" / "filtered.jsonl").size() == 4);
    const auto n = read_manifest(dir / "f" / "train.jsonl").size() + read_manifest(dir / "f" / "dev.jsonl").size() +
                   read_manifest(dir / "f" / "test.jsonl").size();
    CHECK(n == 4);

    const auto s = invoke({"filter", "--manifest", manifest, "--out-dir", (dir / "s").string(), "--speaker", "sam",
                           "--no-split"});
    CHECK(s.code == 0);
    const auto kept = read_manifest(dir / "s" / "filtered.jsonl");
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].utt_id == "utt003");
    CHECK(invoke({"filter", "--manifest", manifest, "--out-dir", (dir / "x").string(), "--fractions", "0.5,0.5"}).code == 2);
}

}
