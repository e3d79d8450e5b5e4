// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "semtts/cli.hpp"
#include "semtts/fusion.hpp"
#include "semtts/metrics.hpp"
#include "semtts/random.hpp"
#include "semtts/selfcheck.hpp"
#include "semtts/tensor_io.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace semtts;

namespace {

constexpr std::uint64_t kSeed = 20240607;

struct Outcome {
    bool passed = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome from_suite(const selfcheck::SuiteResult& r) {
    return {r.passed, selfcheck::format_result(r)};
}

Outcome merge(Outcome a, const Outcome& b) {
    a.passed = a.passed && b.passed;
    a.detail += "; " + b.detail;
    return a;
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    auto out = from_suite(selfcheck::gradient_suite(kSeed, 100));
    const double secs = seconds_since(t0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "runtime %.2fs (limit 10s)", secs);
    return merge(out, {secs < 10.0, buf});
}

Outcome attention_invariants() { return from_suite(selfcheck::attention_suite(kSeed, 100)); }

Outcome global_add_identity() {
    Outcome out{true, "t in {1, 2, 17}, d = 8"};
    Rng rng(kSeed);
    const auto w = ProjectionMatrix::seeded(8, 16, kSeed);
    const auto zero = project(w, std::vector<double>(16, 0.0));
    for (std::size_t t : {1u, 2u, 17u}) {
        const auto acoustic = semtts::testing::random_matrix(rng, t, 8, -3.0, 3.0);
        if (!(fuse_global(acoustic, zero).matrix == acoustic)) {
            out.passed = false;
            out.detail += "; zero token changed the input at t=" + std::to_string(t);
        }
        const std::vector<double> token{1, -2, 3, -4, 5, -6, 7, -8};
        const auto fused = fuse_global(acoustic, token).matrix;
        for (std::size_t i = 0; i < t; ++i) {
            for (std::size_t c = 0; c < 8; ++c) {
                if (fused(i, c) != acoustic(i, c) + token[c]) {
                    out.passed = false;
                    out.detail += "; broadcast mismatch at t=" + std::to_string(t);
                    i = t;
                    break;
                }
            }
        }
    }
    return out;
}

Outcome pca_oracle() { return from_suite(selfcheck::pca_suite(kSeed, 50)); }

Outcome eis_equivalence() { return from_suite(selfcheck::eis_suite(kSeed, 20)); }

Outcome edit_distance() {
    auto out = from_suite(selfcheck::edit_distance_suite());
    const double w = wer("hello world", "hello word");
    return merge(out, {w == 0.5, "WER(hello world, hello word) = " + std::to_string(w)});
}

Outcome mcd_anchor() {
    auto out = from_suite(selfcheck::mcd_suite(kSeed, 50));
    MelCepstra a, b;
    a.coeffs = Matrix(1, 13, 0.0);
    b.coeffs = Matrix(1, 13, 0.0);
    b.coeffs(0, 4) = 1.0;
    a.order = b.order = 12;
    const double got = mcd(a, b);
    char buf[96];
    std::snprintf(buf, sizeof buf, "anchor %.7f dB vs 6.141851", got);
    return merge(out, {std::abs(got - 6.141851) <= 1e-5, buf});
}

Outcome file_roundtrip() {
    auto out = from_suite(selfcheck::roundtrip_suite(kSeed, 1000));
    semtts::testing::TempDir dir("semtts-accept");
    Rng rng(kSeed);
    const auto m = semtts::testing::random_matrix(rng, 7, 5);
    write_array(m, dir / "a.npy");
    write_array(m, dir / "b.npy");
    const bool same = semtts::testing::slurp(dir / "a.npy") == semtts::testing::slurp(dir / "b.npy");
    out = merge(out, {same, same ? "repeated writes byte-identical" : "repeated writes differ"});
    const std::vector<double> sample{6.71, 7.93, 7.32};
    const auto s = mean_std(sample);
    const auto text = format_mean_std(s);
    const auto anchor = format_mean_std({7.32, 0.61, 1});
    const bool shaped = anchor == "7.32 ± 0.61" && text.find(" ± ") != std::string::npos;
    return merge(out, {shaped, "formatter \"" + anchor + "\", sample \"" + text + "\""});
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::string& log) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    log += err.str();
    return code;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = semtts::testing::slurp(e.path());
    }
    return files;
}

bool pipeline(const fs::path& root, std::string& log) {
    const auto data = (root / "data").string();
    bool ok = run_cli({"fixtures", "--out-dir", data, "--utterances", "5", "--d-sem", "16", "--d-model", "8", "--seed",
                       "7"},
                      log) == 0;
    const auto manifest = data + "/manifest.jsonl";
    for (const std::string s : {"ave", "pca", "last", "eis-word", "eis-sentence", "tex", "pho"}) {
        const auto tok = (root / ("tok-" + s)).string();
        ok = run_cli({"extract", "--manifest", manifest, "--out-dir", tok, "--strategy", s, "--seed", "7"}, log) == 0 && ok;
        const bool seq = s == "tex" || s == "pho";
        ok = run_cli({"fuse", "--manifest", tok + "/manifest.jsonl", "--out-dir", (root / ("fused-" + s)).string(),
                      "--strategy", s, "--mode", seq ? "att" : "add", "--seed", "7"},
                     log) == 0 &&
             ok;
    }
    ok = run_cli({"fuse", "--manifest", (root / "tok-tex/manifest.jsonl").string(), "--out-dir",
                  (root / "fused-tex-train").string(), "--strategy", "tex", "--mode", "att", "--train", "--seed", "7"},
                 log) == 0 &&
         ok;
    ok = run_cli({"eval", "--manifest", manifest, "--out-dir", (root / "eval").string()}, log) == 0 && ok;
    return ok;
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    semtts::testing::TempDir first("semtts-e2e"), second("semtts-e2e");
    std::string log;
    const bool ok1 = pipeline(first.path(), log);
    const bool ok2 = pipeline(second.path(), log);
    const double secs = seconds_since(t0) / 2.0;
    Outcome out{ok1 && ok2, ok1 && ok2 ? "all stages exit 0" : "stage failure: " + log};
    const auto a = snapshot(first.path()), b = snapshot(second.path());
    std::size_t npy = 0;
    for (const auto& [name, bytes] : a)
        if (name.ends_with(".npy")) ++npy;
    const bool identical = a == b && !a.empty();
    out = merge(out, {identical, std::to_string(a.size()) + " files (" + std::to_string(npy) + " arrays), rerun " +
                                     (identical ? "bitwise identical" : "DIFFERS")});
    char buf[64];
    std::snprintf(buf, sizeof buf, "runtime %.2fs per run (limit 30s)", secs);
    return merge(out, {secs < 30.0, buf});
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"fusion gradient vs finite differences", gradient_check},
        {"attention invariants", attention_invariants},
        {"global-add identity and broadcast", global_add_identity},
        {"pca vs dense eigensolver", pca_oracle},
        {"eis word pooling equivalence", eis_equivalence},
        {"edit distance vs exhaustive search", edit_distance},
        {"mcd anchor, identity, dtw optimality", mcd_anchor},
        {"array round trip and summary format", file_roundtrip},
        {"end-to-end fixture pipeline", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.passed) ++failed;
        std::printf("[%s] %zu. %s -- %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s: %zu/%zu criteria passed\n", failed ? "FAILED" : "OK", criteria.size() - failed, criteria.size());
    return failed ? 1 : 0;
}
