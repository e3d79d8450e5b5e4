#include "semtts/cli.hpp"

#include "semtts/dataset_filter.hpp"
#include "semtts/fixtures.hpp"
#include "semtts/fusion.hpp"
#include "semtts/manifest.hpp"
#include "semtts/metrics.hpp"
#include "semtts/prompts.hpp"
#include "semtts/random.hpp"
#include "semtts/selfcheck.hpp"
#include "semtts/strategies.hpp"
#include "semtts/tensor_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace semtts::cli {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string manifest;
    std::string out_dir;
    std::string strategy;
    std::string mode = "add";
    std::string projection;
    std::optional<double> gamma;
    double dropout = 0.1;
    bool train = false;
    double mask_fill = -6e4;
    std::uint64_t seed = 0;
    bool dtw = true;
    bool skip_c0 = true;
    std::size_t order = 12;
    std::size_t n_mels = 80;
    std::size_t window = 1024;
    std::size_t shift = 256;
    std::string kind = "eis-word";
    std::string template_path;
    std::string labels;
    std::string speaker;
    bool agreement = false;
    std::string fractions = "0.8,0.1,0.1";
    bool by_duration = false;
    bool no_split = false;
    FixtureSpec fixtures;
};

std::string token_key(const std::string& strategy) {
    std::string key = "token_" + strategy + "_path";
    for (char& c : key)
        if (c == '-') c = '_';
    return key;
}

std::string file_stem(const std::string& utt_id) {
    std::string s = utt_id;
    for (char& c : s) {
        if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
    }
    return s;
}

fs::path manifest_dir(const std::string& manifest) {
    auto p = fs::absolute(fs::path(manifest)).parent_path();
    return p;
}

void prepare_out_dir(const RunConfig& cfg, const fs::path& out_manifest) {
    if (cfg.out_dir.empty()) throw UsageError("--out-dir is required");
    fs::create_directories(cfg.out_dir);
    if (!cfg.manifest.empty() && fs::exists(out_manifest) &&
        fs::equivalent(fs::path(cfg.manifest), out_manifest)) {
        throw UsageError("output manifest would overwrite the input manifest");
    }
}

std::vector<UtteranceRecord> load_input(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw UsageError("--manifest is required");
    return read_manifest(cfg.manifest);
}

Matrix load_field(const UtteranceRecord& rec, const std::optional<std::string>& value, const char* field,
                  const fs::path& base) {
    if (!value) throw Error(std::string("missing ") + field);
    return read_array(resolve_path(base, *value));
}

Matrix load_extra(const UtteranceRecord& rec, const std::string& key, const fs::path& base) {
    return load_field(rec, rec.extra_string(key), key.c_str(), base);
}

std::string shape_of(const Matrix& m) { return "(" + std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + ")"; }

// ---------------------------------------------------------------------------

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto global = parse_global_strategy(cfg.strategy);
    const auto seq = parse_sequence_kind(cfg.strategy);
    if (!global && !seq) throw UsageError("unknown strategy '" + cfg.strategy + "'");
    const fs::path out_dir(cfg.out_dir);
    const fs::path out_manifest = out_dir / "manifest.jsonl";
    prepare_out_dir(cfg, out_manifest);
    auto records = load_input(cfg);
    const fs::path base = manifest_dir(cfg.manifest);

    std::size_t failures = 0;
    std::vector<UtteranceRecord> output;
    for (const auto& rec : records) {
        UtteranceRecord next = rebase_paths(rec, base, out_dir);
        try {
            Matrix result;
            if (global) {
                GlobalToken token;
                switch (*global) {
                case GlobalStrategy::ave: token = extract_ave(load_field(rec, rec.hs_text_path, "hs_text_path", base)); break;
                case GlobalStrategy::pca: token = extract_pca(load_field(rec, rec.hs_text_path, "hs_text_path", base)); break;
                case GlobalStrategy::last: token = extract_last(load_field(rec, rec.hs_text_path, "hs_text_path", base)); break;
                case GlobalStrategy::eis_word:
                    token = extract_eis_word(load_field(rec, rec.hs_eis_e_path, "hs_eis_e_path", base),
                                             load_field(rec, rec.hs_eis_i_path, "hs_eis_i_path", base),
                                             load_field(rec, rec.hs_eis_s_path, "hs_eis_s_path", base));
                    break;
                case GlobalStrategy::eis_sentence:
                    token = extract_eis_sentence(load_field(rec, rec.hs_eis_sentence_path, "hs_eis_sentence_path", base));
                    break;
                }
                result = Matrix(1, token.vector.size(), token.vector);
            } else {
                const auto h = *seq == SequenceKind::tex ? load_field(rec, rec.hs_text_path, "hs_text_path", base)
                                                          : load_field(rec, rec.hs_phoneme_path, "hs_phoneme_path", base);
                result = make_sequence(h, *seq).matrix;
            }
            const std::string name = file_stem(rec.utt_id) + "." + cfg.strategy + ".npy";
            write_array(result, out_dir / name);
            next.set_extra(token_key(cfg.strategy), name);
        } catch (const std::exception& e) {
            ++failures;
            err << rec.utt_id << ": " << e.what() << '\n';
        }
        output.push_back(std::move(next));
    }
    write_manifest(output, out_manifest);
    out << "extract " << cfg.strategy << ": " << records.size() - failures << " ok, " << failures << " failed -> "
        << out_manifest.string() << '\n';
    return failures ? row_failures : ok;
}

int cmd_fuse(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.mode != "add" && cfg.mode != "att") throw UsageError("--mode must be add or att");
    const bool attention = cfg.mode == "att";
    const auto global = parse_global_strategy(cfg.strategy);
    const auto seq = parse_sequence_kind(cfg.strategy);
    if (!global && !seq) throw UsageError("unknown strategy '" + cfg.strategy + "'");
    if (attention && !seq) throw UsageError("--mode att fuses sequential tokens (tex or pho)");
    if (!attention && !global) throw UsageError("--mode add fuses global tokens (ave, pca, last, eis-word, eis-sentence)");

    FusionConfig fcfg;
    fcfg.gamma = cfg.gamma;
    fcfg.mask_fill = cfg.mask_fill;
    fcfg.dropout_p = cfg.dropout;
    fcfg.train_mode = cfg.train;
    try {
        fcfg.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }

    const fs::path out_dir(cfg.out_dir);
    const fs::path out_manifest = out_dir / "manifest.jsonl";
    prepare_out_dir(cfg, out_manifest);
    auto records = load_input(cfg);
    const fs::path base = manifest_dir(cfg.manifest);

    std::optional<ProjectionMatrix> loaded;
    if (!cfg.projection.empty()) loaded = ProjectionMatrix{read_array(cfg.projection)};
    std::map<std::pair<std::size_t, std::size_t>, ProjectionMatrix> seeded;
    auto projection_for = [&](std::size_t d_out, std::size_t d_in) -> const ProjectionMatrix& {
        if (loaded) return *loaded;
        auto key = std::make_pair(d_out, d_in);
        auto it = seeded.find(key);
        if (it == seeded.end()) it = seeded.emplace(key, ProjectionMatrix::seeded(d_out, d_in, cfg.seed)).first;
        return it->second;
    };

    std::size_t failures = 0;
    std::vector<UtteranceRecord> output;
    for (const auto& rec : records) {
        UtteranceRecord next = rebase_paths(rec, base, out_dir);
        try {
            const Matrix acoustic = load_extra(rec, "acoustic_path", base);
            const Matrix token = load_extra(rec, token_key(cfg.strategy), base);
            const auto& w = projection_for(acoustic.cols(), token.cols());
            if (w.d_in() != token.cols() || w.d_out() != acoustic.cols()) {
                throw ShapeError("projection " + shape_of(w.w) + " cannot map token " + shape_of(token) +
                                 " onto acoustic " + shape_of(acoustic));
            }
            const std::string stem = file_stem(rec.utt_id);
            if (!attention) {
                if (token.rows() != 1) throw ShapeError("global token must be one row, got " + shape_of(token));
                const auto projected = project(w, token.row(0));
                const auto fused = fuse_global(acoustic, projected);
                write_array(fused.matrix, out_dir / (stem + ".fused.npy"));
                next.set_extra("fused_path", stem + ".fused.npy");
            } else {
                const Matrix kv = project(w, token);
                FusionConfig row_cfg = fcfg;
                row_cfg.rng_seed = mix_seed(cfg.seed, fnv1a(rec.utt_id));
                std::optional<std::size_t> t_valid, m_valid;
                if (auto v = rec.extra_number("acoustic_len")) t_valid = static_cast<std::size_t>(*v);
                if (auto v = rec.extra_number("token_len")) m_valid = static_cast<std::size_t>(*v);
                const auto masks = MaskPair::from_lengths(t_valid, acoustic.rows(), m_valid, kv.rows());
                const auto fused = fuse_sequential(acoustic, kv, row_cfg, masks);
                write_array(fused.matrix, out_dir / (stem + ".fused.npy"));
                write_array(*fused.attention, out_dir / (stem + ".attn.npy"));
                next.set_extra("fused_path", stem + ".fused.npy");
                next.set_extra("attention_path", stem + ".attn.npy");
            }
        } catch (const std::exception& e) {
            ++failures;
            err << rec.utt_id << ": " << e.what() << '\n';
        }
        output.push_back(std::move(next));
    }
    write_manifest(output, out_manifest);
    out << "fuse " << cfg.mode << " " << cfg.strategy << ": " << records.size() - failures << " ok, " << failures
        << " failed -> " << out_manifest.string() << '\n';
    return failures ? row_failures : ok;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path out_dir(cfg.out_dir);
    const fs::path report_path = out_dir / "report.jsonl";
    prepare_out_dir(cfg, report_path);
    auto records = load_input(cfg);
    const fs::path base = manifest_dir(cfg.manifest);

    MelConfig mel;
    mel.order = cfg.order;
    mel.n_mels = cfg.n_mels;
    mel.window = cfg.window;
    mel.shift = cfg.shift;
    const McdOptions mopts{cfg.dtw, cfg.skip_c0};

    using json = nlohmann::ordered_json;
    std::string lines;
    std::vector<double> mcds, cers, wers;
    std::size_t failures = 0;
    for (const auto& rec : records) {
        try {
            if (!rec.audio_path) throw Error("missing audio_path");
            const auto hyp_audio = rec.extra_string("hyp_audio_path");
            if (!hyp_audio) throw Error("missing hyp_audio_path");
            const auto hyp_text = rec.extra_string("hyp_transcript");
            if (!hyp_text) throw Error("missing hyp_transcript");
            const auto ref = mel_cepstra_from_audio(read_wav(resolve_path(base, *rec.audio_path)), mel);
            const auto hyp = mel_cepstra_from_audio(read_wav(resolve_path(base, *hyp_audio)), mel);
            const double d = mcd(ref, hyp, mopts);
            const double c = cer(rec.transcript, *hyp_text);
            const double w = wer(rec.transcript, *hyp_text);
            mcds.push_back(d);
            cers.push_back(c);
            wers.push_back(w);
            json row = json::object();
            row["utt_id"] = rec.utt_id;
            row["mcd"] = d;
            row["cer"] = c;
            row["wer"] = w;
            lines += row.dump() + '\n';
        } catch (const std::exception& e) {
            ++failures;
            err << rec.utt_id << ": " << e.what() << '\n';
        }
    }

    auto percent = [](std::vector<double> v) {
        for (double& x : v) x *= 100.0;
        return v;
    };
    const auto s_mcd = mean_std(mcds), s_cer = mean_std(percent(cers)), s_wer = mean_std(percent(wers));
    json summary = json::object();
    summary["summary"] = true;
    summary["count"] = mcds.size();
    summary["skipped"] = failures;
    summary["mcd_db"] = format_mean_std(s_mcd);
    summary["cer_pct"] = format_mean_std(s_cer);
    summary["wer_pct"] = format_mean_std(s_wer);
    lines += summary.dump() + '\n';

    std::ofstream report(report_path, std::ios::binary | std::ios::trunc);
    if (!report) throw IoError("cannot write " + report_path.string());
    report << lines;

    out << "MCD " << format_mean_std(s_mcd) << " dB | CER " << format_mean_std(s_cer) << " % | WER "
        << format_mean_std(s_wer) << " % (n=" << mcds.size() << ")\n";
    if (failures) out << "skipped " << failures << " utterance(s) with errors; summary covers the rest\n";
    out << "report -> " << report_path.string() << '\n';
    return failures ? row_failures : ok;
}

int cmd_prompt(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    PromptKind kind;
    if (cfg.kind == "eis-word") kind = PromptKind::eis_word;
    else if (cfg.kind == "eis-sentence") kind = PromptKind::eis_sentence;
    else if (cfg.kind == "emotion") kind = PromptKind::emotion_label;
    else throw UsageError("--kind must be eis-word, eis-sentence or emotion");

    const PromptTemplate tpl = cfg.template_path.empty() ? PromptTemplate::builtin(kind) : load_template(cfg.template_path, kind);
    std::vector<std::string> labels = default_emotion_labels();
    if (!cfg.labels.empty()) {
        labels.clear();
        std::stringstream ss(cfg.labels);
        for (std::string item; std::getline(ss, item, ',');) labels.push_back(item);
    }

    const fs::path out_dir(cfg.out_dir);
    const fs::path path = out_dir / "prompts.jsonl";
    prepare_out_dir(cfg, path);
    const auto records = load_input(cfg);

    using json = nlohmann::ordered_json;
    std::string lines;
    std::size_t failures = 0;
    for (const auto& rec : records) {
        try {
            std::string prompt;
            switch (kind) {
            case PromptKind::eis_word: prompt = build_eis_word_prompt(rec.transcript, tpl); break;
            case PromptKind::eis_sentence: prompt = build_eis_sentence_prompt(rec.transcript, tpl); break;
            case PromptKind::emotion_label: prompt = build_emotion_label_prompt(rec.transcript, labels, tpl); break;
            }
            json row = json::object();
            row["utt_id"] = rec.utt_id;
            row["kind"] = cfg.kind;
            row["prompt"] = prompt;
            lines += row.dump() + '\n';
        } catch (const std::exception& e) {
            ++failures;
            err << rec.utt_id << ": " << e.what() << '\n';
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + path.string());
    file << lines;
    out << "prompt " << cfg.kind << ": " << records.size() - failures << " ok, " << failures << " failed -> "
        << path.string() << '\n';
    return failures ? row_failures : ok;
}

int cmd_filter(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SplitSpec spec;
    spec.seed = cfg.seed;
    spec.by_duration = cfg.by_duration;
    {
        std::vector<double> f;
        std::stringstream ss(cfg.fractions);
        for (std::string item; std::getline(ss, item, ',');) {
            try {
                f.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw UsageError("bad --fractions entry '" + item + "'");
            }
        }
        if (f.size() != 3) throw UsageError("--fractions takes three comma-separated values");
        spec.train_fraction = f[0];
        spec.dev_fraction = f[1];
        spec.test_fraction = f[2];
        try {
            spec.validate();
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
    }

    const fs::path out_dir(cfg.out_dir);
    prepare_out_dir(cfg, out_dir / "filtered.jsonl");
    auto records = load_input(cfg);
    const fs::path base = manifest_dir(cfg.manifest);
    const std::size_t total = records.size();

    if (!cfg.speaker.empty()) {
        auto r = filter_by_speaker(records, cfg.speaker);
        if (r.dropped_missing) err << "warning: " << r.dropped_missing << " record(s) without a speaker field\n";
        if (r.kept.empty()) err << "warning: no records for speaker '" << cfg.speaker << "'\n";
        records = std::move(r.kept);
    }
    if (cfg.agreement) {
        auto r = filter_by_emotion_agreement(records);
        if (r.dropped_missing) err << "warning: " << r.dropped_missing << " record(s) missing an emotion label\n";
        records = std::move(r.kept);
    }
    auto rebased = [&](const std::vector<UtteranceRecord>& in) {
        std::vector<UtteranceRecord> v;
        for (const auto& r : in) v.push_back(rebase_paths(r, base, out_dir));
        return v;
    };
    write_manifest(rebased(records), out_dir / "filtered.jsonl");
    out << "filter: kept " << records.size() << " of " << total << '\n';
    if (cfg.no_split) return ok;

    const auto parts = split(records, spec);
    write_manifest(rebased(parts.train), out_dir / "train.jsonl");
    write_manifest(rebased(parts.dev), out_dir / "dev.jsonl");
    write_manifest(rebased(parts.test), out_dir / "test.jsonl");
    out << "split: train " << parts.train.size() << ", dev " << parts.dev.size() << ", test " << parts.test.size()
        << '\n';
    return ok;
}

int cmd_selfcheck(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    bool all = true;
    for (const auto& r : selfcheck::run_all(cfg.seed)) {
        out << selfcheck::format_result(r) << '\n';
        all = all && r.passed;
    }
    out << (all ? "selfcheck: all suites passed" : "selfcheck: FAILED") << '\n';
    return all ? ok : row_failures;
}

int cmd_fixtures(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    if (cfg.out_dir.empty()) throw UsageError("--out-dir is required");
    FixtureSpec spec = cfg.fixtures;
    spec.seed = cfg.seed;
    const auto manifest = write_fixtures(cfg.out_dir, spec);
    out << "fixtures -> " << manifest.string() << '\n';
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Semantic token extraction, fusion and speech evaluation toolkit", "semtts"};
    app.require_subcommand(1);

    auto add_io = [&](CLI::App* sub) {
        sub->add_option("--manifest", cfg.manifest, "Input manifest (JSON lines)")->required();
        sub->add_option("--out-dir", cfg.out_dir, "Directory for outputs")->required();
    };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "Seed for all randomness"); };
    const std::vector<std::string> strategies{"ave", "pca", "last", "eis-word", "eis-sentence", "tex", "pho"};

    auto* extract = app.add_subcommand("extract", "Compute a semantic token per utterance");
    add_io(extract);
    add_seed(extract);
    extract->add_option("--strategy", cfg.strategy)->required()->check(CLI::IsMember(strategies));

    auto* fuse = app.add_subcommand("fuse", "Fuse semantic tokens into acoustic embeddings");
    add_io(fuse);
    add_seed(fuse);
    fuse->add_option("--strategy", cfg.strategy, "Which extracted token to fuse")
        ->required()
        ->check(CLI::IsMember(strategies));
    fuse->add_option("--mode", cfg.mode)->check(CLI::IsMember({"add", "att"}));
    fuse->add_option("--projection", cfg.projection, "d_model x d_sem projection array; seeded init when absent");
    fuse->add_option("--gamma", cfg.gamma, "Attention temperature (default sqrt(d))");
    fuse->add_option("--dropout", cfg.dropout, "Attention dropout rate in train mode");
    fuse->add_flag("--train", cfg.train, "Apply attention dropout");
    fuse->add_option("--mask-fill", cfg.mask_fill, "Score written at masked positions");

    auto* eval = app.add_subcommand("eval", "MCD and CER/WER against reference audio and text");
    add_io(eval);
    eval->add_flag("--dtw,!--no-dtw", cfg.dtw, "DTW-align frames before MCD (default on)");
    eval->add_flag("--skip-c0,!--with-c0", cfg.skip_c0, "Exclude c0 from MCD (default on)");
    eval->add_option("--order", cfg.order, "Cepstral order K");
    eval->add_option("--n-mels", cfg.n_mels);
    eval->add_option("--window", cfg.window);
    eval->add_option("--shift", cfg.shift);

    auto* prompt = app.add_subcommand("prompt", "Build EIS or emotion-label prompts");
    add_io(prompt);
    prompt->add_option("--kind", cfg.kind)->check(CLI::IsMember({"eis-word", "eis-sentence", "emotion"}));
    prompt->add_option("--template", cfg.template_path, "Template file with {transcript} / {labels}");
    prompt->add_option("--labels", cfg.labels, "Comma-separated emotion labels");

    auto* filter = app.add_subcommand("filter", "Speaker / emotion-agreement filtering and splitting");
    add_io(filter);
    add_seed(filter);
    filter->add_option("--speaker", cfg.speaker);
    filter->add_flag("--agreement", cfg.agreement, "Keep records whose annotated and predicted emotions agree");
    filter->add_option("--fractions", cfg.fractions, "train,dev,test fractions");
    filter->add_flag("--by-duration", cfg.by_duration, "Split by summed duration instead of count");
    filter->add_flag("--no-split", cfg.no_split);

    auto* check = app.add_subcommand("selfcheck", "Run the built-in verification suites");
    add_seed(check);

    auto* fixtures = app.add_subcommand("fixtures", "Write a synthetic demo corpus");
    fixtures->add_option("--out-dir", cfg.out_dir)->required();
    add_seed(fixtures);
    fixtures->add_option("--utterances", cfg.fixtures.utterances);
    fixtures->add_option("--d-sem", cfg.fixtures.d_sem);
    fixtures->add_option("--d-model", cfg.fixtures.d_model);

    std::vector<std::string> argv_store{"semtts"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return usage;
    }

    try {
        if (*extract) return cmd_extract(cfg, out, err);
        if (*fuse) return cmd_fuse(cfg, out, err);
        if (*eval) return cmd_eval(cfg, out, err);
        if (*prompt) return cmd_prompt(cfg, out, err);
        if (*filter) return cmd_filter(cfg, out, err);
        if (*check) return cmd_selfcheck(cfg, out, err);
        if (*fixtures) return cmd_fixtures(cfg, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return row_failures;
    }
    return usage;
}

} // namespace semtts::cli
