#include "semtts/manifest.hpp"

#include "semtts/audio.hpp"
#include "semtts/tensor_io.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace semtts {

namespace {

using json = nlohmann::ordered_json;
using OptField = std::optional<std::string> UtteranceRecord::*;

constexpr std::array<std::pair<const char*, OptField>, 10> kOptionalFields{{
    {"phonemes", &UtteranceRecord::phonemes},
    {"audio_path", &UtteranceRecord::audio_path},
    {"hs_text_path", &UtteranceRecord::hs_text_path},
    {"hs_phoneme_path", &UtteranceRecord::hs_phoneme_path},
    {"hs_eis_e_path", &UtteranceRecord::hs_eis_e_path},
    {"hs_eis_i_path", &UtteranceRecord::hs_eis_i_path},
    {"hs_eis_s_path", &UtteranceRecord::hs_eis_s_path},
    {"hs_eis_sentence_path", &UtteranceRecord::hs_eis_sentence_path},
    {"emotion_annotated", &UtteranceRecord::emotion_annotated},
    {"emotion_predicted", &UtteranceRecord::emotion_predicted},
}};

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string rebase_one(const std::string& p, const std::filesystem::path& from_dir,
                       const std::filesystem::path& to_dir) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    auto abs_target = std::filesystem::weakly_canonical(std::filesystem::absolute(from_dir / path));
    auto abs_to = std::filesystem::weakly_canonical(std::filesystem::absolute(to_dir));
    auto rel = abs_target.lexically_relative(abs_to);
    return rel.empty() ? abs_target.generic_string() : rel.generic_string();
}

} // namespace

std::optional<std::string> UtteranceRecord::extra_string(const std::string& key) const {
    auto it = extra.find(key);
    if (it == extra.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

std::optional<double> UtteranceRecord::extra_number(const std::string& key) const {
    auto it = extra.find(key);
    if (it == extra.end() || !it->is_number()) return std::nullopt;
    return it->get<double>();
}

void UtteranceRecord::set_extra(const std::string& key, nlohmann::ordered_json value) {
    extra[key] = std::move(value);
}

UtteranceRecord record_from_json(const json& obj) {
    if (!obj.is_object()) throw ValidationError("record is not a JSON object");
    UtteranceRecord rec;
    for (const auto& [key, value] : obj.items()) {
        if (key == "utt_id" || key == "transcript") {
            if (!value.is_string()) throw ValidationError("field '" + key + "' must be a string");
            (key == "utt_id" ? rec.utt_id : rec.transcript) = value.get<std::string>();
            continue;
        }
        bool known = false;
        for (const auto& [name, member] : kOptionalFields) {
            if (key != name) continue;
            known = true;
            if (value.is_null()) break;
            if (!value.is_string()) throw ValidationError("field '" + key + "' must be a string");
            rec.*member = value.get<std::string>();
            break;
        }
        if (!known) rec.extra[key] = value;
    }
    if (rec.utt_id.empty()) throw ValidationError("missing or empty utt_id");
    return rec;
}

json record_to_json(const UtteranceRecord& rec) {
    json obj = json::object();
    obj["utt_id"] = rec.utt_id;
    obj["transcript"] = rec.transcript;
    for (const auto& [name, member] : kOptionalFields) {
        if (rec.*member) obj[name] = *(rec.*member);
    }
    for (const auto& [key, value] : rec.extra.items()) obj[key] = value;
    return obj;
}

std::vector<UtteranceRecord> parse_manifest(const std::string& text) {
    std::vector<UtteranceRecord> records;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        UtteranceRecord rec;
        try {
            rec = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw ManifestError(lineno, std::string("malformed JSON: ") + e.what());
        } catch (const ValidationError& e) {
            throw ManifestError(lineno, e.what());
        }
        if (!seen.insert(rec.utt_id).second) throw ManifestError(lineno, "duplicate utt_id '" + rec.utt_id + "'");
        records.push_back(std::move(rec));
    }
    return records;
}

std::string format_manifest(const std::vector<UtteranceRecord>& records) {
    std::set<std::string> seen;
    std::string out;
    for (const auto& rec : records) {
        if (rec.utt_id.empty()) throw ValidationError("record with empty utt_id");
        if (!seen.insert(rec.utt_id).second) throw ValidationError("duplicate utt_id '" + rec.utt_id + "'");
        out += record_to_json(rec).dump(-1, ' ', false, json::error_handler_t::strict);
        out += '\n';
    }
    return out;
}

std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

void write_manifest(const std::vector<UtteranceRecord>& records, const std::filesystem::path& path) {
    const std::string text = format_manifest(records);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open manifest " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

UtteranceRecord rebase_paths(UtteranceRecord rec, const std::filesystem::path& from_dir,
                             const std::filesystem::path& to_dir) {
    for (const auto& [name, member] : kOptionalFields) {
        if (ends_with(name, "_path") && rec.*member) rec.*member = rebase_one(*(rec.*member), from_dir, to_dir);
    }
    for (auto& [key, value] : rec.extra.items()) {
        if (ends_with(key, "_path") && value.is_string()) {
            value = rebase_one(value.get<std::string>(), from_dir, to_dir);
        }
    }
    return rec;
}

std::vector<std::string> validate_manifest(const std::vector<UtteranceRecord>& records,
                                           const std::filesystem::path& base_dir) {
    std::vector<std::string> problems;
    for (const auto& rec : records) {
        for (const auto& [name, member] : kOptionalFields) {
            if (!ends_with(name, "_path") || !(rec.*member)) continue;
            const auto path = resolve_path(base_dir, *(rec.*member));
            try {
                if (std::string_view(name) == "audio_path") {
                    (void)read_wav(path);
                } else {
                    (void)read_array(path);
                }
            } catch (const Error& e) {
                problems.push_back(rec.utt_id + ": " + name + ": " + e.what());
            }
        }
    }
    return problems;
}

} // namespace semtts
