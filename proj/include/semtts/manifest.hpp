#pragma once

#include "semtts/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semtts {

/// One utterance of a line-delimited JSON manifest.
///
/// Known fields are typed; anything else lands in `extra` with its original
/// key order so a read/write cycle reproduces the line.
struct UtteranceRecord {
    std::string utt_id;
    std::string transcript;
    std::optional<std::string> phonemes;
    std::optional<std::string> audio_path;
    std::optional<std::string> hs_text_path;
    std::optional<std::string> hs_phoneme_path;
    std::optional<std::string> hs_eis_e_path;
    std::optional<std::string> hs_eis_i_path;
    std::optional<std::string> hs_eis_s_path;
    std::optional<std::string> hs_eis_sentence_path;
    std::optional<std::string> emotion_annotated;
    std::optional<std::string> emotion_predicted;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    /// String-valued extra field, if present.
    std::optional<std::string> extra_string(const std::string& key) const;
    std::optional<double> extra_number(const std::string& key) const;
    void set_extra(const std::string& key, nlohmann::ordered_json value);

    friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

class ManifestError : public Error {
public:
    ManifestError(std::size_t line, const std::string& detail)
        : Error("manifest line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

UtteranceRecord record_from_json(const nlohmann::ordered_json& obj);
nlohmann::ordered_json record_to_json(const UtteranceRecord& rec);

/// Parses manifest text; blank lines are skipped, line numbers are 1-based.
std::vector<UtteranceRecord> parse_manifest(const std::string& text);
std::string format_manifest(const std::vector<UtteranceRecord>& records);

std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<UtteranceRecord>& records, const std::filesystem::path& path);

/// Resolves a manifest-relative path against the manifest's directory.
std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p);

/// Rewrites every relative `*_path` field so it stays valid when the record
/// moves from a manifest in `from_dir` to one in `to_dir`.
UtteranceRecord rebase_paths(UtteranceRecord rec, const std::filesystem::path& from_dir,
                             const std::filesystem::path& to_dir);

/// Checks that every present tensor path parses as an array and the audio
/// path parses as WAVE. Returns one message per problem.
std::vector<std::string> validate_manifest(const std::vector<UtteranceRecord>& records,
                                           const std::filesystem::path& base_dir);

} // namespace semtts
