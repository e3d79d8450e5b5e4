#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semtts {

enum class PromptKind { eis_word, eis_sentence, emotion_label };

/// Prompt text with `{transcript}` (and, for emotion labels, `{labels}`)
/// placeholders, each appearing exactly once.
struct PromptTemplate {
    PromptKind kind;
    std::string text;

    void validate() const;
    static PromptTemplate builtin(PromptKind kind);
};

PromptTemplate load_template(const std::filesystem::path& path, PromptKind kind);

const std::vector<std::string>& default_emotion_labels();

std::string build_eis_word_prompt(std::string_view transcript,
                                  const PromptTemplate& tpl = PromptTemplate::builtin(PromptKind::eis_word));
std::string build_eis_sentence_prompt(std::string_view transcript,
                                      const PromptTemplate& tpl = PromptTemplate::builtin(PromptKind::eis_sentence));
std::string build_emotion_label_prompt(std::string_view transcript,
                                       const std::vector<std::string>& labels = default_emotion_labels(),
                                       const PromptTemplate& tpl = PromptTemplate::builtin(PromptKind::emotion_label));

// Answer post-processing for the model's replies.

/// Exactly three words (emotion, intention, style), lowercased, edge punctuation removed.
std::array<std::string, 3> parse_eis_word_answer(std::string_view answer);
/// Trimmed non-empty sentence.
std::string parse_eis_sentence_answer(std::string_view answer);
/// One label out of `labels`, compared after trimming and lowercasing.
std::string parse_emotion_label(std::string_view answer, const std::vector<std::string>& labels);

/// Lowercased and trimmed; used wherever labels are compared.
std::string normalize_label(std::string_view label);

} // namespace semtts
