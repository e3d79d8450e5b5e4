#include "semtts/prompts.hpp"

#include "semtts/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace semtts {

namespace {

constexpr std::string_view kTranscript = "{transcript}";
constexpr std::string_view kLabels = "{labels}";

std::size_t count_of(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_edge_punct(std::string_view s) {
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Single left-to-right pass; inserted text is never rescanned.
std::string substitute(std::string_view text, std::string_view transcript, std::string_view labels) {
    std::string out;
    out.reserve(text.size() + transcript.size() + labels.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, kTranscript.size(), kTranscript) == 0) {
            out += transcript;
            i += kTranscript.size();
        } else if (!labels.empty() && text.compare(i, kLabels.size(), kLabels) == 0) {
            out += labels;
            i += kLabels.size();
        } else {
            out += text[i++];
        }
    }
    return out;
}

void require_transcript(std::string_view transcript) {
    if (trim(transcript).empty()) throw ValidationError("transcript is empty");
}

} // namespace

void PromptTemplate::validate() const {
    const auto n = count_of(text, kTranscript);
    if (n != 1) {
        throw ValidationError("template must contain {transcript} exactly once, found " + std::to_string(n));
    }
    const auto l = count_of(text, kLabels);
    if (kind == PromptKind::emotion_label && l != 1) {
        throw ValidationError("emotion-label template must contain {labels} exactly once, found " + std::to_string(l));
    }
    if (kind != PromptKind::emotion_label && l != 0) {
        throw ValidationError("EIS templates take no {labels} placeholder");
    }
}

PromptTemplate PromptTemplate::builtin(PromptKind kind) {
    switch (kind) {
    case PromptKind::eis_word:
        return {kind,
                "Read the sentence below and name the emotion it carries, the intention behind it, "
                "and the speaking style a speaker would use for it.\n"
                "Reply with three words only, one per attribute, in that order.\n"
                "Sentence: {transcript}\n"
                "Answer:"};
    case PromptKind::eis_sentence:
        return {kind,
                "Read the sentence below and describe the emotion it carries, the intention behind it, "
                "and the speaking style a speaker would use for it.\n"
                "Reply with one short, plain sentence.\n"
                "Sentence: {transcript}\n"
                "Answer:"};
    case PromptKind::emotion_label:
        return {kind,
                "Which emotion does the speaker of the transcript below express?\n"
                "Choose exactly one label from this list: {labels}.\n"
                "Reply with the label only.\n"
                "Transcript: {transcript}\n"
                "Label:"};
    }
    throw ValidationError("unknown prompt kind");
}

PromptTemplate load_template(const std::filesystem::path& path, PromptKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open template " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    PromptTemplate tpl{kind, buf.str()};
    tpl.validate();
    return tpl;
}

const std::vector<std::string>& default_emotion_labels() {
    static const std::vector<std::string> labels{"amused", "angry", "disgusted", "neutral", "sleepy"};
    return labels;
}

std::string build_eis_word_prompt(std::string_view transcript, const PromptTemplate& tpl) {
    require_transcript(transcript);
    if (tpl.kind != PromptKind::eis_word) throw ValidationError("expected an eis-word template");
    tpl.validate();
    return substitute(tpl.text, transcript, {});
}

std::string build_eis_sentence_prompt(std::string_view transcript, const PromptTemplate& tpl) {
    require_transcript(transcript);
    if (tpl.kind != PromptKind::eis_sentence) throw ValidationError("expected an eis-sentence template");
    tpl.validate();
    return substitute(tpl.text, transcript, {});
}

std::string build_emotion_label_prompt(std::string_view transcript, const std::vector<std::string>& labels,
                                       const PromptTemplate& tpl) {
    require_transcript(transcript);
    if (labels.empty()) throw ValidationError("emotion label list is empty");
    if (tpl.kind != PromptKind::emotion_label) throw ValidationError("expected an emotion-label template");
    tpl.validate();
    std::string joined;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (trim(labels[i]).empty()) throw ValidationError("empty emotion label");
        if (i) joined += ", ";
        joined += labels[i];
    }
    return substitute(tpl.text, transcript, joined);
}

std::string normalize_label(std::string_view label) {
    std::string out(trim(label));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::array<std::string, 3> parse_eis_word_answer(std::string_view answer) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        auto w = strip_edge_punct(current);
        if (!w.empty()) words.push_back(normalize_label(w));
        current.clear();
    };
    for (char c : answer) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';') {
            flush();
        } else {
            current += c;
        }
    }
    flush();
    if (words.size() != 3) {
        throw ValidationError("expected three words, got " + std::to_string(words.size()));
    }
    return {words[0], words[1], words[2]};
}

std::string parse_eis_sentence_answer(std::string_view answer) {
    auto s = trim(answer);
    if (s.empty()) throw ValidationError("empty sentence answer");
    return std::string(s);
}

std::string parse_emotion_label(std::string_view answer, const std::vector<std::string>& labels) {
    const std::string got = normalize_label(strip_edge_punct(trim(answer)));
    for (const auto& l : labels) {
        if (normalize_label(l) == got) return normalize_label(l);
    }
    throw ValidationError("answer '" + std::string(answer) + "' is not one of the allowed labels");
}

} // namespace semtts
