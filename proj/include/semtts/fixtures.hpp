#pragma once

#include <cstdint>
#include <filesystem>

namespace semtts {

struct FixtureSpec {
    std::size_t utterances = 5;
    std::size_t d_sem = 16;   ///< hidden width of the fake language model
    std::size_t d_model = 8;  ///< acoustic embedding width
    std::uint64_t seed = 7;
    int sample_rate = 22050;
};

/// Writes a small synthetic corpus (hidden-state dumps, acoustic embeddings,
/// reference and hypothesis audio, transcripts, labels) plus `manifest.jsonl`
/// into `dir`. Returns the manifest path. Output depends only on `spec`.
std::filesystem::path write_fixtures(const std::filesystem::path& dir, const FixtureSpec& spec = {});

} // namespace semtts
