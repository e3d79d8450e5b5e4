#pragma once

#include "semtts/errors.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semtts {

enum class WavFormat { pcm16, float32 };

/// Mono waveform, samples nominally in [-1, 1].
struct Audio {
    int sample_rate = 0;
    std::vector<double> samples;
};

class WavError : public Error {
public:
    using Error::Error;
};

/// Decodes RIFF/WAVE: 16-bit PCM or 32-bit IEEE float, mono only.
Audio decode_wav(std::string_view bytes);
Audio read_wav(const std::filesystem::path& path);

std::string encode_wav(const Audio& audio, WavFormat format = WavFormat::pcm16);
void write_wav(const Audio& audio, const std::filesystem::path& path, WavFormat format = WavFormat::pcm16);

} // namespace semtts
