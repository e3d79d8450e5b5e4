#include "semtts/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace semtts {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(std::string_view bytes, std::size_t offset) {
    T v;
    std::memcpy(&v, bytes.data() + offset, sizeof(T));
    return v;
}

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

} // namespace

Audio decode_wav(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
        throw WavError("not a RIFF/WAVE stream");
    }
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::string_view data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string_view id = bytes.substr(pos, 4);
        const auto size = load<std::uint32_t>(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) {
            if (id == "data") {
                // Some writers leave the data size unpatched; take what is there.
                data = bytes.substr(body);
                have_data = true;
                break;
            }
            throw WavError("chunk '" + std::string(id) + "' overruns the file");
        }
        if (id == "fmt ") {
            if (size < 16) throw WavError("fmt chunk too short");
            format = load<std::uint16_t>(bytes, body);
            channels = load<std::uint16_t>(bytes, body + 2);
            rate = load<std::uint32_t>(bytes, body + 4);
            bits = load<std::uint16_t>(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (size < 26) throw WavError("extensible fmt chunk too short");
                format = load<std::uint16_t>(bytes, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            data = bytes.substr(body, size);
            have_data = true;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) throw WavError("missing fmt chunk");
    if (!have_data) throw WavError("missing data chunk");
    if (channels != 1) throw WavError("expected mono audio, got " + std::to_string(channels) + " channels");
    if (rate == 0) throw WavError("sample rate is zero");

    Audio audio;
    audio.sample_rate = static_cast<int>(rate);
    if (format == kFormatPcm && bits == 16) {
        audio.samples.resize(data.size() / 2);
        for (std::size_t i = 0; i < audio.samples.size(); ++i) {
            audio.samples[i] = load<std::int16_t>(data, i * 2) / 32768.0;
        }
    } else if (format == kFormatFloat && bits == 32) {
        audio.samples.resize(data.size() / 4);
        for (std::size_t i = 0; i < audio.samples.size(); ++i) {
            audio.samples[i] = load<float>(data, i * 4);
        }
    } else {
        throw WavError("unsupported sample format " + std::to_string(format) + " with " + std::to_string(bits) +
                       " bits (need 16-bit PCM or 32-bit float)");
    }
    return audio;
}

Audio read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const WavError& e) {
        throw WavError(path.string() + ": " + e.what());
    }
}

std::string encode_wav(const Audio& audio, WavFormat format) {
    if (audio.sample_rate <= 0) throw ValidationError("sample rate must be positive");
    const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
    const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));
    std::string out;
    out += "RIFF";
    put<std::uint32_t>(out, 36 + data_size);
    out += "WAVEfmt ";
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, format == WavFormat::pcm16 ? kFormatPcm : kFormatFloat);
    put<std::uint16_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate) * (bits / 8));
    put<std::uint16_t>(out, bits / 8);
    put<std::uint16_t>(out, bits);
    out += "data";
    put<std::uint32_t>(out, data_size);
    for (double s : audio.samples) {
        if (format == WavFormat::pcm16) {
            const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
            put<std::int16_t>(out, static_cast<std::int16_t>(scaled));
        } else {
            put<float>(out, static_cast<float>(s));
        }
    }
    return out;
}

void write_wav(const Audio& audio, const std::filesystem::path& path, WavFormat format) {
    const std::string bytes = encode_wav(audio, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace semtts
