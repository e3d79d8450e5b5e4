#include "semtts/tensor_io.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little, "array codec assumes a little-endian host");

namespace semtts {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreambleLen = kMagicLen + 2 + 2;
constexpr std::size_t kAlign = 64;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Locates the value text following `'key':` in a Python dict literal.
std::optional<std::string_view> dict_value(std::string_view header, std::string_view key) {
    const std::string quoted = "'" + std::string(key) + "'";
    auto pos = header.find(quoted);
    if (pos == std::string_view::npos) return std::nullopt;
    pos = header.find(':', pos + quoted.size());
    if (pos == std::string_view::npos) return std::nullopt;
    std::string_view rest = trim(header.substr(pos + 1));
    std::size_t end = 0;
    if (!rest.empty() && rest.front() == '(') {
        end = rest.find(')');
        if (end == std::string_view::npos) return std::nullopt;
        return rest.substr(0, end + 1);
    }
    if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        end = rest.find(rest.front(), 1);
        if (end == std::string_view::npos) return std::nullopt;
        return rest.substr(0, end + 1);
    }
    end = rest.find_first_of(",}");
    return trim(rest.substr(0, end));
}

std::vector<std::size_t> parse_shape(std::string_view text) {
    if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
        throw ArrayParseError(ArrayField::shape, "expected a tuple, got " + std::string(text));
    }
    std::vector<std::size_t> dims;
    std::string_view body = text.substr(1, text.size() - 2);
    while (!body.empty()) {
        auto comma = body.find(',');
        std::string_view item = trim(body.substr(0, comma));
        if (!item.empty()) {
            std::size_t value = 0;
            for (char c : item) {
                if (!std::isdigit(static_cast<unsigned char>(c))) {
                    throw ArrayParseError(ArrayField::shape, "non-integer dimension '" + std::string(item) + "'");
                }
                value = value * 10 + static_cast<std::size_t>(c - '0');
            }
            dims.push_back(value);
        }
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
    }
    return dims;
}

template <typename T>
void append_le(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

} // namespace

std::string_view to_string(ArrayField field) noexcept {
    switch (field) {
    case ArrayField::magic: return "magic";
    case ArrayField::version: return "version";
    case ArrayField::header_len: return "header_len";
    case ArrayField::header: return "header";
    case ArrayField::descr: return "descr";
    case ArrayField::fortran_order: return "fortran_order";
    case ArrayField::shape: return "shape";
    case ArrayField::data: return "data";
    }
    return "unknown";
}

std::string encode_array(const Matrix& m, Dtype dtype) {
    if (!m.all_finite()) throw ValidationError("refusing to write non-finite values");

    std::string dict = "{'descr': '";
    dict += dtype == Dtype::f32 ? "<f4" : "<f8";
    dict += "', 'fortran_order': False, 'shape': (";
    dict += std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + "), }";

    // Pad so preamble + dict + padding + '\n' lands on the alignment boundary.
    std::size_t total = kPreambleLen + dict.size() + 1;
    std::size_t padded = (total + kAlign - 1) / kAlign * kAlign;
    dict.append(padded - total, ' ');
    dict.push_back('\n');
    if (dict.size() > 0xFFFF) throw ValidationError("array header too large for format version 1.0");

    const std::size_t item = dtype == Dtype::f32 ? 4 : 8;
    std::string out;
    out.reserve(kPreambleLen + dict.size() + m.size() * item);
    out.append(kMagic, kMagicLen);
    out.push_back('\x01');
    out.push_back('\x00');
    append_le(out, static_cast<std::uint16_t>(dict.size()));
    out += dict;
    for (double v : m.values()) {
        if (dtype == Dtype::f32) {
            append_le(out, static_cast<float>(v));
        } else {
            append_le(out, v);
        }
    }
    return out;
}

LoadedArray decode_array(std::string_view bytes) {
    if (bytes.size() < kMagicLen || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen)) {
        throw ArrayParseError(ArrayField::magic, "missing \\x93NUMPY magic");
    }
    if (bytes.size() < kPreambleLen) throw ArrayParseError(ArrayField::version, "truncated preamble");
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    if (major != 1 || minor != 0) {
        throw ArrayParseError(ArrayField::version,
                              "unsupported format version " + std::to_string(major) + "." + std::to_string(minor));
    }
    std::uint16_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 8, 2);
    if (bytes.size() < kPreambleLen + header_len) {
        throw ArrayParseError(ArrayField::header_len, "header length " + std::to_string(header_len) +
                                                          " exceeds file size");
    }
    const std::string_view header = bytes.substr(kPreambleLen, header_len);
    if (header.find('{') == std::string_view::npos || header.find('}') == std::string_view::npos) {
        throw ArrayParseError(ArrayField::header, "header is not a dict literal");
    }

    auto descr = dict_value(header, "descr");
    if (!descr) throw ArrayParseError(ArrayField::descr, "missing key");
    Dtype dtype;
    if (*descr == "'<f4'") {
        dtype = Dtype::f32;
    } else if (*descr == "'<f8'") {
        dtype = Dtype::f64;
    } else {
        throw ArrayParseError(ArrayField::descr, "unsupported dtype " + std::string(*descr));
    }

    auto fortran = dict_value(header, "fortran_order");
    if (!fortran) throw ArrayParseError(ArrayField::fortran_order, "missing key");
    if (*fortran == "True") throw ArrayParseError(ArrayField::fortran_order, "fortran-order arrays are not supported");
    if (*fortran != "False") throw ArrayParseError(ArrayField::fortran_order, "bad value " + std::string(*fortran));

    auto shape_text = dict_value(header, "shape");
    if (!shape_text) throw ArrayParseError(ArrayField::shape, "missing key");
    const auto dims = parse_shape(*shape_text);
    if (dims.size() != 2) {
        throw ArrayParseError(ArrayField::shape, "expected 2 dimensions, got " + std::to_string(dims.size()));
    }
    if (dims[0] == 0 || dims[1] == 0) throw ArrayParseError(ArrayField::shape, "zero-sized dimension");

    const std::size_t count = dims[0] * dims[1];
    const std::size_t item = dtype == Dtype::f32 ? 4 : 8;
    const std::string_view data = bytes.substr(kPreambleLen + header_len);
    if (data.size() != count * item) {
        throw ArrayParseError(ArrayField::data, "expected " + std::to_string(count * item) + " data bytes, found " +
                                                    std::to_string(data.size()));
    }

    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (dtype == Dtype::f32) {
            float f;
            std::memcpy(&f, data.data() + i * 4, 4);
            values[i] = f;
        } else {
            std::memcpy(&values[i], data.data() + i * 8, 8);
        }
    }
    LoadedArray out{Matrix(dims[0], dims[1], std::move(values)), dtype};
    if (!out.matrix.all_finite()) throw ArrayParseError(ArrayField::data, "non-finite element");
    return out;
}

LoadedArray read_array_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_array(bytes);
    } catch (const ArrayParseError& e) {
        throw ArrayParseError(e.field(), path.string() + ": " + e.detail());
    }
}

Matrix read_array(const std::filesystem::path& path) { return read_array_file(path).matrix; }

void write_array(const Matrix& m, const std::filesystem::path& path, Dtype dtype) {
    const std::string bytes = encode_array(m, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace semtts
