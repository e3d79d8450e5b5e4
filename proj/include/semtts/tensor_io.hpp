#pragma once

#include "semtts/errors.hpp"
#include "semtts/matrix.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace semtts {

/// On-disk element type of a 2-D array file.
enum class Dtype { f32, f64 };

/// Header field a parse failure was attributed to.
enum class ArrayField { magic, version, header_len, header, descr, fortran_order, shape, data };

std::string_view to_string(ArrayField field) noexcept;

class ArrayParseError : public Error {
public:
    ArrayParseError(ArrayField field, const std::string& detail)
        : Error(std::string(to_string(field)) + ": " + detail), field_(field), detail_(detail) {}
    ArrayField field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ArrayField field_;
    std::string detail_;
};

struct LoadedArray {
    Matrix matrix;
    Dtype dtype = Dtype::f32;
};

/// Serializes a matrix as a version 1.0 .npy byte stream.
///
/// The header is `{'descr': '<f4', 'fortran_order': False, 'shape': (r, c), }`
/// padded with spaces and a trailing newline so the data starts on a 64-byte
/// boundary. f32 output rounds each value to nearest.
std::string encode_array(const Matrix& m, Dtype dtype = Dtype::f32);

/// Parses a .npy byte stream. Only little-endian f4/f8, C order, 2-D.
LoadedArray decode_array(std::string_view bytes);

LoadedArray read_array_file(const std::filesystem::path& path);

/// Reads a 2-D array, widening f32 storage to double.
Matrix read_array(const std::filesystem::path& path);

/// Writes `m`; rejects non-finite values before touching the file.
void write_array(const Matrix& m, const std::filesystem::path& path, Dtype dtype = Dtype::f32);

} // namespace semtts
