#include "semtts/tensor_io.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <limits>

using namespace semtts;
using semtts::testing::TempDir;

namespace {

std::string header_text(const std::string& bytes) {
    const auto len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
    return bytes.substr(10, len);
}

// Hand-assembles a file with an arbitrary header dict for error-path tests.
std::string raw_array(const std::string& dict, std::size_t payload_bytes, char major = 1) {
    std::string header = dict;
    std::size_t total = 10 + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header.push_back('\n');
    std::string out = "\x93NUMPY";
    out.push_back(major);
    out.push_back('\0');
    out.push_back(static_cast<char>(header.size() & 0xFF));
    out.push_back(static_cast<char>(header.size() >> 8));
    out += header;
    out.append(payload_bytes, '\0');
    return out;
}

ArrayField field_of(const std::string& bytes) {
    try {
        (void)decode_array(bytes);
    } catch (const ArrayParseError& e) {
        return e.field();
    }
    FAIL("expected a parse error");
    return ArrayField::data;
}

} // namespace

TEST_SUITE("tensor_io") {

TEST_CASE("2x2 round trip through a file") {
    TempDir dir;
    const auto m = Matrix::from_rows({{1, 2}, {3, 4}});
    write_array(m, dir / "a.npy");
    CHECK(read_array(dir / "a.npy") == m);
}

TEST_CASE("1x1 zero matrix") {
    TempDir dir;
    write_array(Matrix(1, 1, 0.0), dir / "z.npy");
    const auto back = read_array(dir / "z.npy");
    CHECK(back.rows() == 1);
    CHECK(back.cols() == 1);
    CHECK(back(0, 0) == 0.0);
}

TEST_CASE("header layout for a 3x5 matrix") {
    std::vector<double> seq(15);
    for (int i = 0; i < 15; ++i) seq[i] = i;
    const std::string bytes = encode_array(Matrix(3, 5, seq));
    CHECK(bytes.substr(0, 6) == "\x93NUMPY");
    CHECK(bytes[6] == 1);
    CHECK(bytes[7] == 0);
    const std::string header = header_text(bytes);
    CHECK(header.rfind("{'descr': '<f4', 'fortran_order': False, 'shape': (3, 5), }", 0) == 0);
    CHECK(header.back() == '\n');
    CHECK((10 + header.size()) % 64 == 0);
    CHECK(bytes.size() == 10 + header.size() + 15 * 4);
    float f;
    std::memcpy(&f, bytes.data() + 10 + header.size() + 14 * 4, 4);
    CHECK(f == 14.0f);
}

TEST_CASE("repeated writes are byte-identical") {
    TempDir dir;
    Rng rng(3);
    const auto m = semtts::testing::random_matrix(rng, 4, 7);
    write_array(m, dir / "x.npy", Dtype::f64);
    write_array(m, dir / "y.npy", Dtype::f64);
    CHECK(semtts::testing::slurp(dir / "x.npy") == semtts::testing::slurp(dir / "y.npy"));
}

TEST_CASE("f64 keeps every bit, f32 rounds to nearest") {
    const auto m = Matrix::from_rows({{0.1, -1e-300, 1e300}});
    CHECK(decode_array(encode_array(m, Dtype::f64)).matrix == m);
    const auto narrowed = decode_array(encode_array(Matrix::from_rows({{0.1}}), Dtype::f32));
    CHECK(narrowed.dtype == Dtype::f32);
    CHECK(narrowed.matrix(0, 0) == static_cast<double>(0.1f));
}

TEST_CASE("non-finite values are rejected before writing") {
    TempDir dir;
    const auto m = Matrix::from_rows({{1.0, std::numeric_limits<double>::quiet_NaN()}});
    CHECK_THROWS_AS(write_array(m, dir / "nan.npy"), ValidationError);
    CHECK_FALSE(std::filesystem::exists(dir / "nan.npy"));
}

TEST_CASE("parse errors name the offending field") {
    const std::string good = "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }";
    CHECK(field_of("NOTNPY") == ArrayField::magic);
    CHECK(field_of(raw_array(good, 8, 2)) == ArrayField::version);
    CHECK(field_of(raw_array("{'descr': '>f4', 'fortran_order': False, 'shape': (1, 2), }", 8)) == ArrayField::descr);
    CHECK(field_of(raw_array("{'descr': '<i4', 'fortran_order': False, 'shape': (1, 2), }", 8)) == ArrayField::descr);
    CHECK(field_of(raw_array("{'descr': '<f4', 'fortran_order': True, 'shape': (1, 2), }", 8)) ==
          ArrayField::fortran_order);
    CHECK(field_of(raw_array("{'descr': '<f4', 'fortran_order': False, 'shape': (2,), }", 8)) == ArrayField::shape);
    CHECK(field_of(raw_array("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 1), }", 8)) ==
          ArrayField::shape);
    CHECK(field_of(raw_array(good, 7)) == ArrayField::data);
    CHECK(decode_array(raw_array(good, 8)).matrix.cols() == 2);
}

TEST_CASE("reader tolerates other key orders and spacing") {
    const auto parsed = decode_array(raw_array("{'shape':(2,1),'fortran_order':False,'descr':'<f8'}", 16));
    CHECK(parsed.dtype == Dtype::f64);
    CHECK(parsed.matrix.rows() == 2);
    CHECK(parsed.matrix.cols() == 1);
}

TEST_CASE("non-finite payload is a data error") {
    std::string bytes = encode_array(Matrix(1, 1, 1.0));
    const float inf = std::numeric_limits<float>::infinity();
    std::memcpy(bytes.data() + bytes.size() - 4, &inf, 4);
    CHECK(field_of(bytes) == ArrayField::data);
}

TEST_CASE("property: random matrices survive encode/decode bitwise") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const std::size_t r = 1 + rng.below(12), c = 1 + rng.below(12);
        Matrix m(r, c);
        for (double& x : m.values()) x = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(80)) - 40);
        const auto back = decode_array(encode_array(m, Dtype::f64));
        REQUIRE(back.matrix == m);
    }
}

TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(read_array("/nonexistent/really.npy"), IoError);
}

}
