#include "semtts/audio.hpp"
#include "semtts/fusion.hpp"
#include "semtts/metrics.hpp"
#include "semtts/prompts.hpp"
#include "semtts/selfcheck.hpp"
#include "semtts/strategies.hpp"
#include "semtts/tensor_io.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace semtts;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() == 1) {
        const auto n = static_cast<std::size_t>(a.shape(0));
        return Matrix(1, n, std::vector<double>(a.data(), a.data() + n));
    }
    if (a.ndim() != 2) throw ShapeError("expected a 1-D or 2-D array");
    const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
    return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Matrix to_matrix_2d(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
    return to_matrix(a);
}

Array from_matrix(const Matrix& m) {
    Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    if (m.size()) std::memcpy(out.mutable_data(), m.values().data(), m.size() * sizeof(double));
    return out;
}

Array from_vector(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    if (!v.empty()) std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

Dtype parse_dtype(const std::string& s) {
    if (s == "f4" || s == "<f4" || s == "float32") return Dtype::f32;
    if (s == "f8" || s == "<f8" || s == "float64") return Dtype::f64;
    throw ValidationError("dtype must be f4 or f8");
}

std::optional<std::vector<bool>> to_mask(const std::optional<std::vector<bool>>& m) { return m; }

FusionConfig make_cfg(std::optional<double> gamma, double mask_fill, double dropout, std::uint64_t seed, bool train) {
    FusionConfig cfg;
    cfg.gamma = gamma;
    cfg.mask_fill = mask_fill;
    cfg.dropout_p = dropout;
    cfg.rng_seed = seed;
    cfg.train_mode = train;
    return cfg;
}

MelCepstra cepstra_from(const Array& a) {
    auto m = to_matrix_2d(a);
    const std::size_t order = m.cols() - 1;
    return MelCepstra{std::move(m), 0, 0, order};
}

} // namespace

PYBIND11_MODULE(_semtts, m) {
    m.doc() = "Semantic token extraction, fusion and speech evaluation kernels";

    static py::exception<Error> base_error(m, "SemttsError", PyExc_RuntimeError);
    static py::exception<ShapeError> shape_error(m, "ShapeError", base_error.ptr());
    static py::exception<DegenerateInputError> degenerate_error(m, "DegenerateInputError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ShapeError& e) {
            PyErr_SetString(shape_error.ptr(), e.what());
        } catch (const DegenerateInputError& e) {
            PyErr_SetString(degenerate_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(base_error.ptr(), e.what());
        }
    });

    // Arrays
    m.def("read_array", [](const std::string& path) { return from_matrix(read_array(path)); }, py::arg("path"));
    m.def(
        "write_array",
        [](const Array& a, const std::string& path, const std::string& dtype) {
            write_array(to_matrix_2d(a), path, parse_dtype(dtype));
        },
        py::arg("array"), py::arg("path"), py::arg("dtype") = "f4");
    m.def(
        "encode_array",
        [](const Array& a, const std::string& dtype) { return py::bytes(encode_array(to_matrix_2d(a), parse_dtype(dtype))); },
        py::arg("array"), py::arg("dtype") = "f4");
    m.def(
        "decode_array", [](const py::bytes& b) { return from_matrix(decode_array(std::string(b)).matrix); },
        py::arg("data"));

    // Token strategies
    m.def("extract_ave", [](const Array& h) { return from_vector(extract_ave(to_matrix_2d(h)).vector); });
    m.def("extract_last", [](const Array& h) { return from_vector(extract_last(to_matrix_2d(h)).vector); });
    m.def("extract_pca", [](const Array& h) { return from_vector(extract_pca(to_matrix_2d(h)).vector); });
    m.def("principal_axis", [](const Array& h) { return from_vector(principal_axis(to_matrix_2d(h))); });
    m.def("extract_eis_word", [](const Array& e, const Array& i, const Array& s) {
        return from_vector(extract_eis_word(to_matrix_2d(e), to_matrix_2d(i), to_matrix_2d(s)).vector);
    });
    m.def("extract_eis_sentence", [](const Array& h) { return from_vector(extract_eis_sentence(to_matrix_2d(h)).vector); });

    // Fusion
    m.def(
        "project",
        [](const Array& w, const Array& x) -> Array {
            ProjectionMatrix p{to_matrix_2d(w)};
            if (x.ndim() == 1) {
                std::vector<double> v(x.data(), x.data() + x.shape(0));
                return from_vector(project(p, std::span<const double>(v)));
            }
            return from_matrix(project(p, to_matrix_2d(x)));
        },
        py::arg("w"), py::arg("x"));
    m.def(
        "fuse_global",
        [](const Array& acoustic, const Array& token) {
            const auto t = to_matrix(token);
            if (t.rows() != 1) throw ShapeError("token must be a vector");
            return from_matrix(fuse_global(to_matrix_2d(acoustic), t.row(0)).matrix);
        },
        py::arg("acoustic"), py::arg("token"));
    m.def(
        "fuse_sequential",
        [](const Array& q, const Array& kv, std::optional<double> gamma, double mask_fill, double dropout,
           std::uint64_t seed, bool train, std::optional<std::vector<bool>> src_mask,
           std::optional<std::vector<bool>> tgt_mask) {
            MaskPair masks{to_mask(tgt_mask), to_mask(src_mask)};
            const auto fused =
                fuse_sequential(to_matrix_2d(q), to_matrix_2d(kv), make_cfg(gamma, mask_fill, dropout, seed, train), masks);
            return py::make_tuple(from_matrix(fused.matrix), from_matrix(*fused.attention));
        },
        py::arg("q"), py::arg("kv"), py::arg("gamma") = py::none(), py::arg("mask_fill") = -6e4,
        py::arg("dropout") = 0.1, py::arg("seed") = 0, py::arg("train") = false, py::arg("src_mask") = py::none(),
        py::arg("tgt_mask") = py::none());
    m.def(
        "fuse_sequential_backward",
        [](const Array& q, const Array& kv, const Array& grad_out, std::optional<double> gamma, double mask_fill,
           std::optional<std::vector<bool>> src_mask, std::optional<std::vector<bool>> tgt_mask) {
            MaskPair masks{to_mask(tgt_mask), to_mask(src_mask)};
            const auto g = fuse_sequential_backward(to_matrix_2d(q), to_matrix_2d(kv),
                                                    make_cfg(gamma, mask_fill, 0.0, 0, false), masks,
                                                    to_matrix_2d(grad_out));
            return py::make_tuple(from_matrix(g.grad_q), from_matrix(g.grad_kv));
        },
        py::arg("q"), py::arg("kv"), py::arg("grad_out"), py::arg("gamma") = py::none(), py::arg("mask_fill") = -6e4,
        py::arg("src_mask") = py::none(), py::arg("tgt_mask") = py::none());

    // Metrics
    m.def(
        "read_wav",
        [](const std::string& path) {
            const auto a = read_wav(path);
            return py::make_tuple(from_vector(a.samples), a.sample_rate);
        },
        py::arg("path"));
    m.def(
        "mel_cepstra",
        [](const Array& samples, int sample_rate, std::size_t window, std::size_t shift, std::size_t n_mels,
           std::size_t order) {
            if (samples.ndim() != 1) throw ShapeError("samples must be 1-D");
            MelConfig cfg;
            cfg.sample_rate = sample_rate;
            cfg.window = window;
            cfg.shift = shift;
            cfg.n_mels = n_mels;
            cfg.order = order;
            std::span<const double> pcm(samples.data(), static_cast<std::size_t>(samples.shape(0)));
            return from_matrix(mel_cepstra_from_audio(pcm, cfg).coeffs);
        },
        py::arg("samples"), py::arg("sample_rate") = 22050, py::arg("window") = 1024, py::arg("shift") = 256,
        py::arg("n_mels") = 80, py::arg("order") = 12);
    m.def(
        "dtw_align",
        [](const Array& a, const Array& b) {
            const auto r = dtw_align(cepstra_from(a), cepstra_from(b));
            return py::make_tuple(r.path, r.cost);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "mcd",
        [](const Array& a, const Array& b, bool use_dtw, bool skip_c0) {
            return mcd(cepstra_from(a), cepstra_from(b), McdOptions{use_dtw, skip_c0});
        },
        py::arg("a"), py::arg("b"), py::arg("use_dtw") = true, py::arg("skip_c0") = true);
    m.def(
        "edit_stats",
        [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
            const auto s = edit_stats<std::string>(ref, hyp);
            py::dict d;
            d["substitutions"] = s.substitutions;
            d["deletions"] = s.deletions;
            d["insertions"] = s.insertions;
            d["ref_len"] = s.ref_len;
            return d;
        },
        py::arg("ref"), py::arg("hyp"));
    m.def("cer", [](const std::string& r, const std::string& h) { return cer(r, h); }, py::arg("ref"), py::arg("hyp"));
    m.def("wer", [](const std::string& r, const std::string& h) { return wer(r, h); }, py::arg("ref"), py::arg("hyp"));
    m.def("normalize_text", [](const std::string& t) { return normalize_text(t); }, py::arg("text"));
    m.def(
        "format_mean_std",
        [](const std::vector<double>& v, int decimals) { return format_mean_std(mean_std(v), decimals); },
        py::arg("values"), py::arg("decimals") = 2);

    // Prompts
    m.def("build_eis_word_prompt", [](const std::string& t) { return build_eis_word_prompt(t); }, py::arg("transcript"));
    m.def("build_eis_sentence_prompt", [](const std::string& t) { return build_eis_sentence_prompt(t); },
          py::arg("transcript"));
    m.def(
        "build_emotion_label_prompt",
        [](const std::string& t, const std::vector<std::string>& labels) { return build_emotion_label_prompt(t, labels); },
        py::arg("transcript"), py::arg("labels") = default_emotion_labels());
    m.def("default_emotion_labels", [] { return default_emotion_labels(); });
    m.def("parse_emotion_label", &parse_emotion_label, py::arg("answer"), py::arg("labels") = default_emotion_labels());
    m.def("parse_eis_word_answer", [](const std::string& a) {
        const auto w = parse_eis_word_answer(a);
        return std::vector<std::string>(w.begin(), w.end());
    });

    m.def(
        "selfcheck",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& r : selfcheck::run_all(seed)) {
                py::dict d;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["max_error"] = r.max_error;
                d["cases"] = r.cases;
                d["failure"] = r.failure;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 0);
}
