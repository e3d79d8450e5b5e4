#pragma once

#include "semtts/matrix.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace semtts {

enum class GlobalStrategy { ave, pca, last, eis_word, eis_sentence };
enum class SequenceKind { tex, pho };

std::string_view to_string(GlobalStrategy s) noexcept;
std::string_view to_string(SequenceKind k) noexcept;

/// One vector summarizing a sentence, fused into every acoustic position.
struct GlobalToken {
    GlobalStrategy strategy = GlobalStrategy::ave;
    std::vector<double> vector;
};

/// Per-token hidden states of the text or phoneme form, fused by attention.
struct SemanticSequence {
    SequenceKind kind = SequenceKind::tex;
    Matrix matrix;
};

/// Column mean of the hidden states.
GlobalToken extract_ave(const Matrix& h);

/// Hidden state of the final token.
GlobalToken extract_last(const Matrix& h);

/// Leading principal axis of the token states, rescaled to their value range.
///
/// Rows are treated as samples. The axis is the unit eigenvector of the
/// sample covariance with the largest eigenvalue, signed so its largest
/// magnitude entry is positive, then mapped affinely so its min and max
/// coincide with the min and max over all entries of `h`.
///
/// Throws DegenerateInputError for fewer than two rows, identical rows, or
/// an axis with no spread to rescale.
GlobalToken extract_pca(const Matrix& h);

/// The sign-fixed, unit-norm leading axis before rescaling.
std::vector<double> principal_axis(const Matrix& h);

/// Mean over the answer tokens of the three one-word answers
/// (emotion, intention, speaking style) taken together.
GlobalToken extract_eis_word(const Matrix& emotion, const Matrix& intention, const Matrix& style);

/// Mean over the answer tokens of a one-sentence description.
GlobalToken extract_eis_sentence(const Matrix& answer);

SemanticSequence make_sequence(const Matrix& h, SequenceKind kind);

std::optional<GlobalStrategy> parse_global_strategy(std::string_view name) noexcept;
std::optional<SequenceKind> parse_sequence_kind(std::string_view name) noexcept;

} // namespace semtts
