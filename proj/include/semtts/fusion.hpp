#pragma once

#include "semtts/matrix.hpp"
#include "semtts/strategies.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace semtts {

/// Linear map from the semantic width to the acoustic model width.
struct ProjectionMatrix {
    Matrix w; ///< d_out x d_in

    std::size_t d_out() const noexcept { return w.rows(); }
    std::size_t d_in() const noexcept { return w.cols(); }

    /// Seeded uniform init in [-1/sqrt(d_in), 1/sqrt(d_in)].
    static ProjectionMatrix seeded(std::size_t d_out, std::size_t d_in, std::uint64_t seed);
};

struct FusionConfig {
    std::optional<double> gamma; ///< temperature; sqrt(d) when unset
    double mask_fill = -6e4;
    double dropout_p = 0.1;      ///< only applied when train_mode is set
    std::uint64_t rng_seed = 0;
    bool train_mode = false;

    double effective_gamma(std::size_t d) const;
    void validate() const;
};

/// Optional validity masks; true marks a valid position.
struct MaskPair {
    std::optional<std::vector<bool>> tgt_mask; ///< per query row (length t)
    std::optional<std::vector<bool>> src_mask; ///< per key row (length m)

    /// Prefix masks for padded sequences with the given valid lengths.
    static MaskPair from_lengths(std::optional<std::size_t> t_valid, std::size_t t,
                                 std::optional<std::size_t> m_valid, std::size_t m);
};

struct FusedEmbedding {
    Matrix matrix;                  ///< t x d
    std::optional<Matrix> attention; ///< t x m, sequential fusion only
};

struct FusionGrads {
    Matrix grad_q;  ///< t x d
    Matrix grad_kv; ///< m x d
};

std::vector<double> project(const ProjectionMatrix& w, std::span<const double> x);
std::vector<double> project(const ProjectionMatrix& w, const GlobalToken& token);
Matrix project(const ProjectionMatrix& w, const Matrix& x);
Matrix project(const ProjectionMatrix& w, const SemanticSequence& seq);

/// Adds the projected global token to every acoustic position.
FusedEmbedding fuse_global(const Matrix& acoustic, std::span<const double> token);

/// Scaled dot-product attention with the acoustic sequence as queries and the
/// projected semantic sequence as both keys and values.
///
/// Scores q k^T / gamma at masked keys are replaced by `mask_fill` before the
/// row softmax. Query rows masked out by `tgt_mask` produce zero attention and
/// zero output. In train mode with dropout_p > 0, attention weights are
/// dropped with a generator seeded from `rng_seed` and survivors scaled by
/// 1 / (1 - p). Throws DegenerateInputError when no key is valid.
FusedEmbedding fuse_sequential(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks = {});

/// Gradients of sum(grad_out * fuse_sequential(q, kv).matrix) in eval mode.
/// kv feeds both the key and value paths, so grad_kv carries both terms.
FusionGrads fuse_sequential_backward(const Matrix& q, const Matrix& kv, const FusionConfig& cfg,
                                     const MaskPair& masks, const Matrix& grad_out);

} // namespace semtts
