#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semtts::selfcheck {

struct SuiteResult {
    std::string name;
    bool passed = true;
    double max_error = 0.0; ///< worst observed value of the suite's checked quantity
    double threshold = 0.0;
    std::size_t cases = 0;
    std::string failure;    ///< first failing case, including its seed
    std::string note;
};

/// Analytic attention gradients against central differences (eps 1e-6).
SuiteResult gradient_suite(std::uint64_t seed, std::size_t instances = 100);
/// Row-stochastic weights, masked-key suppression, large-temperature uniformity.
SuiteResult attention_suite(std::uint64_t seed, std::size_t instances = 100);
/// Principal axis against a dense eigensolver, plus the rescale range contract.
SuiteResult pca_suite(std::uint64_t seed, std::size_t instances = 50);
/// Word-answer pooling equals averaging the concatenated answers.
SuiteResult eis_suite(std::uint64_t seed, std::size_t instances = 20);
/// Levenshtein totals against exhaustive shortest paths (length <= 6, 3 symbols).
SuiteResult edit_distance_suite();
/// Array write/read bitwise identity and canonical bytes.
SuiteResult roundtrip_suite(std::uint64_t seed, std::size_t instances = 1000);
/// Closed-form distortion anchor, identity, and DTW optimality vs. the diagonal.
SuiteResult mcd_suite(std::uint64_t seed, std::size_t instances = 50);

std::vector<SuiteResult> run_all(std::uint64_t seed);

std::string format_result(const SuiteResult& r);

} // namespace semtts::selfcheck
