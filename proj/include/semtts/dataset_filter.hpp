#pragma once

#include "semtts/manifest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semtts {

struct SplitSpec {
    double train_fraction = 0.8;
    double dev_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
    /// Partition by summed `duration` (seconds) instead of record count.
    bool by_duration = false;

    void validate() const;
};

struct Split {
    std::vector<UtteranceRecord> train, dev, test;
};

struct FilterResult {
    std::vector<UtteranceRecord> kept;
    std::size_t dropped_missing = 0; ///< records lacking a needed field
};

/// Records whose `speaker` extra field equals `speaker_id`, order preserved.
FilterResult filter_by_speaker(const std::vector<UtteranceRecord>& records, const std::string& speaker_id);

/// Records whose annotated and predicted emotions agree after trimming and
/// lowercasing. Records missing either label are dropped and counted.
FilterResult filter_by_emotion_agreement(const std::vector<UtteranceRecord>& records);

/// Seeded Fisher-Yates shuffle, then contiguous train/dev/test partition.
///
/// Count mode floors train and dev sizes and gives the remainder to test.
/// Duration mode fills train, then dev, with the longest prefixes whose summed
/// `duration` stays within their cumulative share; every record needs a
/// numeric `duration` there.
Split split(const std::vector<UtteranceRecord>& records, const SplitSpec& spec);

} // namespace semtts
