#include "semtts/dataset_filter.hpp"

#include "semtts/errors.hpp"
#include "semtts/prompts.hpp"
#include "semtts/random.hpp"

#include <cmath>
#include <numeric>

namespace semtts {

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && dev_fraction > 0.0 && test_fraction > 0.0)) {
        throw ValidationError("split fractions must be positive");
    }
    const double sum = train_fraction + dev_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("split fractions must sum to 1");
}

FilterResult filter_by_speaker(const std::vector<UtteranceRecord>& records, const std::string& speaker_id) {
    FilterResult out;
    for (const auto& rec : records) {
        const auto speaker = rec.extra_string("speaker");
        if (!speaker) {
            ++out.dropped_missing;
            continue;
        }
        if (*speaker == speaker_id) out.kept.push_back(rec);
    }
    return out;
}

FilterResult filter_by_emotion_agreement(const std::vector<UtteranceRecord>& records) {
    FilterResult out;
    for (const auto& rec : records) {
        if (!rec.emotion_annotated || !rec.emotion_predicted) {
            ++out.dropped_missing;
            continue;
        }
        if (normalize_label(*rec.emotion_annotated) == normalize_label(*rec.emotion_predicted)) out.kept.push_back(rec);
    }
    return out;
}

Split split(const std::vector<UtteranceRecord>& records, const SplitSpec& spec) {
    spec.validate();
    if (records.size() < 3) {
        throw DegenerateInputError("need at least 3 records to split, got " + std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(spec.seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    std::size_t n_train = 0, n_dev = 0;
    if (spec.by_duration) {
        std::vector<double> durations(records.size());
        double total = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto& rec = records[order[k]];
            const auto d = rec.extra_number("duration");
            if (!d || *d < 0.0) throw ValidationError("record '" + rec.utt_id + "' has no usable duration");
            durations[k] = *d;
            total += *d;
        }
        const double train_cap = spec.train_fraction * total;
        const double dev_cap = (spec.train_fraction + spec.dev_fraction) * total;
        double acc = 0.0;
        std::size_t k = 0;
        while (k < order.size() && acc + durations[k] <= train_cap * (1 + 1e-12)) acc += durations[k++];
        n_train = k;
        while (k < order.size() && acc + durations[k] <= dev_cap * (1 + 1e-12)) acc += durations[k++];
        n_dev = k - n_train;
    } else {
        const double n = static_cast<double>(records.size());
        // The epsilon keeps exact products such as 0.8 * 10 from flooring to 7.
        n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * n + 1e-9));
        n_dev = static_cast<std::size_t>(std::floor(spec.dev_fraction * n + 1e-9));
        n_dev = std::min(n_dev, records.size() - n_train);
    }

    Split out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& bucket = k < n_train ? out.train : (k < n_train + n_dev ? out.dev : out.test);
        bucket.push_back(records[order[k]]);
    }
    return out;
}

} // namespace semtts
