#include "senmux/inference.hpp"

#include <algorithm>
#include <cmath>

namespace senmux {

std::uint64_t median_gap_us(const std::vector<std::uint64_t>& gaps_us) {
    if (gaps_us.empty())
        throw EmptyWindowError("cannot infer a period from zero gaps");
    std::vector<std::uint64_t> sorted(gaps_us);
    std::sort(sorted.begin(), sorted.end());
    std::size_t n = sorted.size();
    if (n % 2 == 1)
        return sorted[n / 2];
    std::uint64_t lo = sorted[n / 2 - 1];
    std::uint64_t hi = sorted[n / 2];
    return lo + (hi - lo + 1) / 2; // rounded midpoint, overflow-safe
}

PeriodEstimate infer_period(const std::vector<std::uint64_t>& recent_gaps_us, SimTime as_of) {
    PeriodEstimate est;
    est.period_us = median_gap_us(recent_gaps_us);
    est.window_size = recent_gaps_us.size();
    est.as_of = as_of;
    return est;
}

bool within_band(std::uint64_t period_us, std::uint64_t center_us, double epsilon) {
    double c = static_cast<double>(center_us);
    double p = static_cast<double>(period_us);
    return std::abs(p - c) <= epsilon * c;
}

BandSet::BandSet(std::vector<Entry> bands, double epsilon)
    : bands_(std::move(bands)), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw AmbiguousBandsError("band tolerance must lie in (0, 1)");
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        if (bands_[i].center_us == 0)
            throw AmbiguousBandsError("band center must be positive: " + bands_[i].label);
        for (std::size_t j = i + 1; j < bands_.size(); ++j) {
            double lo_i = bands_[i].center_us * (1.0 - epsilon_);
            double hi_i = bands_[i].center_us * (1.0 + epsilon_);
            double lo_j = bands_[j].center_us * (1.0 - epsilon_);
            double hi_j = bands_[j].center_us * (1.0 + epsilon_);
            if (hi_i >= lo_j && hi_j >= lo_i)
                throw AmbiguousBandsError("tolerance intervals overlap: " + bands_[i].label +
                                          " and " + bands_[j].label);
        }
    }
}

const BandSet::Entry* BandSet::classify(std::uint64_t period_us) const {
    for (const Entry& b : bands_) {
        if (within_band(period_us, b.center_us, epsilon_))
            return &b;
    }
    return nullptr;
}

std::optional<std::string> classify_band(const PeriodEstimate& estimate, const BandSet& bands) {
    const BandSet::Entry* e = bands.classify(estimate.period_us);
    if (!e)
        return std::nullopt;
    return e->label;
}

TransitionDetector::TransitionDetector(BandSet bands, int confirm)
    : bands_(std::move(bands)), confirm_(confirm) {
    if (confirm_ < 1)
        throw std::invalid_argument("confirm count must be at least 1");
}

std::optional<Transition> TransitionDetector::feed(std::uint64_t gap_us, SimTime gap_close) {
    const BandSet::Entry* entry = bands_.classify(gap_us);
    if (!entry)
        return std::nullopt; // unclassifiable gaps are neutral
    if (stable_ && entry->label == *stable_) {
        run_length_ = 0;
        return std::nullopt;
    }
    if (run_length_ > 0 && candidate_ == entry->label) {
        ++run_length_;
    } else {
        candidate_ = entry->label;
        run_length_ = 1;
        run_first_close_ = gap_close;
    }
    if (run_length_ < confirm_)
        return std::nullopt;
    bool had_stable = stable_.has_value();
    stable_ = candidate_;
    run_length_ = 0;
    if (!had_stable)
        return std::nullopt; // first confirmed label just initializes
    return Transition{*stable_, run_first_close_};
}

} // namespace senmux
