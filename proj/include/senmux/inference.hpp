// Sampling-period inference from inter-event gaps: median-based period
// estimation, tolerance-band classification, and a streaming detector for
// confirmed transitions between frequency bands.
#pragma once

#include "senmux/sim_time.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace senmux {

class EmptyWindowError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class AmbiguousBandsError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct PeriodEstimate {
    std::uint64_t period_us = 0;
    std::size_t window_size = 0;
    SimTime as_of{};
};

// Median of the gap list (robust to drop-induced double gaps); even-sized
// lists use the rounded mean of the two middle values.
PeriodEstimate infer_period(const std::vector<std::uint64_t>& recent_gaps_us,
                            SimTime as_of = SimTime{});

std::uint64_t median_gap_us(const std::vector<std::uint64_t>& gaps_us);

// Labelled period centers with a shared relative tolerance; centers must be
// pairwise separated so that the ±epsilon intervals never overlap.
class BandSet {
public:
    struct Entry {
        std::string label;
        std::uint64_t center_us = 0;
    };

    BandSet(std::vector<Entry> bands, double epsilon = 0.1);

    // Unique label whose ±epsilon interval contains the period, if any.
    const Entry* classify(std::uint64_t period_us) const;

    const std::vector<Entry>& bands() const { return bands_; }
    double epsilon() const { return epsilon_; }

private:
    std::vector<Entry> bands_;
    double epsilon_;
};

std::optional<std::string> classify_band(const PeriodEstimate& estimate, const BandSet& bands);

// Whether a period falls within label's ±epsilon interval of the center.
bool within_band(std::uint64_t period_us, std::uint64_t center_us, double epsilon);

struct Transition {
    std::string label;
    SimTime at{}; // close of the first gap of the confirming run
};

// Streaming transition detector: emits a transition once `confirm`
// consecutive classified gaps agree on a label different from the current
// stable label.  Unclassifiable gaps are neutral (they neither extend nor
// break a run); a gap classified as the stable label clears any pending
// candidate.  The first confirmed label initializes the stable label without
// emitting.
class TransitionDetector {
public:
    TransitionDetector(BandSet bands, int confirm = 2);

    std::optional<Transition> feed(std::uint64_t gap_us, SimTime gap_close);

    const std::optional<std::string>& stable_label() const { return stable_; }
    const BandSet& bands() const { return bands_; }

private:
    BandSet bands_;
    int confirm_;
    std::optional<std::string> stable_;
    std::string candidate_;
    int run_length_ = 0;
    SimTime run_first_close_{};
};

} // namespace senmux
