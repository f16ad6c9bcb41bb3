// Frequency-shift-keyed covert channel over the shared sensor stack.
//
// The transmitter modulates the multiplexed sampling rate by registering and
// unregistering listeners at distinguished periods; the receiver holds a
// slow carrier listener and decodes rate changes from inter-event gaps:
//
//   T_end < T_sync < T_tr < T_c   (periods; the frequency order is reversed)
//
// Transmission timeline starting at t0 with pulse width w and hold h (2w by
// default): syncword listener on [t0, t0+h); bit i drives T_tr during
// [t0+h+i*w, t0+h+(i+1)*w) when 1 and nothing when 0 (runs of 1s hold one
// registration); post-amble listener at T_end on [t0+h+n*w, t0+h+n*w+h).
#pragma once

#include "senmux/inference.hpp"
#include "senmux/stack.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace senmux {

class HierarchyViolationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class BandOverlapError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class OutOfRangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
// Raised by whole-channel runs when the receiver never completes.
class ChannelFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelParams {
    Sensor sensor = Sensor::AC;
    std::uint64_t t_c_us = 0;    // receiver carrier period
    std::uint64_t t_tr_us = 0;   // bit-1 period
    std::uint64_t t_sync_us = 0; // syncword period
    std::uint64_t t_end_us = 0;  // post-amble period
    std::uint64_t pulse_width_us = 0;
    double epsilon = 0.1;
    std::uint64_t sync_hold_us = 0; // 0 means the default of 2 pulse widths

    std::uint64_t hold_us() const { return sync_hold_us ? sync_hold_us : 2 * pulse_width_us; }
};

// Ordering, supported-range, and band-separation checks.
void validate_params(const ChannelParams& params, const SensorSpec& spec);

// Reliability floor: windows shorter than a few carrier periods cannot be
// decided by gap majority.  validate_params does not enforce it, so a single
// run can still chart the failure region; the sweep harness skips grid
// widths below the floor.
bool meets_pulse_floor(const ChannelParams& params);

enum class TxState { Idle, Syncing, SendingBit, Ending, Done };

struct TxAction {
    SimTime at{};
    bool registered = false; // true = listener added, false = removed
    std::uint64_t period_us = 0;
};
using TxTrace = std::vector<TxAction>;

class Transmitter {
public:
    Transmitter(SensorStack& stack, ChannelParams params, std::string app_id = "covert-tx");

    // Schedules the entire transmission on the stack's engine; bits must be
    // a string of '0'/'1'.
    void start(const std::string& bits, SimTime at);

    TxState state() const { return state_; }
    const TxTrace& trace() const { return trace_; }
    // First instant after which the stack is back to carrier-only.
    SimTime finished_at() const { return finished_at_; }

private:
    void do_register(std::uint64_t period_us);
    void do_unregister();

    SensorStack& stack_;
    ChannelParams params_;
    std::string app_id_;
    TxState state_ = TxState::Idle;
    std::size_t bit_index_ = 0;
    TxTrace trace_;
    SimTime finished_at_{};
    std::optional<ListenerHandle> active_;
};

enum class RxState { Listening, Synced, Receiving, EndSeen, Complete };

struct RxOutcome {
    std::string bits;
    SimTime synced_at{};
    SimTime completed_at{};
};

// Online decoder fed with the receiver listener's events.  Decoding:
// confirmed syncword gaps arm the receiver; departure from the sync band
// anchors bit windows of width w; each window takes a majority vote between
// T_tr and T_c gap classifications (ties go to the side whose period is
// closer to the window's median gap; a voteless window decodes as 0);
// a confirmed post-amble run ends the data phase, discarding the window in
// progress, and the transmission completes once the stream is observed back
// off the post-amble band.
class Receiver {
public:
    Receiver(ChannelParams params, int confirm = 2);

    void on_event(const SensorEvent& event);

    RxState state() const { return state_; }
    bool complete() const { return state_ == RxState::Complete; }
    const std::string& bits() const { return bits_; }
    RxOutcome outcome() const; // valid once complete

private:
    enum class GapKind { None, Sync, End, Tr, C };

    GapKind classify(std::uint64_t gap_us) const;
    void process_gap(std::uint64_t gap_us, SimTime close);
    void enter_receiving();
    void receiving_gap(std::uint64_t gap_us, GapKind kind, SimTime close);
    void finalize_window();

    ChannelParams params_;
    int confirm_;
    RxState state_ = RxState::Listening;

    std::optional<SimTime> prev_event_;
    SimTime last_sync_close_{};
    int sync_run_ = 0;
    int nonsync_run_ = 0;
    std::vector<std::pair<std::uint64_t, SimTime>> departure_gaps_;

    SimTime anchor_{};
    std::uint64_t window_index_ = 0;
    int votes_tr_ = 0;
    int votes_c_ = 0;
    std::vector<std::uint64_t> window_gaps_;
    int end_run_ = 0;
    int post_end_run_ = 0;

    std::string bits_;
    SimTime synced_at_{};
    SimTime completed_at_{};
};

// Levenshtein distance between two strings (insertions, deletions,
// substitutions all cost 1).
std::size_t edit_distance(const std::string& a, const std::string& b);

struct TransmissionReport {
    std::string sent;
    std::string received;
    std::size_t edit_dist = 0;
    SimTime start{}; // transmitter side, immediately before the syncword
    SimTime end{};   // receiver side, after the post-amble completed
    double bit_rate_bps = 0.0;
};

struct ChannelRunOptions {
    std::uint64_t tx_start_us = 500'000;
    std::uint64_t extra_horizon_us = 5'000'000; // grace past the nominal end
    int confirm = 2;
};

// Wires a fresh engine + stack, runs one transmission to completion, and
// reports.  Throws ChannelFailureError when the receiver never completes
// within the horizon.
TransmissionReport run_channel(const std::string& bits, const ChannelParams& params,
                               const DeviceProfile& profile, MuxPolicy policy, std::uint64_t seed,
                               const ChannelRunOptions& options = {});

// Random '0'/'1' string of the given length.
std::string random_bits(std::size_t length, Rng& rng);

} // namespace senmux
