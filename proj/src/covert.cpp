#include "senmux/covert.hpp"

#include <algorithm>
#include <cmath>

namespace senmux {

void validate_params(const ChannelParams& p, const SensorSpec& spec) {
    if (p.pulse_width_us < 1)
        throw OutOfRangeError("pulse width must be positive");
    if (!(p.epsilon > 0.0) || p.epsilon >= 1.0)
        throw OutOfRangeError("band tolerance must lie in (0, 1)");
    if (!(p.t_end_us < p.t_sync_us && p.t_sync_us < p.t_tr_us && p.t_tr_us < p.t_c_us))
        throw HierarchyViolationError(
            "channel periods must satisfy end < sync < bit-1 < carrier");
    const double lo = 0.9 * static_cast<double>(spec.min_period_us);
    const double hi = 1.1 * static_cast<double>(spec.max_period_us);
    for (std::uint64_t period : {p.t_end_us, p.t_sync_us, p.t_tr_us, p.t_c_us}) {
        double v = static_cast<double>(period);
        if (v < lo || v > hi)
            throw OutOfRangeError("channel period " + std::to_string(period) +
                                  " outside the sensor's usable range");
    }
    try {
        BandSet check({{"end", p.t_end_us},
                       {"sync", p.t_sync_us},
                       {"tr", p.t_tr_us},
                       {"carrier", p.t_c_us}},
                      p.epsilon);
    } catch (const AmbiguousBandsError& e) {
        throw BandOverlapError(e.what());
    }
}

bool meets_pulse_floor(const ChannelParams& params) {
    return params.pulse_width_us >= 4 * params.t_c_us;
}

Transmitter::Transmitter(SensorStack& stack, ChannelParams params, std::string app_id)
    : stack_(stack), params_(std::move(params)), app_id_(std::move(app_id)) {}

void Transmitter::do_register(std::uint64_t period_us) {
    active_ = stack_.register_listener(app_id_, params_.sensor, period_us);
    trace_.push_back(TxAction{stack_.engine().now(), true, period_us});
}

void Transmitter::do_unregister() {
    std::uint64_t period = active_->requested_period_us;
    stack_.unregister_listener(*active_);
    active_.reset();
    trace_.push_back(TxAction{stack_.engine().now(), false, period});
}

void Transmitter::start(const std::string& bits, SimTime at) {
    if (state_ != TxState::Idle)
        throw std::logic_error("transmitter already started");
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bit-string may only contain '0' and '1'");
    }
    Engine& engine = stack_.engine();
    const std::uint64_t w = params_.pulse_width_us;
    const std::uint64_t h = params_.hold_us();
    const std::uint64_t n = bits.size();

    engine.schedule(at, [this] {
        state_ = TxState::Syncing;
        do_register(params_.t_sync_us);
    });
    const SimTime data_start = advance(at, h);
    engine.schedule(data_start, [this] { do_unregister(); });
    for (std::uint64_t i = 0; i < n; ++i) {
        bool one = bits[i] == '1';
        engine.schedule(advance(data_start, i * w), [this, i, one] {
            state_ = TxState::SendingBit;
            bit_index_ = i;
            // Runs of equal bits keep one registration alive.
            if (one && !active_)
                do_register(params_.t_tr_us);
            else if (!one && active_)
                do_unregister();
        });
    }
    const SimTime end_start = advance(data_start, n * w);
    engine.schedule(end_start, [this] {
        if (active_)
            do_unregister();
        state_ = TxState::Ending;
        do_register(params_.t_end_us);
    });
    engine.schedule(advance(end_start, h), [this] {
        do_unregister();
        state_ = TxState::Done;
        finished_at_ = stack_.engine().now();
    });
}

Receiver::Receiver(ChannelParams params, int confirm)
    : params_(std::move(params)), confirm_(confirm) {
    if (confirm_ < 1)
        throw std::invalid_argument("confirm count must be at least 1");
}

Receiver::GapKind Receiver::classify(std::uint64_t gap_us) const {
    if (within_band(gap_us, params_.t_sync_us, params_.epsilon))
        return GapKind::Sync;
    if (within_band(gap_us, params_.t_end_us, params_.epsilon))
        return GapKind::End;
    if (within_band(gap_us, params_.t_tr_us, params_.epsilon))
        return GapKind::Tr;
    if (within_band(gap_us, params_.t_c_us, params_.epsilon))
        return GapKind::C;
    return GapKind::None;
}

void Receiver::on_event(const SensorEvent& event) {
    if (!prev_event_) {
        prev_event_ = event.timestamp;
        return;
    }
    std::uint64_t gap = span_us(*prev_event_, event.timestamp);
    prev_event_ = event.timestamp;
    process_gap(gap, event.timestamp);
}

void Receiver::process_gap(std::uint64_t gap_us, SimTime close) {
    GapKind kind = classify(gap_us);
    switch (state_) {
    case RxState::Listening:
        if (kind == GapKind::Sync) {
            last_sync_close_ = close;
            if (++sync_run_ >= confirm_) {
                state_ = RxState::Synced;
                synced_at_ = close;
                nonsync_run_ = 0;
                departure_gaps_.clear();
            }
        } else {
            sync_run_ = 0;
        }
        break;
    case RxState::Synced:
        if (kind == GapKind::Sync) {
            last_sync_close_ = close;
            nonsync_run_ = 0;
            departure_gaps_.clear();
        } else if (kind != GapKind::None) {
            // Unclassifiable gaps (drop doublings, settle transients) stay
            // neutral so they can neither fake nor break the departure.
            departure_gaps_.emplace_back(gap_us, close);
            if (++nonsync_run_ >= confirm_)
                enter_receiving();
        }
        break;
    case RxState::Receiving:
        receiving_gap(gap_us, kind, close);
        break;
    case RxState::EndSeen:
        if (kind == GapKind::End) {
            post_end_run_ = 0;
        } else if (kind != GapKind::None) {
            if (++post_end_run_ >= confirm_) {
                state_ = RxState::Complete;
                completed_at_ = close;
            }
        }
        break;
    case RxState::Complete:
        break;
    }
}

void Receiver::enter_receiving() {
    state_ = RxState::Receiving;
    // Bit windows are anchored where the stream was last seen on the sync
    // band; the departure happened inside the following gap.
    anchor_ = last_sync_close_;
    window_index_ = 0;
    votes_tr_ = 0;
    votes_c_ = 0;
    window_gaps_.clear();
    end_run_ = 0;
    auto replay = std::move(departure_gaps_);
    departure_gaps_.clear();
    for (const auto& [gap, close] : replay)
        receiving_gap(gap, classify(gap), close);
}

void Receiver::receiving_gap(std::uint64_t gap_us, GapKind kind, SimTime close) {
    std::uint64_t idx = span_us(anchor_, close) / params_.pulse_width_us;
    while (window_index_ < idx && state_ == RxState::Receiving) {
        finalize_window();
        ++window_index_;
    }
    if (kind == GapKind::End) {
        if (++end_run_ >= confirm_) {
            // The window in progress spans the post-amble, not data: drop it.
            state_ = RxState::EndSeen;
            post_end_run_ = 0;
        }
        return;
    }
    if (kind != GapKind::None)
        end_run_ = 0;
    if (kind == GapKind::Tr) {
        ++votes_tr_;
        window_gaps_.push_back(gap_us);
    } else if (kind == GapKind::C) {
        ++votes_c_;
        window_gaps_.push_back(gap_us);
    }
}

void Receiver::finalize_window() {
    char bit = '0';
    if (votes_tr_ > votes_c_) {
        bit = '1';
    } else if (votes_tr_ == votes_c_ && votes_tr_ > 0) {
        std::uint64_t med = median_gap_us(window_gaps_);
        std::uint64_t d_tr = med > params_.t_tr_us ? med - params_.t_tr_us : params_.t_tr_us - med;
        std::uint64_t d_c = med > params_.t_c_us ? med - params_.t_c_us : params_.t_c_us - med;
        bit = d_tr <= d_c ? '1' : '0';
    }
    bits_.push_back(bit);
    votes_tr_ = 0;
    votes_c_ = 0;
    window_gaps_.clear();
}

RxOutcome Receiver::outcome() const {
    return RxOutcome{bits_, synced_at_, completed_at_};
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::string random_bits(std::size_t length, Rng& rng) {
    std::string bits(length, '0');
    for (char& c : bits)
        c = rng.below(2) ? '1' : '0';
    return bits;
}

TransmissionReport run_channel(const std::string& bits, const ChannelParams& params,
                               const DeviceProfile& profile, MuxPolicy policy, std::uint64_t seed,
                               const ChannelRunOptions& options) {
    validate_params(params, profile.spec(params.sensor));

    Engine engine;
    SensorStack::Options stack_options;
    stack_options.policy = policy;
    SensorStack stack(engine, profile, stack_options, seed);

    Receiver rx(params, options.confirm);
    ListenerHandle rx_handle = stack.register_listener(
        "covert-rx", params.sensor, params.t_c_us,
        [&rx](const SensorEvent& e) { rx.on_event(e); });

    Transmitter tx(stack, params, "covert-tx");
    SimTime t0{options.tx_start_us};
    tx.start(bits, t0);

    const std::uint64_t nominal_span =
        3 * params.hold_us() + bits.size() * params.pulse_width_us;
    const SimTime horizon = advance(t0, nominal_span + options.extra_horizon_us);
    while (engine.now() < horizon && !rx.complete()) {
        SimTime chunk{std::min(horizon.us, engine.now().us + 250'000)};
        engine.run_until(chunk);
    }
    stack.unregister_listener(rx_handle);
    if (!rx.complete())
        throw ChannelFailureError(std::string("channel failure: ") +
                                  TimeoutError("no complete transmission within horizon").what());

    TransmissionReport report;
    report.sent = bits;
    report.received = rx.bits();
    report.edit_dist = edit_distance(report.sent, report.received);
    report.start = t0;
    report.end = rx.outcome().completed_at;
    report.bit_rate_bps =
        bits.empty() ? 0.0
                     : static_cast<double>(bits.size()) / to_seconds(span_us(t0, report.end));
    return report;
}

} // namespace senmux
