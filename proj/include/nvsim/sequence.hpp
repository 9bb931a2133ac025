#pragma once

// Pulse protocols as ordered constant-drive segments, and their execution.

#include "nvsim/error.hpp"
#include "nvsim/model.hpp"
#include "nvsim/propagator.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace nvsim {

enum class Spin { Ms0, Ms1 };
enum class Charge { Negative, Neutral };
enum class Channel { Red, IR };

inline std::string_view to_string(Spin s) noexcept { return s == Spin::Ms0 ? "ms0" : "ms1"; }
inline std::string_view to_string(Charge c) noexcept { return c == Charge::Negative ? "negative" : "neutral"; }
inline std::string_view to_string(Channel c) noexcept { return c == Channel::Red ? "red" : "ir"; }

inline Spin parse_spin(std::string_view text)
{
    if (text == "ms0" || text == "0") return Spin::Ms0;
    if (text == "ms1" || text == "1") return Spin::Ms1;
    throw ValidationError("spin must be ms0|ms1 (got '" + std::string(text) + "')");
}

inline Charge parse_charge(std::string_view text)
{
    if (text == "negative") return Charge::Negative;
    if (text == "neutral") return Charge::Neutral;
    throw ValidationError("charge must be negative|neutral (got '" + std::string(text) + "')");
}

struct PulseSegment {
    double duration = 0.0;    // us
    double green_power = 0.0; // mW
    double ir_power = 0.0;    // mW
    bool collect_red = false;
    bool collect_ir = false;

    void validate() const
    {
        detail::require(std::isfinite(duration) && duration > 0.0,
                        "segment duration must be finite and > 0 (got " + std::to_string(duration) + ")");
        detail::require_non_negative(green_power, "segment green_power");
        detail::require_non_negative(ir_power, "segment ir_power");
    }

    bool operator==(const PulseSegment&) const = default;
};

struct PulseSequence {
    std::vector<PulseSegment> segments;
    int repetitions = 1;
    Spin initial_spin = Spin::Ms0;
    Charge initial_charge = Charge::Negative;

    void validate() const
    {
        detail::require(!segments.empty(), "pulse sequence has no segments");
        detail::require(repetitions >= 1, "repetitions must be >= 1");
        for (const auto& s : segments) {
            s.validate();
        }
    }

    double pass_duration() const
    {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }

    double total_duration() const { return pass_duration() * repetitions; }

    /// IR if any segment collects IR, otherwise red.
    Channel active_channel() const
    {
        for (const auto& s : segments) {
            if (s.collect_ir) return Channel::IR;
        }
        return Channel::Red;
    }

    bool operator==(const PulseSequence&) const = default;
};

inline PopulationState initial_state(Spin spin, Charge charge)
{
    if (charge == Charge::Neutral) {
        return PopulationState::unit(Level::NeutralGround);
    }
    return PopulationState::unit(spin == Spin::Ms0 ? Level::TripletGround0 : Level::TripletGround1);
}

struct SequenceOutcome {
    PopulationState state;
    EmissionAccumulator emitted;
    std::vector<EmissionAccumulator> per_pass;
};

/// Everything needed to turn a segment's drive into a generator.
struct ModelContext {
    RateSet rates;
    ModelOptions options;
    double purcell = 1.0;

    ModelContext(const RateSet& rs, const EnvironmentProfile& env, double purcell_factor,
                 const ModelOptions& opts = {})
        : rates(env.apply(rs)), options(opts), purcell(purcell_factor)
    {
    }

    GeneratorMatrix generator(const PulseSegment& seg) const
    {
        return build_generator(rates, DriveSettings{seg.green_power, seg.ir_power, purcell}, options);
    }
};

namespace detail {

inline std::vector<SegmentPropagator> segment_propagators(const PulseSequence& seq, const ModelContext& ctx)
{
    std::vector<SegmentPropagator> props;
    props.reserve(seq.segments.size());
    for (const auto& seg : seq.segments) {
        props.emplace_back(ctx.generator(seg), seg.duration);
    }
    return props;
}

} // namespace detail

/// Runs every repetition back to back from the sequence's initial state.
/// Counts accrue only on segments whose collect flag is set.
inline SequenceOutcome run_sequence(const PulseSequence& seq, const RateSet& rs, const EnvironmentProfile& env,
                                    double purcell, const ModelOptions& options = {})
{
    seq.validate();
    const ModelContext ctx(rs, env, purcell, options);
    const auto props = detail::segment_propagators(seq, ctx);

    SequenceOutcome out;
    out.state = initial_state(seq.initial_spin, seq.initial_charge);
    out.per_pass.reserve(static_cast<std::size_t>(seq.repetitions));
    for (int rep = 0; rep < seq.repetitions; ++rep) {
        EmissionAccumulator pass;
        for (std::size_t i = 0; i < seq.segments.size(); ++i) {
            const Propagation step = props[i].apply(out.state);
            out.state = step.state;
            if (seq.segments[i].collect_red) pass.red += step.emitted.red;
            if (seq.segments[i].collect_ir) pass.ir += step.emitted.ir;
        }
        out.emitted += pass;
        out.per_pass.push_back(pass);
    }
    return out;
}

/// Snapshots across the whole sequence, samples_per_segment per segment
/// (segment endpoints included once). Cumulative counts honour collect flags.
inline std::vector<TraceSample> trace_sequence(const PulseSequence& seq, const RateSet& rs,
                                               const EnvironmentProfile& env, double purcell,
                                               std::size_t samples_per_segment, const ModelOptions& options = {})
{
    seq.validate();
    detail::require(samples_per_segment >= 2, "trace needs at least 2 samples per segment");
    const ModelContext ctx(rs, env, purcell, options);

    std::vector<TraceSample> out;
    PopulationState state = initial_state(seq.initial_spin, seq.initial_charge);
    EmissionAccumulator cumulative;
    double t0 = 0.0;
    out.push_back({0.0, state, cumulative});
    for (int rep = 0; rep < seq.repetitions; ++rep) {
        for (const auto& seg : seq.segments) {
            const auto samples = propagate_trace(state, ctx.generator(seg), seg.duration, samples_per_segment);
            for (std::size_t k = 1; k < samples.size(); ++k) {
                EmissionAccumulator c = cumulative;
                if (seg.collect_red) c.red += samples[k].cumulative.red;
                if (seg.collect_ir) c.ir += samples[k].cumulative.ir;
                out.push_back({t0 + samples[k].t_us, samples[k].state, c});
            }
            state = samples.back().state;
            cumulative = out.back().cumulative;
            t0 += seg.duration;
        }
    }
    return out;
}

/// Conventional readout: one green pulse, red fluorescence collected.
inline PulseSequence red_readout_protocol(double green_power, double duration)
{
    PulseSegment seg{duration, green_power, 0.0, true, false};
    seg.validate();
    return PulseSequence{{seg}, 1, Spin::Ms0, Charge::Negative};
}

struct IrProtocolParams {
    double green_power = 0.2;    // mW
    double green_duration = 0.3; // us
    double tau = 0.01;           // us
    double ir_power = 1000.0;    // mW
    double ir_duration = 1.0;    // us
    int repetitions = 3;
    bool collect_red_during_pump = false;
};

/// Singlet readout: green pump, dark delay, IR probe collecting 1042 nm
/// photons. A zero delay drops the dark segment.
inline PulseSequence ir_readout_protocol(const IrProtocolParams& p)
{
    detail::require(std::isfinite(p.tau) && p.tau >= 0.0, "tau must be finite and >= 0");
    detail::require(p.repetitions >= 1, "repetitions must be >= 1");
    PulseSequence seq;
    seq.repetitions = p.repetitions;
    seq.segments.push_back({p.green_duration, p.green_power, 0.0, p.collect_red_during_pump, false});
    if (p.tau > 0.0) {
        seq.segments.push_back({p.tau, 0.0, 0.0, false, false});
    }
    seq.segments.push_back({p.ir_duration, 0.0, p.ir_power, false, true});
    seq.validate();
    return seq;
}

inline PulseSequence ir_readout_protocol(double green_power, double green_duration, double tau, double ir_power,
                                         double ir_duration, int repetitions)
{
    return ir_readout_protocol(IrProtocolParams{green_power, green_duration, tau, ir_power, ir_duration, repetitions});
}

struct PumpCalibration {
    double green_power = 0.0;  // mW
    double shelved_ms0 = 0.0;  // singlet-ground population after pump + delay
    double shelved_ms1 = 0.0;
    double difference() const { return shelved_ms1 - shelved_ms0; }
};

/// Green pump power that maximizes the singlet-ground population difference
/// between the two spin preparations after pump and delay. Log-spaced scan
/// followed by golden-section refinement in log power.
inline PumpCalibration calibrate_pump(const RateSet& rs, const EnvironmentProfile& env, double green_duration,
                                      double tau, double min_power = 1e-3, double max_power = 1e2,
                                      const ModelOptions& options = {})
{
    detail::require(std::isfinite(green_duration) && green_duration > 0.0, "green_duration must be > 0");
    detail::require(std::isfinite(tau) && tau >= 0.0, "tau must be >= 0");
    detail::require(min_power > 0.0 && max_power > min_power, "pump power range must satisfy 0 < min < max");

    auto shelved = [&](double power) {
        PulseSequence seq;
        seq.segments.push_back({green_duration, power, 0.0, false, false});
        if (tau > 0.0) seq.segments.push_back({tau, 0.0, 0.0, false, false});
        PumpCalibration c;
        c.green_power = power;
        seq.initial_spin = Spin::Ms0;
        c.shelved_ms0 = run_sequence(seq, rs, env, 1.0, options).state[Level::SingletGround];
        seq.initial_spin = Spin::Ms1;
        c.shelved_ms1 = run_sequence(seq, rs, env, 1.0, options).state[Level::SingletGround];
        return c;
    };

    constexpr int kScanPoints = 101;
    const double lo = std::log(min_power);
    const double hi = std::log(max_power);
    const double step = (hi - lo) / (kScanPoints - 1);
    int best = 0;
    PumpCalibration best_cal = shelved(min_power);
    for (int i = 1; i < kScanPoints; ++i) {
        const PumpCalibration c = shelved(std::exp(lo + step * i));
        if (c.difference() > best_cal.difference()) {
            best = i;
            best_cal = c;
        }
    }

    double a = lo + step * std::max(best - 1, 0);
    double b = lo + step * std::min(best + 1, kScanPoints - 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    PumpCalibration c1 = shelved(std::exp(x1));
    PumpCalibration c2 = shelved(std::exp(x2));
    for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
        if (c1.difference() >= c2.difference()) {
            b = x2;
            x2 = x1;
            c2 = c1;
            x1 = b - inv_phi * (b - a);
            c1 = shelved(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            c1 = c2;
            x2 = a + inv_phi * (b - a);
            c2 = shelved(std::exp(x2));
        }
    }
    for (const PumpCalibration& c : {c1, c2}) {
        if (c.difference() > best_cal.difference()) best_cal = c;
    }
    return best_cal;
}

} // namespace nvsim
