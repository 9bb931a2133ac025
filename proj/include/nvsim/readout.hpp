#pragma once

// Shot-noise-limited figures of merit for a pair of spin preparations.

#include "nvsim/error.hpp"
#include "nvsim/model.hpp"
#include "nvsim/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nvsim {

struct ReadoutResult {
    double n0 = 0.0;          // expected emitted photons, ms=0 preparation
    double n1 = 0.0;          // expected emitted photons, ms=+-1 preparation
    double duration = 0.0;    // us, wall-clock length of the protocol
    Channel channel = Channel::Red;
    double collection_efficiency = 1.0;
    double detection_efficiency = 1.0;

    double efficiency() const noexcept { return collection_efficiency * detection_efficiency; }
    double detected_n0() const noexcept { return n0 * efficiency(); }
    double detected_n1() const noexcept { return n1 * efficiency(); }

    void validate() const
    {
        detail::require_non_negative(n0, "n0");
        detail::require_non_negative(n1, "n1");
        detail::require(collection_efficiency >= 0.0 && collection_efficiency <= 1.0,
                        "collection_efficiency must lie in [0, 1]");
        detail::require(detection_efficiency >= 0.0 && detection_efficiency <= 1.0,
                        "detection_efficiency must lie in [0, 1]");
    }
};

struct SnrValue {
    double value = 0.0;
    bool degenerate = false; // no photons at all: 0/0 reported as 0
};

/// |N0 - N1| / sqrt(N0 + N1).
inline SnrValue shot_noise_snr(double n0, double n1)
{
    const double total = n0 + n1;
    if (!(total > 0.0)) {
        return {0.0, true};
    }
    return {std::abs(n0 - n1) / std::sqrt(total), false};
}

inline SnrValue snr(const ReadoutResult& r)
{
    r.validate();
    return shot_noise_snr(r.detected_n0(), r.detected_n1());
}

/// SNR per sqrt(us) of protocol time.
inline double normalized_snr(const ReadoutResult& r)
{
    detail::require(std::isfinite(r.duration) && r.duration > 0.0, "normalized SNR needs a duration > 0");
    return snr(r).value / std::sqrt(r.duration);
}

struct SensitivityEstimate {
    double relative_sensitivity = 1.0; // < 1 is an improvement over the reference
};

/// Sensitivity scales as 1/SNR, so the ratio of sensitivities is ref/new.
inline SensitivityEstimate relative_sensitivity(double reference_snr, double new_snr)
{
    detail::require(std::isfinite(reference_snr) && reference_snr > 0.0, "reference SNR must be > 0");
    detail::require(std::isfinite(new_snr) && new_snr > 0.0, "new SNR must be > 0");
    return {reference_snr / new_snr};
}

struct Efficiencies {
    double collection = 1.0;
    double detection = 1.0;
};

/// Runs the protocol once per spin preparation and pairs the counts of the
/// given channel.
inline ReadoutResult readout_pair(const PulseSequence& protocol, Channel channel, const RateSet& rs,
                                  const EnvironmentProfile& env, double purcell, const ModelOptions& options = {},
                                  Efficiencies eff = {})
{
    PulseSequence seq = protocol;
    seq.initial_charge = Charge::Negative;
    auto counts = [&](Spin spin) {
        seq.initial_spin = spin;
        const EmissionAccumulator e = run_sequence(seq, rs, env, purcell, options).emitted;
        return channel == Channel::Red ? e.red : e.ir;
    };
    ReadoutResult r;
    r.n0 = counts(Spin::Ms0);
    r.n1 = counts(Spin::Ms1);
    r.duration = protocol.total_duration();
    r.channel = channel;
    r.collection_efficiency = eff.collection;
    r.detection_efficiency = eff.detection;
    // Round-off can leave a count a hair below zero when nothing is emitted.
    r.n0 = std::max(r.n0, 0.0);
    r.n1 = std::max(r.n1, 0.0);
    r.validate();
    return r;
}

inline ReadoutResult readout_pair(const PulseSequence& protocol, const RateSet& rs, const EnvironmentProfile& env,
                                  double purcell, const ModelOptions& options = {}, Efficiencies eff = {})
{
    return readout_pair(protocol, protocol.active_channel(), rs, env, purcell, options, eff);
}

} // namespace nvsim
