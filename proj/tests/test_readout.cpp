#include "nvsim/config.hpp"
#include "nvsim/readout.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace nvsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("shot-noise SNR arithmetic")
{
    // 36 / sqrt(164), evaluated by hand: sqrt(164) = 12.806248...
    CHECK_THAT(shot_noise_snr(100, 64).value, WithinAbs(2.8112, 1e-4));
    CHECK(shot_noise_snr(42, 42).value == 0.0);
    CHECK_FALSE(shot_noise_snr(42, 42).degenerate);
    const SnrValue zero = shot_noise_snr(0, 0);
    CHECK(zero.value == 0.0);
    CHECK(zero.degenerate);
    CHECK(shot_noise_snr(64, 100).value == shot_noise_snr(100, 64).value);
}

TEST_CASE("efficiency scaling is sqrt(eps)")
{
    for (double eps : {0.01, 0.45, 1.0}) {
        ReadoutResult r{123.0, 77.0, 1.0, Channel::Red, eps, 1.0};
        CHECK_THAT(snr(r).value, WithinRel(std::sqrt(eps) * shot_noise_snr(123, 77).value, 1e-12));
        ReadoutResult split{123.0, 77.0, 1.0, Channel::Red, std::sqrt(eps), std::sqrt(eps)};
        CHECK_THAT(snr(split).value, WithinRel(snr(r).value, 1e-12));
    }
}

TEST_CASE("normalized SNR")
{
    auto with_snr = [](double s, double duration) {
        // n0 - n1 = s * sqrt(n0 + n1) with n0 + n1 = 1.
        return ReadoutResult{(1 + s) / 2, (1 - s) / 2, duration, Channel::IR, 1.0, 1.0};
    };
    CHECK_THAT(normalized_snr(with_snr(0.25, 1.0)), WithinRel(0.25, 1e-12));
    CHECK_THAT(normalized_snr(with_snr(0.25, 4.0)), WithinRel(0.125, 1e-12));
    CHECK_THROWS_AS(normalized_snr(with_snr(0.25, 0.0)), ValidationError);
}

TEST_CASE("relative sensitivity")
{
    CHECK(relative_sensitivity(0.3, 0.3).relative_sensitivity == 1.0);
    CHECK_THAT(relative_sensitivity(0.3, 3.0).relative_sensitivity, WithinRel(0.1, 1e-12));
    CHECK_THROWS_AS(relative_sensitivity(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(relative_sensitivity(1.0, -1.0), ValidationError);
}

TEST_CASE("result validation")
{
    ReadoutResult r{-1.0, 1.0, 1.0, Channel::Red, 1.0, 1.0};
    CHECK_THROWS_AS(snr(r), ValidationError);
    r = {1.0, 1.0, 1.0, Channel::Red, 1.5, 1.0};
    CHECK_THROWS_AS(snr(r), ValidationError);
}

TEST_CASE("spin-symmetric rates give zero contrast")
{
    RateSet rs = default_config().rates;
    rs.k_es_1 = rs.k_es_0;
    rs.k_sg_1 = rs.k_sg_0;
    const ReadoutResult red = readout_pair(red_readout_protocol(1.0, 1.0), rs, EnvironmentProfile{}, 1.0);
    CHECK_THAT(red.n0, WithinRel(red.n1, 1e-12));
    CHECK(snr(red).value < 1e-9);
    const ReadoutResult ir = readout_pair(ir_readout_protocol(IrProtocolParams{}), rs, EnvironmentProfile{}, 40.0);
    CHECK(snr(ir).value < 1e-9);
}

TEST_CASE("default red readout")
{
    const SimConfig& cfg = default_config();
    const ReadoutResult r = readout_pair(red_readout_protocol(1.0, 1.0), cfg.rates, cfg.bulk, 1.0, cfg.options);
    CHECK(r.channel == Channel::Red);
    CHECK(r.duration == 1.0);
    const double s = snr(r).value;
    CHECK(s > 0.0);
    CHECK(s < 1.0);
}

TEST_CASE("IR SNR increases with readout duration")
{
    const SimConfig& cfg = default_config();
    double previous = 0.0;
    for (double d : {0.05, 0.1, 0.2, 0.5, 1.0}) {
        IrProtocolParams p = cfg.ir;
        p.ir_duration = d;
        const double s =
            snr(readout_pair(ir_readout_protocol(p), Channel::IR, cfg.rates, cfg.bulk, 40.0, cfg.options)).value;
        CHECK(s > previous);
        previous = s;
    }
}

TEST_CASE("Fp = 300 beats the best red readout by an order of magnitude")
{
    const SimConfig& cfg = default_config();
    double best_red = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double d = std::pow(10.0, -2.0 + 4.0 * i / 39.0);
        for (int j = 0; j < 40; ++j) {
            const double p = std::pow(10.0, -2.0 + 4.0 * j / 39.0);
            best_red = std::max(
                best_red, snr(readout_pair(red_readout_protocol(p, d), cfg.rates, cfg.bulk, 1.0, cfg.options)).value);
        }
    }
    const double ir =
        snr(readout_pair(ir_readout_protocol(cfg.ir), Channel::IR, cfg.rates, cfg.bulk, 300.0, cfg.options)).value;
    CHECK(relative_sensitivity(best_red, ir).relative_sensitivity < 0.1);
}

TEST_CASE("Fp = 1 IR pipeline equals the uncavitated model")
{
    const SimConfig& cfg = default_config();
    const RateSet& rs = cfg.rates;
    const DriveSettings cavity{0.0, 1000.0, 1.0};
    ResolvedRates bare = effective_rates(rs, {0.0, 1000.0, 1.0});
    // Uncavitated: the singlet decay is the plain sum, emission its radiative part.
    CHECK(bare.ss_total == rs.k_ss_nonrad + rs.k_ss_rad);
    CHECK(bare.ss_emission == rs.k_ss_rad);
    CHECK(build_generator(rs, cavity) == build_generator(bare));
}
