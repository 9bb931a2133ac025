#include "nvsim/config.hpp"
#include "nvsim/units.hpp"

#include <catch_amalgamated.hpp>

#include <string>

using namespace nvsim;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

void check_error_names(const std::string& text, const std::string& field)
{
    try {
        parse_config(text);
        FAIL("expected a validation error for " << field);
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), ContainsSubstring(field));
    }
}

} // namespace

TEST_CASE("shipped config file equals the built-in text")
{
    const std::string file = read_text_file(std::string(NVSIM_SOURCE_DIR) + "/config/default.ini");
    CHECK(file == kDefaultConfigText);
    const SimConfig a = load_config(std::string(NVSIM_SOURCE_DIR) + "/config/default.ini");
    CHECK(a.rates == default_config().rates);
    CHECK(config_hash(a) == config_hash(default_config()));
}

TEST_CASE("default config contents")
{
    const SimConfig& cfg = default_config();
    CHECK(cfg.config_version == 1);
    CHECK(cfg.rates.k_f_minus == 65.9);
    CHECK_THAT(cfg.rates.k_ss_rad + cfg.rates.k_ss_nonrad, WithinRel(10000.0, 1e-15));
    CHECK(cfg.options.purcell_target == PurcellTarget::Emission);
    CHECK_FALSE(cfg.bulk.rate_overrides.ion_green_coeff);
    CHECK(*cfg.surface.rate_overrides.ion_green_coeff == 40.0);
    CHECK(cfg.surface.label == Environment::Surface);
    CHECK(cfg.ir.green_duration == 0.3);
    CHECK(cfg.ir.tau == 0.01);
    CHECK(cfg.ir.ir_power == 1000.0);
    CHECK(cfg.ir.ir_duration == 1.0);
    CHECK(cfg.ir.repetitions == 3);
    CHECK(cfg.efficiencies.collection == 1.0);
    // The documented absolute calibration targets travel with the config.
    CHECK_THAT(cfg.source_text, ContainsSubstring("0.25") && ContainsSubstring("0.22"));
}

TEST_CASE("config errors name the offending field")
{
    const std::string base = kDefaultConfigText;
    check_error_names(replace(base, "k_es_1 = 79.8", "k_es_1 = -79.8"), "k_es_1");
    check_error_names(replace(base, "k_sg_0 = 2.0", "k_sg_0 = fast"), "rates.k_sg_0");
    check_error_names(replace(base, "k_sg_0 = 2.0", "k_sg_0 = 2.0\nk_sg_2 = 1"), "rates.k_sg_2");
    check_error_names(replace(base, "tau = 10ns", "tau = 10 parsecs"), "protocol.ir.tau");
    check_error_names(replace(base, "purcell_target = emission", "purcell_target = sideways"), "purcell_target");
    check_error_names(replace(base, "config_version = 1", "config_version = 2"), "config_version");
    check_error_names(replace(base, "[readout]", "[readoot]"), "readoot");
    check_error_names(replace(base, "rate = MHz", "rate = GHz"), "units.rate");
    check_error_names(replace(base, "collection_efficiency = 1.0", "collection_efficiency = 1.5"),
                      "collection_efficiency");
    CHECK_THROWS_AS(parse_config("[rates\n"), ValidationError);
}

TEST_CASE("config hash follows the text")
{
    const std::string base = kDefaultConfigText;
    const SimConfig a = parse_config(base);
    const SimConfig b = parse_config(replace(base, "k_f_minus = 65.9", "k_f_minus = 66.0"));
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("unit suffixes")
{
    CHECK(units::parse_duration("300ns") == 0.3);
    CHECK(units::parse_duration("2") == 2.0);
    CHECK(units::parse_duration("1ms") == 1000.0);
    CHECK(units::parse_duration("1 s") == 1e6);
    CHECK(units::parse_duration("4\xC2\xB5s") == 4.0);
    CHECK(units::parse_power("1W") == 1000.0);
    CHECK(units::parse_power("500uW") == 0.5);
    CHECK(units::parse_power("0.2") == 0.2);
    CHECK_THROWS_AS(units::parse_power("1 kW"), ValidationError);
    CHECK_THROWS_AS(units::parse_plain("3ns"), ValidationError);
    CHECK_THROWS_AS(units::parse_duration("abc", "x.y"), ValidationError);
    CHECK(units::parse_bool("yes"));
    CHECK_FALSE(units::parse_bool("off"));
    CHECK_THROWS_AS(units::parse_bool("maybe"), ValidationError);
}

TEST_CASE("sequence files round-trip")
{
    const std::string text = R"(
[sequence]
repetitions = 2
initial_spin = ms1

[segment.0]
duration = 300ns
green_power = 0.2mW
collect_red = true

[segment.1]
duration = 1us
ir_power = 1W
collect_ir = true
)";
    const PulseSequence seq = parse_sequence(text);
    CHECK(seq.repetitions == 2);
    CHECK(seq.initial_spin == Spin::Ms1);
    CHECK(seq.initial_charge == Charge::Negative);
    REQUIRE(seq.segments.size() == 2);
    CHECK(seq.segments[0].duration == 0.3);
    CHECK(seq.segments[0].collect_red);
    CHECK(seq.segments[1].ir_power == 1000.0);
    CHECK(seq.segments[1].collect_ir);
    CHECK(parse_sequence(format_sequence(seq)) == seq);

    CHECK_THROWS_AS(parse_sequence("[segment.0]\ngreen_power = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_sequence("[segment.0]\nduration = 1\nspeed = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_sequence("[pulse]\nduration = 1\n"), ValidationError);

    const PulseSequence commented =
        parse_sequence("[sequence]\ninitial_spin = ms1   ; ms0 | ms1\n[segment.0]\nduration = 2us # probe\n");
    CHECK(commented.initial_spin == Spin::Ms1);
    CHECK(commented.segments.at(0).duration == 2.0);
    CHECK_THROWS_AS(parse_sequence(""), ValidationError);
}
