#pragma once

// Configuration and sequence files: INI-style "key = value" text with dotted
// section names ([environment.bulk], [protocol.ir], [segment.0], ...).

#include "nvsim/error.hpp"
#include "nvsim/model.hpp"
#include "nvsim/readout.hpp"
#include "nvsim/sequence.hpp"
#include "nvsim/units.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace nvsim {

inline constexpr int kConfigVersion = 1;

// Shipped defaults; config/default.ini is a verbatim copy.
inline constexpr const char* kDefaultConfigText = R"ini(# nvsim default configuration
#
# Units: rates in MHz (1/us), times in us, powers in mW. Protocol durations and
# powers accept explicit suffixes (ns, us, ms, s / uW, mW, W).
#
# The laser-induced rates are linear in power: K = coeff * P. The coefficients
# below are round literature-typical magnitudes chosen so that the qualitative
# behaviour of both readout schemes is reproduced; they are configuration, not
# measured constants. Sources for the magnitudes:
#   triplet radiative rate and ISC rates   Robledo et al., New J. Phys. (2011)
#   singlet 1A decay (~100 ps)             Ulbricht et al., Phys. Rev. B (2018)
#   singlet 1E shelving time (~300 ns)     Acosta et al., Phys. Rev. B (2010)
#   1A -> 1E radiative fraction 1/1000     Acosta et al., Phys. Rev. B (2010)
#   two-step ionization / recombination    Aslam et al., New J. Phys. (2013);
#                                          coefficients scaled up so that
#                                          ionization competes with ISC
#
# Calibration targets (not enforced): with optimal green power and duration the
# conventional red readout peaks slightly above SNR 0.25 for bulk NVs and 0.22
# for near-surface NVs. The shipped set gives a higher absolute red SNR (about
# 0.75 bulk / 0.63 surface) because the absolute peak depends on constants that
# are not pinned here; ratios between schemes are what the defaults target.

config_version = 1

[units]
rate = MHz
time = us
power = mW

[rates]
k_f_minus = 65.9
k_f_neutral = 50.0
k_es_0 = 11.0
k_es_1 = 79.8
k_ss_total = 10000.0
ss_radiative_branching = 0.001
k_sg_0 = 2.0
k_sg_1 = 1.3
ion_green_coeff = 20.0
ion_ir_coeff = 0.02
rec_green_coeff = 30.0
rec_ir_coeff = 0.01
exc_green_minus_coeff = 60.0
exc_green_neutral_coeff = 40.0
exc_ir_singlet_coeff = 20.0

[model]
# emission | excitation | both
purcell_target = emission
ionization_exponent = 1.0
recombination_exponent = 1.0
singlet_ir_ionization = false
singlet_ion_ir_coeff = 0.0

[environment.bulk]

# Near-surface NVs ionize more readily from the triplet excited state.
[environment.surface]
ion_green_coeff = 40.0

[protocol.ir]
# Pump power from calibrate-pump at 300 ns / 10 ns delay with these rates.
green_power = 0.2116mW
green_duration = 300ns
tau = 10ns
ir_power = 1W
ir_duration = 1us
repetitions = 3

[readout]
collection_efficiency = 1.0
detection_efficiency = 1.0
)ini";

struct SimConfig {
    int config_version = kConfigVersion;
    RateSet rates;
    ModelOptions options;
    EnvironmentProfile bulk{Environment::Bulk, {}};
    EnvironmentProfile surface{Environment::Surface, {}};
    IrProtocolParams ir;
    Efficiencies efficiencies;
    std::string source_text;

    const EnvironmentProfile& environment(Environment env) const
    {
        return env == Environment::Bulk ? bulk : surface;
    }
};

namespace detail {

namespace pt = boost::property_tree;

inline const pt::ptree* find_section(const pt::ptree& root, const std::string& name)
{
    for (const auto& [key, child] : root) {
        if (key == name) return &child;
    }
    return nullptr;
}

/// Reads the keys of one section, rejecting any key not in the handler table.
class SectionReader {
public:
    SectionReader(const pt::ptree* section, std::string name) : section_(section), name_(std::move(name)) {}

    void check_known(const std::set<std::string>& known) const
    {
        if (!section_) return;
        for (const auto& [key, child] : *section_) {
            if (!known.count(key)) {
                std::string valid;
                for (const auto& k : known) valid += (valid.empty() ? "" : ", ") + k;
                throw ValidationError("unknown key '" + name_ + "." + key + "' (valid: " + valid + ")");
            }
        }
    }

    std::optional<std::string> raw(const std::string& key) const
    {
        if (!section_) return std::nullopt;
        if (auto v = section_->get_optional<std::string>(pt::ptree::path_type(key, '/'))) return *v;
        return std::nullopt;
    }

    std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    void number(const std::string& key, double& out, units::Quantity q = units::Quantity::Plain) const
    {
        if (auto v = raw(key)) out = units::parse(*v, q, field(key));
    }

    void optional_number(const std::string& key, std::optional<double>& out) const
    {
        if (auto v = raw(key)) out = units::parse_plain(*v, field(key));
    }

    void flag(const std::string& key, bool& out) const
    {
        if (auto v = raw(key)) out = units::parse_bool(*v, field(key));
    }

    void integer(const std::string& key, int& out) const
    {
        if (auto v = raw(key)) {
            const double d = units::parse_plain(*v, field(key));
            if (d != static_cast<double>(static_cast<int>(d))) {
                throw ValidationError(field(key) + " must be an integer");
            }
            out = static_cast<int>(d);
        }
    }

    bool present() const { return section_ != nullptr; }

private:
    const pt::ptree* section_;
    std::string name_;
};

/// Drops trailing "; ..." or "# ..." comments (preceded by whitespace) from
/// every line; the INI reader only understands whole-line comments.
inline std::string strip_inline_comments(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        for (std::size_t i = 1; i < line.size(); ++i) {
            if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line = line.substr(0, i);
                break;
            }
        }
        out.append(line);
        if (end == text.size()) break;
        out.push_back('\n');
        start = end + 1;
    }
    return out;
}

inline pt::ptree read_ini_text(std::string_view text, const std::string& origin)
{
    std::istringstream in{strip_inline_comments(text)};
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    return root;
}

inline void read_overrides(const SectionReader& r, RateOverrides& o)
{
    r.check_known({"ion_green_coeff", "ion_ir_coeff", "rec_green_coeff", "rec_ir_coeff"});
    r.optional_number("ion_green_coeff", o.ion_green_coeff);
    r.optional_number("ion_ir_coeff", o.ion_ir_coeff);
    r.optional_number("rec_green_coeff", o.rec_green_coeff);
    r.optional_number("rec_ir_coeff", o.rec_ir_coeff);
    for (const auto& v : {o.ion_green_coeff, o.ion_ir_coeff, o.rec_green_coeff, o.rec_ir_coeff}) {
        if (v) require_non_negative(*v, "environment override");
    }
}

} // namespace detail

/// Parses a configuration text. Every error names the offending field.
inline SimConfig parse_config(std::string_view text, const std::string& origin = "config")
{
    using detail::SectionReader;
    const auto root = detail::read_ini_text(text, origin);

    static const std::set<std::string> kSections = {"config_version",   "units",        "rates",   "model",
                                                    "environment.bulk", "environment.surface", "protocol.ir",
                                                    "readout"};
    for (const auto& [key, child] : root) {
        if (!kSections.count(key)) {
            throw ValidationError(origin + ": unknown section or key '" + key + "'");
        }
    }

    SimConfig cfg;
    cfg.source_text = std::string(text);

    const auto version = root.get_optional<std::string>("config_version");
    if (!version) throw ValidationError(origin + ": missing config_version");
    const double v = units::parse_plain(*version, "config_version");
    if (v != kConfigVersion) {
        throw ValidationError(origin + ": config_version " + *version + " not supported (expected " +
                              std::to_string(kConfigVersion) + ")");
    }
    cfg.config_version = kConfigVersion;

    const SectionReader unit_sec(detail::find_section(root, "units"), "units");
    unit_sec.check_known({"rate", "time", "power"});
    const std::map<std::string, std::string> expected_units = {{"rate", "MHz"}, {"time", "us"}, {"power", "mW"}};
    for (const auto& [key, unit] : expected_units) {
        if (auto u = unit_sec.raw(key); u && *u != unit) {
            throw ValidationError("units." + key + " must be " + unit + " (got '" + *u + "')");
        }
    }

    const SectionReader rates(detail::find_section(root, "rates"), "rates");
    if (!rates.present()) throw ValidationError(origin + ": missing [rates] section");
    rates.check_known({"k_f_minus", "k_f_neutral", "k_es_0", "k_es_1", "k_ss_total", "ss_radiative_branching", "k_sg_0",
                       "k_sg_1", "ion_green_coeff", "ion_ir_coeff", "rec_green_coeff", "rec_ir_coeff",
                       "exc_green_minus_coeff", "exc_green_neutral_coeff", "exc_ir_singlet_coeff"});
    RateSet& rs = cfg.rates;
    rates.number("k_f_minus", rs.k_f_minus);
    rates.number("k_f_neutral", rs.k_f_neutral);
    rates.number("k_es_0", rs.k_es_0);
    rates.number("k_es_1", rs.k_es_1);
    double ss_total = 0.0;
    double branching = 0.001;
    rates.number("k_ss_total", ss_total);
    rates.number("ss_radiative_branching", branching);
    rs.set_singlet_decay(ss_total, branching);
    rates.number("k_sg_0", rs.k_sg_0);
    rates.number("k_sg_1", rs.k_sg_1);
    rates.number("ion_green_coeff", rs.ion_green_coeff);
    rates.number("ion_ir_coeff", rs.ion_ir_coeff);
    rates.number("rec_green_coeff", rs.rec_green_coeff);
    rates.number("rec_ir_coeff", rs.rec_ir_coeff);
    rates.number("exc_green_minus_coeff", rs.exc_green_minus_coeff);
    rates.number("exc_green_neutral_coeff", rs.exc_green_neutral_coeff);
    rates.number("exc_ir_singlet_coeff", rs.exc_ir_singlet_coeff);
    rs.validate();

    const SectionReader model(detail::find_section(root, "model"), "model");
    model.check_known({"purcell_target", "ionization_exponent", "recombination_exponent", "singlet_ir_ionization",
                       "singlet_ion_ir_coeff"});
    if (auto t = model.raw("purcell_target")) cfg.options.purcell_target = parse_purcell_target(*t);
    model.number("ionization_exponent", cfg.options.ionization_exponent);
    model.number("recombination_exponent", cfg.options.recombination_exponent);
    model.flag("singlet_ir_ionization", cfg.options.singlet_ir_ionization);
    model.number("singlet_ion_ir_coeff", cfg.options.singlet_ion_ir_coeff);
    cfg.options.validate();

    detail::read_overrides(SectionReader(detail::find_section(root, "environment.bulk"), "environment.bulk"),
                           cfg.bulk.rate_overrides);
    detail::read_overrides(SectionReader(detail::find_section(root, "environment.surface"), "environment.surface"),
                           cfg.surface.rate_overrides);

    const SectionReader ir(detail::find_section(root, "protocol.ir"), "protocol.ir");
    ir.check_known({"green_power", "green_duration", "tau", "ir_power", "ir_duration", "repetitions"});
    ir.number("green_power", cfg.ir.green_power, units::Quantity::Power);
    ir.number("green_duration", cfg.ir.green_duration, units::Quantity::Duration);
    ir.number("tau", cfg.ir.tau, units::Quantity::Duration);
    ir.number("ir_power", cfg.ir.ir_power, units::Quantity::Power);
    ir.number("ir_duration", cfg.ir.ir_duration, units::Quantity::Duration);
    ir.integer("repetitions", cfg.ir.repetitions);
    ir_readout_protocol(cfg.ir); // validates

    const SectionReader readout(detail::find_section(root, "readout"), "readout");
    readout.check_known({"collection_efficiency", "detection_efficiency"});
    readout.number("collection_efficiency", cfg.efficiencies.collection);
    readout.number("detection_efficiency", cfg.efficiencies.detection);
    detail::require(cfg.efficiencies.collection >= 0.0 && cfg.efficiencies.collection <= 1.0,
                    "readout.collection_efficiency must lie in [0, 1]");
    detail::require(cfg.efficiencies.detection >= 0.0 && cfg.efficiencies.detection <= 1.0,
                    "readout.detection_efficiency must lie in [0, 1]");
    return cfg;
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SimConfig load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

inline const SimConfig& default_config()
{
    static const SimConfig cfg = parse_config(kDefaultConfigText, "built-in defaults");
    return cfg;
}

/// 64-bit FNV-1a of the configuration source text.
inline std::uint64_t config_hash(const SimConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.source_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash_hex(const SimConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

// ---------------------------------------------------------------------------
// Sequence files
//
//   [sequence]
//   repetitions = 3
//   initial_spin = ms0          ; ms0 | ms1
//   initial_charge = negative   ; negative | neutral
//
//   [segment.0]
//   duration = 300ns
//   green_power = 0.2mW
//   ir_power = 0
//   collect_red = false
//   collect_ir = false
//
// Segments run in file order.

inline PulseSequence parse_sequence(std::string_view text, const std::string& origin = "sequence")
{
    using detail::SectionReader;
    const auto root = detail::read_ini_text(text, origin);
    PulseSequence seq;
    seq.segments.clear();
    bool saw_header = false;
    for (const auto& [key, child] : root) {
        if (key == "sequence") {
            saw_header = true;
            const SectionReader r(&child, "sequence");
            r.check_known({"repetitions", "initial_spin", "initial_charge"});
            r.integer("repetitions", seq.repetitions);
            if (auto s = r.raw("initial_spin")) seq.initial_spin = parse_spin(*s);
            if (auto c = r.raw("initial_charge")) seq.initial_charge = parse_charge(*c);
        } else if (key.rfind("segment", 0) == 0) {
            const SectionReader r(&child, key);
            r.check_known({"duration", "green_power", "ir_power", "collect_red", "collect_ir"});
            PulseSegment seg;
            if (!r.raw("duration")) throw ValidationError(origin + ": " + key + ".duration is required");
            r.number("duration", seg.duration, units::Quantity::Duration);
            r.number("green_power", seg.green_power, units::Quantity::Power);
            r.number("ir_power", seg.ir_power, units::Quantity::Power);
            r.flag("collect_red", seg.collect_red);
            r.flag("collect_ir", seg.collect_ir);
            seg.validate();
            seq.segments.push_back(seg);
        } else {
            throw ValidationError(origin + ": unknown section '" + key + "' (expected [sequence] or [segment.N])");
        }
    }
    detail::require(saw_header || !seq.segments.empty(), origin + ": empty sequence file");
    seq.validate();
    return seq;
}

inline PulseSequence load_sequence(const std::string& path) { return parse_sequence(read_text_file(path), path); }

inline std::string format_sequence(const PulseSequence& seq)
{
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "[sequence]\n"
       << "repetitions = " << seq.repetitions << '\n'
       << "initial_spin = " << to_string(seq.initial_spin) << '\n'
       << "initial_charge = " << to_string(seq.initial_charge) << '\n';
    for (std::size_t i = 0; i < seq.segments.size(); ++i) {
        const auto& s = seq.segments[i];
        os << "\n[segment." << i << "]\n"
           << "duration = " << num(s.duration) << "us\n"
           << "green_power = " << num(s.green_power) << "mW\n"
           << "ir_power = " << num(s.ir_power) << "mW\n"
           << "collect_red = " << (s.collect_red ? "true" : "false") << '\n'
           << "collect_ir = " << (s.collect_ir ? "true" : "false") << '\n';
    }
    return os.str();
}

} // namespace nvsim
