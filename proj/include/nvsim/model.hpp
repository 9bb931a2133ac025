#pragma once

// Eight-level NV photodynamics: level basis, rate parameters, laser drive and
// the generator of the population rate equations.
//
// Units are MHz for rates, us for times and mW for powers throughout.

#include "nvsim/error.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace nvsim {

inline constexpr std::size_t kLevelCount = 8;

enum class Level : std::size_t {
    TripletGround0 = 0,
    TripletGround1 = 1,
    TripletExcited0 = 2,
    TripletExcited1 = 3,
    SingletExcited = 4,
    SingletGround = 5,
    NeutralGround = 6,
    NeutralExcited = 7,
};

inline constexpr std::array<Level, kLevelCount> kAllLevels = {
    Level::TripletGround0, Level::TripletGround1, Level::TripletExcited0, Level::TripletExcited1,
    Level::SingletExcited, Level::SingletGround,  Level::NeutralGround,   Level::NeutralExcited,
};

constexpr std::size_t index(Level level) noexcept { return static_cast<std::size_t>(level); }

constexpr std::string_view level_name(Level level) noexcept
{
    switch (level) {
    case Level::TripletGround0: return "TripletGround0";
    case Level::TripletGround1: return "TripletGround1";
    case Level::TripletExcited0: return "TripletExcited0";
    case Level::TripletExcited1: return "TripletExcited1";
    case Level::SingletExcited: return "SingletExcited";
    case Level::SingletGround: return "SingletGround";
    case Level::NeutralGround: return "NeutralGround";
    case Level::NeutralExcited: return "NeutralExcited";
    }
    return "?";
}

using Vector8 = Eigen::Matrix<double, 8, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Transition rates of the level diagram. Fixed rates are in MHz; the
/// laser-induced ones are stored as coefficients (MHz/mW) and resolved against
/// a DriveSettings by effective_rates().
struct RateSet {
    double k_f_minus = 0.0;   // NV- triplet fluorescence
    double k_f_neutral = 0.0; // NV0 fluorescence
    double k_es_0 = 0.0;      // triplet excited ms=0 -> singlet excited
    double k_es_1 = 0.0;      // triplet excited ms=+-1 -> singlet excited
    double k_ss_nonrad = 0.0; // singlet excited -> singlet ground, non-radiative
    double k_ss_rad = 0.0;    // singlet excited -> singlet ground, radiative (1042 nm)
    double k_sg_0 = 0.0;      // singlet ground -> triplet ground ms=0
    double k_sg_1 = 0.0;      // singlet ground -> triplet ground ms=+-1

    double ion_green_coeff = 0.0;
    double ion_ir_coeff = 0.0;
    double rec_green_coeff = 0.0;
    double rec_ir_coeff = 0.0;
    double exc_green_minus_coeff = 0.0;
    double exc_green_neutral_coeff = 0.0;
    double exc_ir_singlet_coeff = 0.0;

    /// Radiative fraction of the bare singlet decay.
    double radiative_branching() const noexcept
    {
        const double total = k_ss_rad + k_ss_nonrad;
        return total > 0.0 ? k_ss_rad / total : 0.0;
    }

    /// Splits a total singlet decay rate according to a radiative branching ratio.
    void set_singlet_decay(double total, double branching)
    {
        detail::require_non_negative(total, "k_ss_total");
        detail::require(branching >= 0.0 && branching <= 1.0, "ss_radiative_branching must lie in [0, 1]");
        k_ss_rad = total * branching;
        k_ss_nonrad = total - k_ss_rad;
    }

    void validate() const
    {
        detail::require_non_negative(k_f_minus, "k_f_minus");
        detail::require_non_negative(k_f_neutral, "k_f_neutral");
        detail::require_non_negative(k_es_0, "k_es_0");
        detail::require_non_negative(k_es_1, "k_es_1");
        detail::require_non_negative(k_ss_nonrad, "k_ss_nonrad");
        detail::require_non_negative(k_ss_rad, "k_ss_rad");
        detail::require_non_negative(k_sg_0, "k_sg_0");
        detail::require_non_negative(k_sg_1, "k_sg_1");
        detail::require_non_negative(ion_green_coeff, "ion_green_coeff");
        detail::require_non_negative(ion_ir_coeff, "ion_ir_coeff");
        detail::require_non_negative(rec_green_coeff, "rec_green_coeff");
        detail::require_non_negative(rec_ir_coeff, "rec_ir_coeff");
        detail::require_non_negative(exc_green_minus_coeff, "exc_green_minus_coeff");
        detail::require_non_negative(exc_green_neutral_coeff, "exc_green_neutral_coeff");
        detail::require_non_negative(exc_ir_singlet_coeff, "exc_ir_singlet_coeff");
    }

    bool operator==(const RateSet&) const = default;
};

struct DriveSettings {
    double green_power = 0.0; // mW
    double ir_power = 0.0;    // mW
    double purcell_factor = 1.0;

    void validate() const
    {
        detail::require_non_negative(green_power, "green_power");
        detail::require_non_negative(ir_power, "ir_power");
        detail::require(std::isfinite(purcell_factor) && purcell_factor >= 1.0,
                        "purcell_factor must be finite and >= 1 (got " + std::to_string(purcell_factor) + ")");
    }
};

/// Which singlet rate the cavity enhancement multiplies.
enum class PurcellTarget { Emission, Excitation, Both };

inline std::string_view to_string(PurcellTarget target) noexcept
{
    switch (target) {
    case PurcellTarget::Emission: return "emission";
    case PurcellTarget::Excitation: return "excitation";
    case PurcellTarget::Both: return "both";
    }
    return "?";
}

inline PurcellTarget parse_purcell_target(std::string_view text)
{
    if (text == "emission") return PurcellTarget::Emission;
    if (text == "excitation") return PurcellTarget::Excitation;
    if (text == "both") return PurcellTarget::Both;
    throw ValidationError("purcell_target must be one of emission|excitation|both (got '" + std::string(text) + "')");
}

/// Model switches that are not rates.
struct ModelOptions {
    PurcellTarget purcell_target = PurcellTarget::Emission;
    double ionization_exponent = 1.0;    // K_i = coeff * P^exponent
    double recombination_exponent = 1.0; // K_r = coeff * P^exponent
    // IR-induced ionization out of the singlet excited state; off unless a
    // cross section is configured.
    bool singlet_ir_ionization = false;
    double singlet_ion_ir_coeff = 0.0;

    void validate() const
    {
        detail::require(std::isfinite(ionization_exponent) && ionization_exponent > 0.0,
                        "ionization_exponent must be finite and > 0");
        detail::require(std::isfinite(recombination_exponent) && recombination_exponent > 0.0,
                        "recombination_exponent must be finite and > 0");
        detail::require_non_negative(singlet_ion_ir_coeff, "singlet_ion_ir_coeff");
    }

    bool operator==(const ModelOptions&) const = default;
};

enum class Environment { Bulk, Surface };

inline std::string_view to_string(Environment env) noexcept
{
    return env == Environment::Bulk ? "bulk" : "surface";
}

inline Environment parse_environment(std::string_view text)
{
    if (text == "bulk" || text == "Bulk") return Environment::Bulk;
    if (text == "surface" || text == "Surface") return Environment::Surface;
    throw ValidationError("environment must be bulk|surface (got '" + std::string(text) + "')");
}

/// Ionization/recombination coefficients that differ between environments.
struct RateOverrides {
    std::optional<double> ion_green_coeff;
    std::optional<double> ion_ir_coeff;
    std::optional<double> rec_green_coeff;
    std::optional<double> rec_ir_coeff;

    bool operator==(const RateOverrides&) const = default;
};

struct EnvironmentProfile {
    Environment label = Environment::Bulk;
    RateOverrides rate_overrides;

    RateSet apply(RateSet rates) const
    {
        if (rate_overrides.ion_green_coeff) rates.ion_green_coeff = *rate_overrides.ion_green_coeff;
        if (rate_overrides.ion_ir_coeff) rates.ion_ir_coeff = *rate_overrides.ion_ir_coeff;
        if (rate_overrides.rec_green_coeff) rates.rec_green_coeff = *rate_overrides.rec_green_coeff;
        if (rate_overrides.rec_ir_coeff) rates.rec_ir_coeff = *rate_overrides.rec_ir_coeff;
        return rates;
    }

    bool operator==(const EnvironmentProfile&) const = default;
};

/// Every rate of the rate equations at a fixed drive, in MHz.
struct ResolvedRates {
    double exc_minus = 0.0;    // K-_e
    double exc_neutral = 0.0;  // K0_e
    double exc_singlet = 0.0;  // K-_s
    double ion_green = 0.0;    // K_iG
    double ion_ir = 0.0;       // K_iIR
    double rec_green = 0.0;    // K_rG
    double rec_ir = 0.0;       // K_rIR
    double f_minus = 0.0;      // K-_f
    double f_neutral = 0.0;    // K0_f
    double es_0 = 0.0;         // K-_es,0
    double es_1 = 0.0;         // K-_es,1
    double ss_total = 0.0;     // K_ss, including cavity enhancement
    double ss_emission = 0.0;  // radiative part of K_ss that reaches the IR detector
    double sg_0 = 0.0;         // K-_sg,0
    double sg_1 = 0.0;         // K-_sg,1
    double singlet_ion_ir = 0.0;

    bool operator==(const ResolvedRates&) const = default;
};

namespace detail {

inline double power_law(double coeff, double power, double exponent)
{
    return exponent == 1.0 ? coeff * power : coeff * std::pow(power, exponent);
}

} // namespace detail

inline ResolvedRates effective_rates(const RateSet& rs, const DriveSettings& drive, const ModelOptions& options = {})
{
    rs.validate();
    drive.validate();
    options.validate();

    const double fp = drive.purcell_factor;
    const bool enhance_emission = options.purcell_target != PurcellTarget::Excitation;
    const bool enhance_excitation = options.purcell_target != PurcellTarget::Emission;

    ResolvedRates r;
    r.exc_minus = rs.exc_green_minus_coeff * drive.green_power;
    r.exc_neutral = rs.exc_green_neutral_coeff * drive.green_power;
    r.exc_singlet = rs.exc_ir_singlet_coeff * drive.ir_power;
    if (enhance_excitation) {
        r.exc_singlet *= fp;
    }
    r.ion_green = detail::power_law(rs.ion_green_coeff, drive.green_power, options.ionization_exponent);
    r.ion_ir = detail::power_law(rs.ion_ir_coeff, drive.ir_power, options.ionization_exponent);
    r.rec_green = detail::power_law(rs.rec_green_coeff, drive.green_power, options.recombination_exponent);
    r.rec_ir = detail::power_law(rs.rec_ir_coeff, drive.ir_power, options.recombination_exponent);

    r.f_minus = rs.k_f_minus;
    r.f_neutral = rs.k_f_neutral;
    r.es_0 = rs.k_es_0;
    r.es_1 = rs.k_es_1;
    r.ss_emission = enhance_emission ? fp * rs.k_ss_rad : rs.k_ss_rad;
    r.ss_total = rs.k_ss_nonrad + r.ss_emission;
    r.sg_0 = rs.k_sg_0;
    r.sg_1 = rs.k_sg_1;
    if (options.singlet_ir_ionization) {
        r.singlet_ion_ir = detail::power_law(options.singlet_ion_ir_coeff, drive.ir_power, options.ionization_exponent);
    }
    return r;
}

/// Generator of dp/dt = M p together with the per-channel emission rows: the
/// expected photon rate of a channel is row . p.
struct GeneratorMatrix {
    Matrix8 entries = Matrix8::Zero();
    Vector8 red_emission = Vector8::Zero();
    Vector8 ir_emission = Vector8::Zero();

    double operator()(Level to, Level from) const { return entries(index(to), index(from)); }

    bool all_finite() const
    {
        return entries.allFinite() && red_emission.allFinite() && ir_emission.allFinite();
    }

    /// Largest |column sum|; zero for a probability-conserving generator.
    double max_column_sum() const { return entries.colwise().sum().cwiseAbs().maxCoeff(); }

    bool operator==(const GeneratorMatrix&) const = default;
};

namespace detail {

inline void add_flow(Matrix8& m, Level from, Level to, double rate)
{
    m(index(to), index(from)) += rate;
    m(index(from), index(from)) -= rate;
}

} // namespace detail

inline GeneratorMatrix build_generator(const ResolvedRates& r)
{
    using L = Level;
    GeneratorMatrix g;
    Matrix8& m = g.entries;

    detail::add_flow(m, L::TripletGround0, L::TripletExcited0, r.exc_minus);
    detail::add_flow(m, L::TripletGround1, L::TripletExcited1, r.exc_minus);
    detail::add_flow(m, L::TripletExcited0, L::TripletGround0, r.f_minus);
    detail::add_flow(m, L::TripletExcited1, L::TripletGround1, r.f_minus);
    detail::add_flow(m, L::TripletExcited0, L::SingletExcited, r.es_0);
    detail::add_flow(m, L::TripletExcited1, L::SingletExcited, r.es_1);

    const double ionization = r.ion_green + r.ion_ir;
    detail::add_flow(m, L::TripletExcited0, L::NeutralGround, ionization);
    detail::add_flow(m, L::TripletExcited1, L::NeutralGround, ionization);

    detail::add_flow(m, L::SingletExcited, L::SingletGround, r.ss_total);
    detail::add_flow(m, L::SingletGround, L::SingletExcited, r.exc_singlet);
    detail::add_flow(m, L::SingletGround, L::TripletGround0, r.sg_0);
    detail::add_flow(m, L::SingletGround, L::TripletGround1, r.sg_1);
    if (r.singlet_ion_ir > 0.0) {
        detail::add_flow(m, L::SingletExcited, L::NeutralGround, r.singlet_ion_ir);
    }

    detail::add_flow(m, L::NeutralGround, L::NeutralExcited, r.exc_neutral);
    detail::add_flow(m, L::NeutralExcited, L::NeutralGround, r.f_neutral);
    const double half_recombination = 0.5 * (r.rec_green + r.rec_ir);
    detail::add_flow(m, L::NeutralExcited, L::TripletGround0, half_recombination);
    detail::add_flow(m, L::NeutralExcited, L::TripletGround1, half_recombination);

    g.red_emission[index(L::TripletExcited0)] = r.f_minus;
    g.red_emission[index(L::TripletExcited1)] = r.f_minus;
    g.ir_emission[index(L::SingletExcited)] = r.ss_emission;
    return g;
}

inline GeneratorMatrix build_generator(const RateSet& rs, const DriveSettings& drive, const ModelOptions& options = {})
{
    return build_generator(effective_rates(rs, drive, options));
}

} // namespace nvsim
