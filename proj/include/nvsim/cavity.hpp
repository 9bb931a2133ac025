#pragma once

// Purcell factors from cavity Q and normalized mode volume, plus the three
// photonic-crystal designs (nanodiamond L3, diamond membrane, bulk diamond).

#include "nvsim/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace nvsim {

struct CavityParams {
    double q = 0.0;
    double v_norm = 0.0;           // mode volume in units of (lambda/n)^3
    double wavelength = 1042.0;    // nm
    double refractive_index = 1.0;
    double collection_efficiency = 1.0;
    std::string label;
    // Purcell factor quoted for the design in the literature, when known.
    std::optional<double> published_fp;

    void validate() const
    {
        detail::require(std::isfinite(q) && q > 0.0, "cavity q must be > 0");
        detail::require(std::isfinite(v_norm) && v_norm > 0.0, "cavity v_norm must be > 0");
        detail::require(std::isfinite(wavelength) && wavelength > 0.0, "cavity wavelength must be > 0");
        detail::require(std::isfinite(refractive_index) && refractive_index >= 1.0, "refractive_index must be >= 1");
        detail::require(collection_efficiency >= 0.0 && collection_efficiency <= 1.0,
                        "collection_efficiency must lie in [0, 1]");
    }
};

/// Prefactor in F_p = prefactor * Q / V with V in (lambda/n)^3.
///   Standard: 3 / (4 pi^2), the textbook Purcell expression.
///   Reported: 3 / (4 pi), which reproduces the quoted design values
///             (2343 / 8355 / 235); exactly pi times Standard.
enum class PrefactorConvention { Standard, Reported };

inline std::string_view to_string(PrefactorConvention c) noexcept
{
    return c == PrefactorConvention::Standard ? "eq2" : "paper_values";
}

inline PrefactorConvention parse_convention(std::string_view text)
{
    if (text == "eq2") return PrefactorConvention::Standard;
    if (text == "paper_values") return PrefactorConvention::Reported;
    throw ValidationError("convention must be eq2|paper_values (got '" + std::string(text) + "')");
}

constexpr double purcell_prefactor(PrefactorConvention c) noexcept
{
    using std::numbers::pi;
    return c == PrefactorConvention::Standard ? 3.0 / (4.0 * pi * pi) : 3.0 / (4.0 * pi);
}

/// Wavelength and index cancel once the volume is normalized to (lambda/n)^3.
inline double purcell_factor(const CavityParams& c, PrefactorConvention convention = PrefactorConvention::Standard)
{
    c.validate();
    return purcell_prefactor(convention) * c.q / c.v_norm;
}

enum class CavityPreset { Nanodiamond, Membrane, Bulk };

inline constexpr std::array<CavityPreset, 3> kAllPresets = {CavityPreset::Nanodiamond, CavityPreset::Membrane,
                                                             CavityPreset::Bulk};

inline std::string_view to_string(CavityPreset p) noexcept
{
    switch (p) {
    case CavityPreset::Nanodiamond: return "nanodiamond";
    case CavityPreset::Membrane: return "membrane";
    case CavityPreset::Bulk: return "bulk";
    }
    return "?";
}

inline CavityParams preset(CavityPreset p)
{
    constexpr double kIrWavelength = 1042.0;
    constexpr double kDiamondIndex = 2.4;
    switch (p) {
    case CavityPreset::Nanodiamond:
        // SiN hexagonal L3 slab (n = 2) hosting the nanodiamond.
        return {2650.0, 0.27, kIrWavelength, 2.0, 0.45, "nanodiamond", 2343.0};
    case CavityPreset::Membrane:
        return {13300.0, 0.38, kIrWavelength, kDiamondIndex, 0.45, "membrane", 8355.0};
    case CavityPreset::Bulk:
        return {790.0, 0.8, kIrWavelength, kDiamondIndex, 0.45, "bulk", 235.0};
    }
    throw ValidationError("unknown cavity preset");
}

inline CavityParams preset(std::string_view label)
{
    for (CavityPreset p : kAllPresets) {
        if (label == to_string(p)) return preset(p);
    }
    if (label == "Nanodiamond") return preset(CavityPreset::Nanodiamond);
    if (label == "Membrane") return preset(CavityPreset::Membrane);
    if (label == "Bulk") return preset(CavityPreset::Bulk);
    throw ValidationError("unknown cavity preset '" + std::string(label) + "' (valid: nanodiamond, membrane, bulk)");
}

} // namespace nvsim
