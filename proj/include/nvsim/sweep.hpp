#pragma once

// Parameter sweeps over readout protocols. Cells are evaluated concurrently
// and written into slots fixed by their grid index, so output never depends
// on the number of workers.

#include "nvsim/config.hpp"
#include "nvsim/error.hpp"
#include "nvsim/model.hpp"
#include "nvsim/readout.hpp"
#include "nvsim/sequence.hpp"
#include "nvsim/units.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace nvsim {

inline constexpr const char* kGridSchema = "grid_result_v1";
inline constexpr const char* kGridCsvHeader = "axis1,axis2,n0,n1,snr,snr_norm,degenerate";

enum class Scale { Linear, Log };

inline std::string_view to_string(Scale s) noexcept { return s == Scale::Linear ? "linear" : "log"; }

inline Scale parse_scale(std::string_view text)
{
    if (text == "linear" || text == "lin") return Scale::Linear;
    if (text == "log") return Scale::Log;
    throw ValidationError("axis scale must be linear|log (got '" + std::string(text) + "')");
}

enum class SweepProtocol { RedMap, IrMap, PurcellCurve };

inline std::string_view to_string(SweepProtocol p) noexcept
{
    switch (p) {
    case SweepProtocol::RedMap: return "red-map";
    case SweepProtocol::IrMap: return "ir-map";
    case SweepProtocol::PurcellCurve: return "purcell-curve";
    }
    return "?";
}

/// Every knob a sweep cell can vary. Durations in us, powers in mW.
struct OperatingPoint {
    double green_power = 1.0;
    double duration = 1.0; // red readout window
    double green_duration = 0.3;
    double tau = 0.01;
    double ir_power = 1000.0;
    double ir_duration = 1.0;
    double repetitions = 3.0;
    double purcell = 1.0;
    double collection_efficiency = 1.0;
    double detection_efficiency = 1.0;
};

namespace detail {

struct ParameterInfo {
    const char* name;
    double OperatingPoint::*member;
    units::Quantity quantity;
    bool red;
    bool ir;
};

inline constexpr ParameterInfo kParameters[] = {
    {"green_power", &OperatingPoint::green_power, units::Quantity::Power, true, true},
    {"duration", &OperatingPoint::duration, units::Quantity::Duration, true, false},
    {"green_duration", &OperatingPoint::green_duration, units::Quantity::Duration, false, true},
    {"tau", &OperatingPoint::tau, units::Quantity::Duration, false, true},
    {"ir_power", &OperatingPoint::ir_power, units::Quantity::Power, false, true},
    {"ir_duration", &OperatingPoint::ir_duration, units::Quantity::Duration, false, true},
    {"repetitions", &OperatingPoint::repetitions, units::Quantity::Plain, false, true},
    {"purcell", &OperatingPoint::purcell, units::Quantity::Plain, false, true},
    {"collection_efficiency", &OperatingPoint::collection_efficiency, units::Quantity::Plain, true, true},
    {"detection_efficiency", &OperatingPoint::detection_efficiency, units::Quantity::Plain, true, true},
};

inline const ParameterInfo& parameter(std::string_view name, SweepProtocol protocol)
{
    const bool red = protocol == SweepProtocol::RedMap;
    std::string valid;
    for (const auto& p : kParameters) {
        if (red ? p.red : p.ir) {
            if (name == p.name) return p;
            valid += (valid.empty() ? "" : ", ") + std::string(p.name);
        }
    }
    throw ValidationError("unknown parameter '" + std::string(name) + "' for " + std::string(to_string(protocol)) +
                          " (valid: " + valid + ")");
}

} // namespace detail

inline units::Quantity parameter_quantity(std::string_view name, SweepProtocol protocol)
{
    return detail::parameter(name, protocol).quantity;
}

struct Axis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int points = 2;
    Scale scale = Scale::Linear;
    // Explicit coordinates; when set they replace min/max/points/scale.
    std::vector<double> values;

    void validate() const
    {
        if (!values.empty()) return;
        detail::require(points >= 2, "axis '" + name + "' needs at least 2 points");
        detail::require(std::isfinite(min) && std::isfinite(max), "axis '" + name + "' bounds must be finite");
        detail::require(max >= min, "axis '" + name + "' needs max >= min");
        if (scale == Scale::Log) {
            detail::require(min > 0.0, "log axis '" + name + "' needs min > 0");
        }
    }

    /// Knot i is computed from the fraction i/(points-1) alone, so a coarse grid
    /// reproduces the shared knots of any refinement bit for bit.
    std::vector<double> knots() const
    {
        validate();
        if (!values.empty()) return values;
        std::vector<double> out(static_cast<std::size_t>(points));
        const double n = points - 1;
        for (int i = 0; i < points; ++i) {
            const double f = i / n;
            if (i == 0) {
                out[i] = min;
            } else if (i == points - 1) {
                out[i] = max;
            } else if (scale == Scale::Linear) {
                out[i] = min + f * (max - min);
            } else {
                out[i] = std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
            }
        }
        return out;
    }

    std::size_t size() const { return values.empty() ? static_cast<std::size_t>(points) : values.size(); }
};

/// Parses "name:min:max:points:scale"; min and max may carry unit suffixes.
inline Axis parse_axis(std::string_view text, SweepProtocol protocol)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 5) {
        throw ValidationError("axis '" + std::string(text) + "' must look like name:min:max:points:scale");
    }
    Axis a;
    a.name = parts[0];
    const units::Quantity q = parameter_quantity(a.name, protocol);
    a.min = units::parse(parts[1], q, a.name + " min");
    a.max = units::parse(parts[2], q, a.name + " max");
    const double pts = units::parse_plain(parts[3], a.name + " points");
    detail::require(pts == std::floor(pts) && pts >= 2 && pts <= 1e6, "axis '" + a.name + "' points must be an integer >= 2");
    a.points = static_cast<int>(pts);
    a.scale = parse_scale(parts[4]);
    a.validate();
    return a;
}

struct SweepSpec {
    Axis axis1;
    std::optional<Axis> axis2;
    std::map<std::string, double> fixed;
    SweepProtocol protocol = SweepProtocol::IrMap;
    Environment environment = Environment::Bulk;

    void validate() const
    {
        axis1.validate();
        detail::parameter(axis1.name, protocol);
        if (axis2) {
            axis2->validate();
            detail::parameter(axis2->name, protocol);
            detail::require(axis2->name != axis1.name, "both axes sweep '" + axis1.name + "'");
        }
        for (const auto& [name, value] : fixed) {
            detail::parameter(name, protocol);
            detail::require(std::isfinite(value), "fixed parameter '" + name + "' must be finite");
        }
    }
};

struct GridCell {
    double n0 = 0.0;
    double n1 = 0.0;
    double snr = 0.0;
    double snr_norm = 0.0;
    bool degenerate = false;
};

struct GridResult {
    SweepSpec spec;
    std::vector<double> axis1;
    std::vector<double> axis2; // empty for one-dimensional sweeps
    std::vector<GridCell> cells; // row-major: index = i * max(1, axis2.size()) + j
    std::string config_hash;
    Environment environment = Environment::Bulk;

    std::size_t columns() const { return axis2.empty() ? 1 : axis2.size(); }
    const GridCell& at(std::size_t i, std::size_t j = 0) const { return cells[i * columns() + j]; }
};

/// Starting operating point for a protocol, taken from the configuration.
inline OperatingPoint default_point(const SimConfig& cfg)
{
    OperatingPoint p;
    p.green_duration = cfg.ir.green_duration;
    p.tau = cfg.ir.tau;
    p.ir_power = cfg.ir.ir_power;
    p.ir_duration = cfg.ir.ir_duration;
    p.repetitions = cfg.ir.repetitions;
    p.collection_efficiency = cfg.efficiencies.collection;
    p.detection_efficiency = cfg.efficiencies.detection;
    p.green_power = cfg.ir.green_power;
    return p;
}

inline OperatingPoint red_default_point(const SimConfig& cfg)
{
    OperatingPoint p = default_point(cfg);
    p.green_power = 1.0;
    p.duration = 1.0;
    return p;
}

inline void set_parameter(OperatingPoint& point, std::string_view name, double value, SweepProtocol protocol)
{
    point.*(detail::parameter(name, protocol).member) = value;
}

inline IrProtocolParams ir_params(const OperatingPoint& p)
{
    detail::require(p.repetitions == std::floor(p.repetitions) && p.repetitions >= 1, "repetitions must be an integer >= 1");
    return IrProtocolParams{p.green_power, p.green_duration, p.tau, p.ir_power, p.ir_duration,
                            static_cast<int>(p.repetitions)};
}

/// Readout pair of one operating point.
inline ReadoutResult evaluate_point(SweepProtocol protocol, const OperatingPoint& p, const SimConfig& cfg,
                                    Environment env)
{
    const Efficiencies eff{p.collection_efficiency, p.detection_efficiency};
    const EnvironmentProfile& profile = cfg.environment(env);
    if (protocol == SweepProtocol::RedMap) {
        return readout_pair(red_readout_protocol(p.green_power, p.duration), Channel::Red, cfg.rates, profile, 1.0,
                            cfg.options, eff);
    }
    return readout_pair(ir_readout_protocol(ir_params(p)), Channel::IR, cfg.rates, profile, p.purcell, cfg.options,
                        eff);
}

inline GridCell to_cell(const ReadoutResult& r)
{
    const SnrValue s = snr(r);
    GridCell c;
    c.n0 = r.n0;
    c.n1 = r.n1;
    c.snr = s.value;
    c.snr_norm = s.value / std::sqrt(r.duration);
    c.degenerate = s.degenerate;
    return c;
}

/// Worker count from NVSIM_THREADS, else the hardware concurrency.
inline unsigned sweep_thread_count()
{
    if (const char* env = std::getenv("NVSIM_THREADS"); env && *env) {
        const double v = units::parse_plain(env, "NVSIM_THREADS");
        detail::require(v >= 1 && v == std::floor(v) && v <= 4096, "NVSIM_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline GridResult run_sweep(const SweepSpec& spec, const SimConfig& cfg, unsigned threads = sweep_thread_count())
{
    spec.validate();
    GridResult out;
    out.spec = spec;
    out.axis1 = spec.axis1.knots();
    if (spec.axis2) out.axis2 = spec.axis2->knots();
    out.config_hash = config_hash_hex(cfg);
    out.environment = spec.environment;

    OperatingPoint base = spec.protocol == SweepProtocol::RedMap ? red_default_point(cfg) : default_point(cfg);
    for (const auto& [name, value] : spec.fixed) {
        set_parameter(base, name, value, spec.protocol);
    }

    const std::size_t cols = out.columns();
    const std::size_t count = out.axis1.size() * cols;
    out.cells.resize(count);

    auto evaluate = [&](std::size_t idx) {
        OperatingPoint p = base;
        set_parameter(p, spec.axis1.name, out.axis1[idx / cols], spec.protocol);
        if (spec.axis2) set_parameter(p, spec.axis2->name, out.axis2[idx % cols], spec.protocol);
        out.cells[idx] = to_cell(evaluate_point(spec.protocol, p, cfg, spec.environment));
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) evaluate(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        evaluate(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// SNR against Purcell factor for the IR protocol at a fixed operating point.
inline GridResult purcell_curve(const std::vector<double>& purcell_values, double ir_power, double duration, double tau,
                                Environment env, const SimConfig& cfg, unsigned threads = sweep_thread_count())
{
    detail::require(!purcell_values.empty(), "purcell curve needs at least one Purcell factor");
    for (std::size_t i = 0; i < purcell_values.size(); ++i) {
        detail::require(std::isfinite(purcell_values[i]) && purcell_values[i] >= 1.0,
                        "Purcell factors must be >= 1 (got " + std::to_string(purcell_values[i]) + ")");
        detail::require(i == 0 || purcell_values[i] >= purcell_values[i - 1], "Purcell factors must be sorted");
    }
    SweepSpec spec;
    spec.protocol = SweepProtocol::PurcellCurve;
    spec.environment = env;
    spec.axis1.name = "purcell";
    spec.axis1.values = purcell_values;
    spec.fixed = {{"ir_power", ir_power}, {"ir_duration", duration}, {"tau", tau}};
    return run_sweep(spec, cfg, threads);
}

namespace detail {

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json axis_json(const Axis& a)
{
    nlohmann::json j{{"name", a.name}};
    if (a.values.empty()) {
        j["min"] = a.min;
        j["max"] = a.max;
        j["points"] = a.points;
        j["scale"] = std::string(to_string(a.scale));
    } else {
        j["values"] = a.values;
    }
    return j;
}

} // namespace detail

inline void write_grid_csv(std::ostream& os, const GridResult& g)
{
    os << kGridCsvHeader << '\n';
    const std::size_t cols = g.columns();
    for (std::size_t i = 0; i < g.axis1.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const GridCell& c = g.at(i, j);
            os << detail::format_double(g.axis1[i]) << ',';
            if (!g.axis2.empty()) os << detail::format_double(g.axis2[j]);
            os << ',' << detail::format_double(c.n0) << ',' << detail::format_double(c.n1) << ','
               << detail::format_double(c.snr) << ',' << detail::format_double(c.snr_norm) << ','
               << (c.degenerate ? 1 : 0) << '\n';
        }
    }
}

inline nlohmann::json rates_json(const RateSet& r)
{
    return {{"k_f_minus", r.k_f_minus},
            {"k_f_neutral", r.k_f_neutral},
            {"k_es_0", r.k_es_0},
            {"k_es_1", r.k_es_1},
            {"k_ss_nonrad", r.k_ss_nonrad},
            {"k_ss_rad", r.k_ss_rad},
            {"k_sg_0", r.k_sg_0},
            {"k_sg_1", r.k_sg_1},
            {"ion_green_coeff", r.ion_green_coeff},
            {"ion_ir_coeff", r.ion_ir_coeff},
            {"rec_green_coeff", r.rec_green_coeff},
            {"rec_ir_coeff", r.rec_ir_coeff},
            {"exc_green_minus_coeff", r.exc_green_minus_coeff},
            {"exc_green_neutral_coeff", r.exc_green_neutral_coeff},
            {"exc_ir_singlet_coeff", r.exc_ir_singlet_coeff}};
}

/// Sidecar describing how a grid was produced; config_text reproduces it.
inline nlohmann::json grid_metadata(const GridResult& g, const SimConfig& cfg)
{
    nlohmann::json spec{{"protocol", std::string(to_string(g.spec.protocol))},
                        {"environment", std::string(to_string(g.spec.environment))},
                        {"axis1", detail::axis_json(g.spec.axis1)},
                        {"axis2", g.spec.axis2 ? detail::axis_json(*g.spec.axis2) : nlohmann::json(nullptr)},
                        {"fixed", g.spec.fixed}};
    nlohmann::json purcell = nullptr;
    if (auto it = g.spec.fixed.find("purcell"); it != g.spec.fixed.end()) purcell = it->second;
    return {{"schema", kGridSchema},
            {"config_version", cfg.config_version},
            {"config_hash", g.config_hash},
            {"environment", std::string(to_string(g.environment))},
            {"protocol", std::string(to_string(g.spec.protocol))},
            {"purcell", purcell},
            {"spec", spec},
            {"resolved_rates", rates_json(cfg.environment(g.environment).apply(cfg.rates))},
            {"model",
             {{"purcell_target", std::string(to_string(cfg.options.purcell_target))},
              {"ionization_exponent", cfg.options.ionization_exponent},
              {"recombination_exponent", cfg.options.recombination_exponent},
              {"singlet_ir_ionization", cfg.options.singlet_ir_ionization}}},
            {"cells", g.cells.size()},
            {"csv_header", kGridCsvHeader},
            {"config_text", cfg.source_text}};
}

} // namespace nvsim
