// nvsim: NV-center spin readout simulator.
//
// Subcommands: trace, red-map, ir-map, purcell-curve, purcell, calibrate-pump,
// validate-config. Exit status 0 on success, 2 on invalid input, 1 on a
// numeric failure.

#include "nvsim/nvsim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nvsim;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string env = "bulk";
    std::string out_dir = ".";
    std::optional<double> purcell;
    std::string convention = "eq2";
};

struct ProtocolOptions {
    std::string green_power;
    std::string duration;
    std::string green_duration;
    std::string tau;
    std::string ir_power;
    std::string ir_duration;
    std::optional<int> repetitions;
};

SimConfig load(const GlobalOptions& g)
{
    return g.config_path.empty() ? default_config() : load_config(g.config_path);
}

fs::path output_path(const GlobalOptions& g, const std::string& name)
{
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write '" + path.string() + "'");
    return os;
}

void add_protocol_options(CLI::App* cmd, ProtocolOptions& p, bool red)
{
    cmd->add_option("--green-power", p.green_power, "green power (e.g. 1mW, 0.2)");
    if (red) {
        cmd->add_option("--duration", p.duration, "red readout window (e.g. 300ns)");
    }
    cmd->add_option("--green-duration", p.green_duration, "IR protocol green pump duration");
    cmd->add_option("--tau", p.tau, "IR protocol dark delay");
    cmd->add_option("--ir-power", p.ir_power, "IR probe power (in-cavity)");
    cmd->add_option("--ir-duration", p.ir_duration, "IR probe duration");
    cmd->add_option("--repetitions", p.repetitions, "IR protocol passes");
}

IrProtocolParams resolve_ir(const SimConfig& cfg, const ProtocolOptions& p)
{
    IrProtocolParams ir = cfg.ir;
    if (!p.green_power.empty()) ir.green_power = units::parse_power(p.green_power, "--green-power");
    if (!p.green_duration.empty()) ir.green_duration = units::parse_duration(p.green_duration, "--green-duration");
    if (!p.tau.empty()) ir.tau = units::parse_duration(p.tau, "--tau");
    if (!p.ir_power.empty()) ir.ir_power = units::parse_power(p.ir_power, "--ir-power");
    if (!p.ir_duration.empty()) ir.ir_duration = units::parse_duration(p.ir_duration, "--ir-duration");
    if (p.repetitions) ir.repetitions = *p.repetitions;
    return ir;
}

std::map<std::string, double> parse_fixed(const std::vector<std::string>& items, SweepProtocol protocol)
{
    std::map<std::string, double> fixed;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("--fix expects name=value (got '" + item + "')");
        const std::string name = item.substr(0, eq);
        fixed[name] = units::parse(item.substr(eq + 1), parameter_quantity(name, protocol), name);
    }
    return fixed;
}

void write_grid(const GlobalOptions& g, const SimConfig& cfg, const GridResult& grid, const std::string& stem)
{
    const fs::path csv = output_path(g, stem + ".csv");
    const fs::path json = output_path(g, stem + ".json");
    {
        auto os = open_output(csv);
        write_grid_csv(os, grid);
    }
    {
        auto os = open_output(json);
        os << grid_metadata(grid, cfg).dump(2) << '\n';
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.cells.size(); ++i) {
        if (grid.cells[i].snr > grid.cells[best].snr) best = i;
    }
    const std::size_t cols = grid.columns();
    std::printf("%s: %zu cells -> %s; max snr %.6g at %s=%.6g", stem.c_str(), grid.cells.size(), csv.string().c_str(),
                grid.cells[best].snr, grid.spec.axis1.name.c_str(), grid.axis1[best / cols]);
    if (grid.spec.axis2) {
        std::printf(" %s=%.6g", grid.spec.axis2->name.c_str(), grid.axis2[best % cols]);
    }
    std::printf(" (config %s)\n", grid.config_hash.c_str());
}

int run_map(const GlobalOptions& g, SweepProtocol protocol, const std::string& x, const std::string& y,
            const std::vector<std::string>& fix)
{
    const SimConfig cfg = load(g);
    SweepSpec spec;
    spec.protocol = protocol;
    spec.environment = parse_environment(g.env);
    spec.axis1 = parse_axis(x, protocol);
    if (!y.empty() && y != "none") spec.axis2 = parse_axis(y, protocol);
    spec.fixed = parse_fixed(fix, protocol);
    if (g.purcell && protocol != SweepProtocol::RedMap) spec.fixed["purcell"] = *g.purcell;
    const GridResult grid = run_sweep(spec, cfg);
    write_grid(g, cfg, grid, protocol == SweepProtocol::RedMap ? "red_map" : "ir_map");
    return 0;
}

void print_cavity(const CavityParams& c, PrefactorConvention selected)
{
    const double standard = purcell_factor(c, PrefactorConvention::Standard);
    const double reported = purcell_factor(c, PrefactorConvention::Reported);
    char published[32] = "n/a";
    if (c.published_fp) std::snprintf(published, sizeof published, "%.1f", *c.published_fp);
    std::printf("%-12s Q=%-8g V=%g (lambda/n)^3  eq2=%.1f  paper_values=%.1f  published=%s  collection=%.2f  "
                "selected(%s)=%.1f\n",
                c.label.c_str(), c.q, c.v_norm, standard, reported, published, c.collection_efficiency,
                std::string(to_string(selected)).c_str(),
                selected == PrefactorConvention::Standard ? standard : reported);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nvsim - NV-center spin readout simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "configuration file (default: built-in)");
    app.add_option("--env", g.env, "environment: bulk|surface");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--purcell", g.purcell, "Purcell factor applied to the IR protocol");
    app.add_option("--convention", g.convention, "Purcell prefactor: eq2|paper_values");

    // trace
    auto* trace = app.add_subcommand("trace", "population and photon trajectory of one protocol run");
    std::string trace_protocol = "ir";
    std::string trace_sequence_file;
    std::string trace_spin = "ms0";
    std::size_t trace_samples = 50;
    ProtocolOptions trace_opts;
    trace->add_option("--protocol", trace_protocol, "red|ir");
    trace->add_option("--sequence", trace_sequence_file, "sequence file (overrides --protocol)");
    trace->add_option("--spin", trace_spin, "ms0|ms1");
    trace->add_option("--samples", trace_samples, "samples per segment (>= 2)");
    add_protocol_options(trace, trace_opts, true);

    // maps
    auto* red_map = app.add_subcommand("red-map", "red-readout SNR over green power and duration");
    std::string red_x = "duration:10ns:100us:50:log";
    std::string red_y = "green_power:0.01mW:100mW:50:log";
    std::vector<std::string> red_fix;
    red_map->add_option("--x", red_x, "axis name:min:max:points:scale");
    red_map->add_option("--y", red_y, "second axis, or 'none'");
    red_map->add_option("--fix", red_fix, "fixed parameter name=value");

    auto* ir_map = app.add_subcommand("ir-map", "IR-readout SNR over IR power and duration");
    std::string ir_x = "ir_duration:10ns:100us:30:log";
    std::string ir_y = "ir_power:1mW:10W:30:log";
    std::vector<std::string> ir_fix;
    ir_map->add_option("--x", ir_x, "axis name:min:max:points:scale");
    ir_map->add_option("--y", ir_y, "second axis, or 'none'");
    ir_map->add_option("--fix", ir_fix, "fixed parameter name=value");

    // purcell-curve
    auto* curve = app.add_subcommand("purcell-curve", "IR-readout SNR against Purcell factor");
    double fp_min = 1.0;
    double fp_max = 1e4;
    int fp_points = 41;
    std::vector<double> fp_list;
    std::string curve_ir_power = "1W";
    std::string curve_duration = "1us";
    std::string curve_tau = "10ns";
    curve->add_option("--fp-min", fp_min, "smallest Purcell factor");
    curve->add_option("--fp-max", fp_max, "largest Purcell factor");
    curve->add_option("--points", fp_points, "log-spaced points");
    curve->add_option("--fp", fp_list, "explicit sorted Purcell factors");
    curve->add_option("--ir-power", curve_ir_power, "in-cavity IR power");
    curve->add_option("--duration", curve_duration, "IR readout duration");
    curve->add_option("--tau", curve_tau, "dark delay");

    // purcell
    auto* purcell = app.add_subcommand("purcell", "Purcell factor of a cavity preset or custom cavity");
    std::string preset_name;
    std::optional<double> custom_q;
    std::optional<double> custom_v;
    purcell->add_option("--preset", preset_name, "nanodiamond|membrane|bulk (default: all)");
    purcell->add_option("--q", custom_q, "quality factor of a custom cavity");
    purcell->add_option("--v", custom_v, "mode volume of a custom cavity in (lambda/n)^3");

    // calibrate-pump
    auto* calibrate = app.add_subcommand("calibrate-pump", "green pump power maximizing singlet shelving contrast");
    std::string cal_duration;
    std::string cal_tau;
    calibrate->add_option("--green-duration", cal_duration, "pump duration (default from config)");
    calibrate->add_option("--tau", cal_tau, "dark delay (default from config)");

    auto* validate = app.add_subcommand("validate-config", "parse and check a configuration file");
    std::string validate_path;
    validate->add_option("path", validate_path, "configuration file (default: --config or built-in)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const PrefactorConvention convention = parse_convention(g.convention);
        parse_environment(g.env);

        if (*trace) {
            const SimConfig cfg = load(g);
            PulseSequence seq;
            if (!trace_sequence_file.empty()) {
                seq = load_sequence(trace_sequence_file);
            } else if (trace_protocol == "red") {
                const double power = trace_opts.green_power.empty()
                                         ? 1.0
                                         : units::parse_power(trace_opts.green_power, "--green-power");
                const double duration =
                    trace_opts.duration.empty() ? 1.0 : units::parse_duration(trace_opts.duration, "--duration");
                seq = red_readout_protocol(power, duration);
            } else if (trace_protocol == "ir") {
                seq = ir_readout_protocol(resolve_ir(cfg, trace_opts));
            } else {
                throw ValidationError("--protocol must be red|ir (got '" + trace_protocol + "')");
            }
            seq.initial_spin = parse_spin(trace_spin);
            const auto samples = trace_sequence(seq, cfg.rates, cfg.environment(parse_environment(g.env)),
                                                g.purcell.value_or(1.0), trace_samples, cfg.options);
            const fs::path path = output_path(g, "trace.csv");
            {
                auto os = open_output(path);
                write_trace_csv(os, samples);
            }
            const auto& last = samples.back();
            std::printf("trace: %zu samples over %.6g us -> %s; red=%.6g ir=%.6g photons\n", samples.size(),
                        last.t_us, path.string().c_str(), last.cumulative.red, last.cumulative.ir);
            return 0;
        }
        if (*red_map) return run_map(g, SweepProtocol::RedMap, red_x, red_y, red_fix);
        if (*ir_map) return run_map(g, SweepProtocol::IrMap, ir_x, ir_y, ir_fix);
        if (*curve) {
            const SimConfig cfg = load(g);
            std::vector<double> fps = fp_list;
            if (fps.empty()) {
                Axis axis{"purcell", fp_min, fp_max, fp_points, Scale::Log, {}};
                fps = axis.knots();
            }
            const GridResult grid = purcell_curve(fps, units::parse_power(curve_ir_power, "--ir-power"),
                                                  units::parse_duration(curve_duration, "--duration"),
                                                  units::parse_duration(curve_tau, "--tau"),
                                                  parse_environment(g.env), cfg);
            write_grid(g, cfg, grid, "purcell_curve");
            return 0;
        }
        if (*purcell) {
            if (custom_q || custom_v) {
                if (!custom_q || !custom_v) throw ValidationError("custom cavity needs both --q and --v");
                CavityParams c{*custom_q, *custom_v, 1042.0, 1.0, 1.0, "custom", std::nullopt};
                print_cavity(c, convention);
            } else if (!preset_name.empty()) {
                print_cavity(preset(preset_name), convention);
            } else {
                for (CavityPreset p : kAllPresets) print_cavity(preset(p), convention);
            }
            return 0;
        }
        if (*calibrate) {
            const SimConfig cfg = load(g);
            const double duration =
                cal_duration.empty() ? cfg.ir.green_duration : units::parse_duration(cal_duration, "--green-duration");
            const double tau = cal_tau.empty() ? cfg.ir.tau : units::parse_duration(cal_tau, "--tau");
            const PumpCalibration c =
                calibrate_pump(cfg.rates, cfg.environment(parse_environment(g.env)), duration, tau, 1e-3, 1e2,
                               cfg.options);
            std::printf("calibrate-pump: green_power=%.4g mW for %.4g us pump + %.4g us delay; singlet ground ms0=%.4f "
                        "ms1=%.4f difference=%.4f\n",
                        c.green_power, duration, tau, c.shelved_ms0, c.shelved_ms1, c.difference());
            return 0;
        }
        if (*validate) {
            const std::string path = !validate_path.empty() ? validate_path : g.config_path;
            const SimConfig cfg = path.empty() ? default_config() : load_config(path);
            std::printf("config OK: %s (version %d, hash %s)\n", path.empty() ? "built-in defaults" : path.c_str(),
                        cfg.config_version, config_hash_hex(cfg).c_str());
            return 0;
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
