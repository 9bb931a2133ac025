#include "nvsim/sweep.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace nvsim;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

const SimConfig& cfg() { return default_config(); }

std::string csv(const GridResult& g)
{
    std::ostringstream os;
    write_grid_csv(os, g);
    return os.str();
}

SweepSpec small_ir_spec(int nx, int ny)
{
    SweepSpec s;
    s.protocol = SweepProtocol::IrMap;
    s.axis1 = parse_axis("ir_duration:0.05us:2us:" + std::to_string(nx) + ":log", s.protocol);
    s.axis2 = parse_axis("ir_power:10mW:2W:" + std::to_string(ny) + ":log", s.protocol);
    return s;
}

} // namespace

TEST_CASE("axis knots")
{
    const Axis lin = parse_axis("duration:1:3:3:linear", SweepProtocol::RedMap);
    CHECK(lin.knots() == std::vector<double>{1.0, 2.0, 3.0});
    const Axis lg = parse_axis("green_power:0.01mW:100mW:5:log", SweepProtocol::RedMap);
    const auto k = lg.knots();
    REQUIRE(k.size() == 5);
    CHECK(k.front() == 0.01);
    CHECK(k.back() == 100.0);
    CHECK_THAT(k[2], WithinRel(1.0, 1e-14));
    const Axis dur = parse_axis("duration:10ns:1us:2:log", SweepProtocol::RedMap);
    CHECK(dur.knots() == std::vector<double>{0.01, 1.0});

    CHECK_THROWS_AS(parse_axis("duration:1:3:1:linear", SweepProtocol::RedMap), ValidationError);
    CHECK_THROWS_AS(parse_axis("duration:0:3:4:log", SweepProtocol::RedMap), ValidationError);
    CHECK_THROWS_AS(parse_axis("duration:1:3:4", SweepProtocol::RedMap), ValidationError);
    CHECK_THROWS_AS(parse_axis("duration:1:3:4:cubic", SweepProtocol::RedMap), ValidationError);
}

TEST_CASE("unknown parameter lists valid names")
{
    try {
        parse_axis("wobble:1:2:2:linear", SweepProtocol::IrMap);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), ContainsSubstring("wobble") && ContainsSubstring("ir_power") &&
                                 ContainsSubstring("ir_duration"));
    }
    // A red-only parameter is rejected for the IR map.
    CHECK_THROWS_AS(parse_axis("duration:1:2:2:linear", SweepProtocol::IrMap), ValidationError);
}

TEST_CASE("2x2 grid")
{
    SweepSpec s;
    s.protocol = SweepProtocol::RedMap;
    s.axis1 = parse_axis("duration:0.1:1:2:log", s.protocol);
    s.axis2 = parse_axis("green_power:0.5:2:2:linear", s.protocol);
    const GridResult g = run_sweep(s, cfg(), 1);
    CHECK(g.cells.size() == 4);
    CHECK(g.axis1 == std::vector<double>{0.1, 1.0});
    CHECK(g.axis2 == std::vector<double>{0.5, 2.0});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const ReadoutResult r = readout_pair(red_readout_protocol(g.axis2[j], g.axis1[i]), Channel::Red, cfg().rates,
                                                 cfg().bulk, 1.0, cfg().options);
            CHECK(g.at(i, j).n0 == r.n0);
            CHECK(g.at(i, j).n1 == r.n1);
            CHECK(g.at(i, j).snr == snr(r).value);
            CHECK_FALSE(g.at(i, j).degenerate);
        }
    }
    const std::string text = csv(g);
    CHECK(text.rfind(std::string(kGridCsvHeader) + "\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("coarse grid is a subset of the fine grid")
{
    const GridResult coarse = run_sweep(small_ir_spec(3, 3), cfg(), 1);
    const GridResult fine = run_sweep(small_ir_spec(5, 5), cfg(), 1);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(coarse.axis1[i] == fine.axis1[2 * i]);
            CHECK(coarse.axis2[j] == fine.axis2[2 * j]);
            const GridCell& a = coarse.at(i, j);
            const GridCell& b = fine.at(2 * i, 2 * j);
            CHECK(std::abs(a.snr - b.snr) <= 1e-12 * std::max(1.0, std::abs(b.snr)));
            CHECK(std::abs(a.n0 - b.n0) <= 1e-12 * std::max(1.0, std::abs(b.n0)));
        }
    }
}

TEST_CASE("thread count does not change the output")
{
    const SweepSpec s = small_ir_spec(4, 3);
    const std::string one = csv(run_sweep(s, cfg(), 1));
    CHECK(csv(run_sweep(s, cfg(), 3)) == one);
    CHECK(csv(run_sweep(s, cfg(), 8)) == one);
}

TEST_CASE("degenerate cells are flagged, not dropped")
{
    SweepSpec s;
    s.protocol = SweepProtocol::IrMap;
    s.axis1 = parse_axis("ir_power:0:1:2:linear", s.protocol);
    s.fixed = {{"green_power", 0.0}};
    const GridResult g = run_sweep(s, cfg(), 1);
    REQUIRE(g.cells.size() == 2);
    // No pump: nothing reaches the singlet, so no IR photons either way.
    CHECK(g.at(0).degenerate);
    CHECK(g.at(0).snr == 0.0);
}

TEST_CASE("metadata reproduces the grid")
{
    const SweepSpec s = small_ir_spec(2, 3);
    const GridResult g = run_sweep(s, cfg(), 1);
    const nlohmann::json meta = grid_metadata(g, cfg());
    CHECK(meta["schema"] == kGridSchema);
    CHECK(meta["config_hash"] == config_hash_hex(cfg()));
    CHECK(meta["environment"] == "bulk");
    CHECK(meta["csv_header"] == kGridCsvHeader);
    CHECK(meta["cells"] == 6);
    CHECK(meta["resolved_rates"]["k_f_minus"] == 65.9);

    const SimConfig again = parse_config(meta["config_text"].get<std::string>());
    CHECK(config_hash_hex(again) == meta["config_hash"]);
    SweepSpec rebuilt;
    rebuilt.protocol = SweepProtocol::IrMap;
    const auto& a1 = meta["spec"]["axis1"];
    const auto& a2 = meta["spec"]["axis2"];
    rebuilt.axis1 = Axis{a1["name"], a1["min"], a1["max"], a1["points"], parse_scale(a1["scale"].get<std::string>()), {}};
    rebuilt.axis2 = Axis{a2["name"], a2["min"], a2["max"], a2["points"], parse_scale(a2["scale"].get<std::string>()), {}};
    CHECK(csv(run_sweep(rebuilt, again, 2)) == csv(g));
}

TEST_CASE("Purcell curve")
{
    const std::vector<double> fps = {1.0, 3.0, 10.0, 40.0, 100.0, 300.0, 1000.0};
    const GridResult g = purcell_curve(fps, 1000.0, 1.0, 0.01, Environment::Bulk, cfg(), 1);
    REQUIRE(g.cells.size() == fps.size());
    CHECK(g.axis1 == fps);

    // Fp = 1 is the uncavitated IR pipeline.
    const ReadoutResult bare =
        readout_pair(ir_readout_protocol(cfg().ir), Channel::IR, cfg().rates, cfg().bulk, 1.0, cfg().options);
    CHECK(g.at(0).n0 == bare.n0);
    CHECK(g.at(0).n1 == bare.n1);
    CHECK(g.at(0).snr == snr(bare).value);

    for (std::size_t i = 1; i < fps.size(); ++i) {
        CHECK(g.at(i).snr >= g.at(i - 1).snr);
        CHECK(g.at(i).n0 > g.at(i - 1).n0);
        CHECK(g.at(i).n1 > g.at(i - 1).n1);
        CHECK(g.at(i).n1 > g.at(i).n0);
    }
    CHECK_THROWS_AS(purcell_curve({0.5, 2.0}, 1000.0, 1.0, 0.01, Environment::Bulk, cfg(), 1), ValidationError);
    CHECK_THROWS_AS(purcell_curve({3.0, 2.0}, 1000.0, 1.0, 0.01, Environment::Bulk, cfg(), 1), ValidationError);

    std::ostringstream os;
    write_grid_csv(os, g);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.rfind("1,,", 0) == 0);
}

TEST_CASE("surface environment uses its overrides")
{
    SweepSpec s = small_ir_spec(2, 2);
    const GridResult bulk = run_sweep(s, cfg(), 1);
    s.environment = Environment::Surface;
    const GridResult surface = run_sweep(s, cfg(), 1);
    CHECK(surface.environment == Environment::Surface);
    CHECK(surface.at(1, 1).snr != bulk.at(1, 1).snr);
}

TEST_CASE("fixed parameters are validated")
{
    SweepSpec s = small_ir_spec(2, 2);
    s.fixed = {{"nonsense", 1.0}};
    CHECK_THROWS_AS(run_sweep(s, cfg(), 1), ValidationError);
    s.fixed = {{"repetitions", 2.5}};
    CHECK_THROWS_AS(run_sweep(s, cfg(), 1), ValidationError);
}
