#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpq/scenario.hpp"

using namespace mpq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("mpq_test_scenario_" + name);
    fs::remove_all(p);
    return p;
}

Scenario small_jc() {
    Scenario s;
    s.name = "jc";
    s.model = "two_photon_jc";
    s.params = {{"omega_q", {10, "GHz"}}, {"omega_r", {5, "GHz"}}, {"g_2", {20, "MHz"}}};
    s.initial = {"g", 2};
    s.t_end = {10, "ns"};
    s.points = 11;
    s.observables = {"P_e", "n"};
    s.cutoff = 10;
    return s;
}

}  // namespace

TEST_CASE("quantities and units") {
    auto q = parse_quantity(" 10 GHz ");
    CHECK(q.value == 10.0);
    CHECK(q.unit == "GHz");
    CHECK(to_si(q, Dim::Frequency) == doctest::Approx(kTwoPi * 1e10).epsilon(1e-15));
    CHECK(to_si(parse_quantity("330 fF"), Dim::Capacitance) == doctest::Approx(330e-15));
    CHECK(to_si(parse_quantity("5 ps"), Dim::Time) == doctest::Approx(5e-12));
    CHECK(to_si(parse_quantity("1 MHz"), Dim::Rate) == 1e6);
    CHECK(to_si(parse_quantity("1 MHz"), Dim::Rate, true) == doctest::Approx(kTwoPi * 1e6));
    CHECK(to_si(parse_quantity("0.5 Phi0"), Dim::Flux) == doctest::Approx(kFluxQuantum / 2));
    CHECK(to_si(parse_quantity("2"), Dim::None) == 2.0);
    CHECK_THROWS_AS(to_si(parse_quantity("10"), Dim::Frequency), ValidationError);
    CHECK_THROWS_AS(to_si(parse_quantity("10 ns"), Dim::Frequency), ValidationError);
    CHECK_THROWS_AS(parse_quantity("GHz"), ValidationError);
    CHECK(format_quantity({0.1, "GHz"}) == "0.1 GHz");
    CHECK(format_quantity({9.4280904158206322, "ns"}) == "9.428090415820632 ns");
    for (double v : {0.1, 1.0 / 3.0, 9.4280904158206322, 1e-300, -2.5})
        CHECK(parse_quantity(format_quantity({v, "s"})).value == v);
}

TEST_CASE("atomic writes leave no temporaries") {
    auto dir = scratch("atomic");
    write_atomic(dir / "a" / "x.txt", "hello");
    write_atomic(dir / "a" / "x.txt", "world");
    CHECK(slurp(dir / "a" / "x.txt") == "world");
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "a")) ++count;
    CHECK(count == 1);
    fs::remove_all(dir);
}

TEST_CASE("presets round-trip through the config format") {
    for (const auto& name : preset_names()) {
        INFO(name);
        const Scenario s = figure_preset(name);
        CHECK_NOTHROW(s.validate());
        const std::string text = emit_scenario(s);
        CHECK(text.find("multiplied by 2 pi") != std::string::npos);
        const Scenario back = parse_scenario(text);
        CHECK(back == s);
        CHECK(emit_scenario(back) == text);
    }
    CHECK_THROWS_AS(figure_preset("fig4"), ValidationError);

    const auto f1 = figure_preset("fig1a");
    const auto r = resolve_drive(f1);
    CHECK(r.two.omega_1 == doctest::Approx(kTwoPi * 1.4e9));
    CHECK(r.two.delta_d() == doctest::Approx(kTwoPi * 1.4e9));
    CHECK(g_n_eff(r.sys) == doctest::Approx(kTwoPi * 10e6));
    CHECK(omega_r_eff(r.sys, r.two) == doctest::Approx(kTwoPi * 10e6).epsilon(1e-9));
    CHECK(r.two.omega_q_eff() == 0.0);
    CHECK(resolve_drive(figure_preset("fig1c")).two.omega_q_eff() == doctest::Approx(kTwoPi * 10e6));
    CHECK(r.sys.omega_q - r.two.omega_d1 == doctest::Approx(kTwoPi * 20e6));
    const auto f6 = figure_preset("fig6");
    CHECK(f6.cutoff == 150);
    CHECK(f6.decoherence->kappa == Quantity{1, "MHz"});
    CHECK(figure_preset("fig3").sweep.at(0).values.size() == 5);
}

TEST_CASE("validation failures") {
    auto s = small_jc();
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.model = "nonesuch";
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.set("omega_r", {5, ""});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.set("bogus", {1, "GHz"});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.observables.push_back("entropy");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.initial.fock = 10;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.sweep = {{"nonesuch", {{1, "GHz"}}}};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.model = "rotating_frame_rwa";  // needs drive parameters
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(parse_scenario("model: tla\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("model: [\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("model: two_photon_jc\ntime: {t_end: 1 ns}\nextra: 1\n"), ValidationError);
    CHECK_THROWS_AS(run_sweep(s, {{"g_7", {{1, "MHz"}}}}), ValidationError);
}

TEST_CASE("running a scenario") {
    const auto s = small_jc();
    auto r = run_scenario(s);
    const auto& pe = r.series.channel("P_e");
    const double g2 = kTwoPi * 20e6;
    for (size_t i = 0; i < pe.size(); ++i)
        CHECK(std::abs(pe[i] - std::pow(std::sin(std::sqrt(2.0) * g2 * r.series.times()[i]), 2)) < 1e-9);
    CHECK(r.metadata["resolved"]["params"]["g_2"]["value"].get<double>() == doctest::Approx(g2));
    CHECK(r.metadata["version"] == version());

    auto dir = scratch("run");
    auto files = write_outputs(r, s, dir, "csv");
    const std::string csv = slurp(dir / "jc.csv");
    CHECK(csv.rfind("# {", 0) == 0);
    CHECK(csv.find("\"g_2\"") != std::string::npos);
    // fixed-step determinism
    auto r2 = run_scenario(s);
    write_outputs(r2, s, dir / "again", "csv");
    CHECK(slurp(dir / "again" / "jc.csv") == csv);
    write_outputs(r, s, dir / "j", "json");
    auto j = nlohmann::json::parse(slurp(dir / "j" / "jc.json"));
    CHECK(j["metadata"]["scenario"] == "jc");
    CHECK_THROWS_AS(write_outputs(r, s, dir, "xml"), ValidationError);

    // empty observables: metadata only
    auto dry = s;
    dry.observables.clear();
    auto rd = run_scenario(dry);
    CHECK(rd.metadata["dry_run"] == true);
    auto df = write_outputs(rd, dry, dir / "dry", "csv");
    CHECK(df.size() == 1);
    CHECK(fs::exists(dir / "dry" / "jc.summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("reference model and regime warnings") {
    auto s = small_jc();
    s.model = "tla";
    s.reference = "two_photon_jc";
    s.params = {{"omega_q", {10, "GHz"}}, {"omega_r", {5, "GHz"}}, {"g_2", {20, "MHz"}}, {"g_c", {30, "MHz"}}};
    auto r = run_scenario(s);
    CHECK(r.series.has("ref_P_e"));
    CHECK(r.summary["max_abs_diff_P_e"].get<double>() > 0.0);
    CHECK(r.summary["max_abs_diff_P_e"].get<double>() < 0.2);
    CHECK(r.metadata["regime"]["all_pass"] == true);

    auto f1 = figure_preset("fig1a");
    auto diag = regime_diagnostics(f1);
    bool warned = false;
    for (const auto& c : diag["checks"])
        if (c["name"] == "Omega/omega_d") warned = c["status"] == "warn";
    CHECK(warned);
}

TEST_CASE("open-system runs report fidelity against closed evolution") {
    Scenario s;
    s.name = "open";
    s.model = "rotating_frame_rwa";
    s.params = {{"omega_q", {10, "GHz"}}, {"Delta", {0, "MHz"}}, {"delta_n", {0, "MHz"}},
                {"Omega", {0.5, "GHz"}},  {"g", {20, "MHz"}},    {"n", {2, ""}}};
    s.t_end = {5, "ns"};
    s.points = 6;
    s.observables = {"n"};
    s.cutoff = 12;
    s.dt = {5, "ps"};
    s.decoherence = DecoherenceSpec{};
    auto r0 = run_scenario(s);
    CHECK(r0.summary["fidelity"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    s.decoherence->kappa = {1, "MHz"};
    auto r1 = run_scenario(s);
    CHECK(r1.summary["fidelity"].get<double>() < 1.0 - 1e-5);
    CHECK(r1.series.has("F_closed"));
    CHECK(r1.summary["trace_drift"].get<double>() < 1e-8);
}

TEST_CASE("sweeps") {
    auto s = small_jc();
    s.sweep.clear();
    auto one = run_sweep(s, {{"g_2", {{20, "MHz"}}}});
    REQUIRE(one.rows.size() == 1);
    auto direct = run_scenario(s);
    const auto it = std::find(one.columns.begin(), one.columns.end(), "final_P_e");
    REQUIRE(it != one.columns.end());
    CHECK(one.rows[0][it - one.columns.begin()] == direct.summary["final_P_e"].get<double>());

    const auto axes = std::vector<SweepAxis>{parse_axis("g_2=10,20 MHz"), parse_axis("omega_r=5 GHz,5.01 GHz")};
    CHECK(axes[0].values[0] == Quantity{10, "MHz"});
    auto a = run_sweep(s, axes, 1);
    auto b = run_sweep(s, axes, 3);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.rows == b.rows);
    CHECK(a.rows[1][0] == doctest::Approx(kTwoPi * 10e6));
    CHECK(a.rows[1][1] == doctest::Approx(kTwoPi * 5.01e9));
    CHECK(a.to_csv().find("g_2,omega_r,") != std::string::npos);
    CHECK_THROWS_AS(parse_axis("novalues"), ValidationError);
}

TEST_CASE("circuit config") {
    const auto text = emit_table1_circuit_config(kTwoPi * 18e9, kTwoPi * 17.5e9);
    const auto cfg = parse_circuit_config(text);
    const auto ref = table1_circuit(kTwoPi * 18e9, kTwoPi * 17.5e9);
    CHECK(cfg.spec.C_t == doctest::Approx(ref.C_t).epsilon(1e-14));
    CHECK(cfg.spec.L_r == doctest::Approx(ref.L_r).epsilon(1e-14));
    CHECK(cfg.spec.Phi_ext == doctest::Approx(ref.Phi_ext).epsilon(1e-14));
    auto rep = circuit_report(cfg);
    CHECK(rep["derived_over_2pi_hz"]["omega_q"].get<double>() == doctest::Approx(10.038e9).epsilon(1e-4));
    CHECK(rep["regime"]["strong_coupling_margin"].is_null());
    CHECK_THROWS_AS(parse_circuit_config("circuit: {E_Jt: 1 GHz}\n"), ValidationError);
    const auto with = parse_circuit_config(text + "rates: {kappa: 5 kHz, angular: true}\n");
    REQUIRE(with.rates.has_value());
    CHECK(with.rates->kappa == doctest::Approx(kTwoPi * 5e3));
}

TEST_CASE("fig2 preset emits two Wigner grids") {
    auto s = figure_preset("fig2");
    s.wigner_points = 61;
    auto r = run_scenario(s);
    REQUIRE(r.wigner.size() == 2);
    CHECK(r.summary["negative_volume_dressed+"].get<double>() < 1e-6);
    CHECK(r.summary["wigner_min_bare_e"].get<double>() < -0.01);
    auto dir = scratch("fig2");
    auto files = write_outputs(r, s, dir, "csv");
    CHECK(fs::exists(dir / "fig2.wigner_dressedplus.ppm"));
    CHECK(fs::exists(dir / "fig2.wigner_bare_e.csv"));
    fs::remove_all(dir);
}
