// mpq: scenario runner, figure presets, sweeps and circuit parameter reports.
//
// Exit codes: 0 ok, 2 invalid input, 3 convergence or truncation failure, 1 other errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpq/errors.hpp"
#include "mpq/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<int> cutoff;
    std::string dt;
    std::string out_dir = ".";
    std::string format = "csv";
    bool convergence_check = false;
    int threads = 1;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--cutoff", o.cutoff, "resonator Fock cutoff")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", o.dt, "fixed step with unit, e.g. \"5 ps\"");
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "series format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--convergence-check", o.convergence_check, "repeat at dt/2 and record the difference");
}

void apply(mpq::Scenario& s, const Overrides& o) {
    if (o.cutoff) s.cutoff = *o.cutoff;
    if (!o.dt.empty()) s.dt = mpq::parse_quantity(o.dt);
    if (o.convergence_check) s.convergence_check = true;
    s.validate();
}

void print_warnings(const std::vector<std::string>& w) {
    for (const auto& m : w) std::cerr << "warning: " << m << "\n";
}

void write_sweep(const mpq::SweepResult& r, const mpq::Scenario& s, const Overrides& o) {
    const fs::path p = fs::path(o.out_dir) / (s.name + ".sweep.csv");
    mpq::write_atomic(p, r.to_csv());
    std::cout << p.string() << "\n";
}

void run_one(const mpq::Scenario& s, const Overrides& o) {
    if (!s.sweep.empty()) {
        write_sweep(mpq::run_sweep(s, s.sweep, o.threads), s, o);
        return;
    }
    const auto r = mpq::run_scenario(s);
    print_warnings(r.warnings);
    for (const auto& p : mpq::write_outputs(r, s, o.out_dir, o.format)) std::cout << p.string() << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mpq::ValidationError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty())
        std::cout << text;
    else
        mpq::write_atomic(out, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven multiphoton qubit-resonator simulator"};
    app.set_version_flag("--version", mpq::version());
    app.require_subcommand(1);

    Overrides o;

    std::string scenario_file;
    auto* run = app.add_subcommand("run", "run a scenario file (runs its sweep block if present)");
    run->add_option("scenario", scenario_file, "scenario YAML")->required();
    run->add_option("--threads", o.threads, "sweep workers")->check(CLI::PositiveNumber);
    add_run_flags(run, o);

    std::string preset_name, preset_out;
    bool preset_run = false, preset_list = false;
    auto* preset = app.add_subcommand("preset", "emit a figure preset as YAML");
    preset->add_option("name", preset_name, "preset name");
    preset->add_option("-o,--output", preset_out, "write to file instead of stdout");
    preset->add_flag("--list", preset_list, "list preset names");
    preset->add_flag("--run", preset_run, "run the preset instead of emitting it");
    preset->add_option("--threads", o.threads, "sweep workers")->check(CLI::PositiveNumber);
    add_run_flags(preset, o);

    std::vector<std::string> axes;
    auto* sweep = app.add_subcommand("sweep", "cartesian sweep over one or two axes");
    sweep->add_option("scenario", scenario_file, "scenario YAML")->required();
    sweep->add_option("--axis", axes, "param=v1,v2,... unit (repeatable, at most two)")->required();
    sweep->add_option("--threads", o.threads, "parallel workers")->check(CLI::PositiveNumber);
    add_run_flags(sweep, o);

    std::string circuit_file, circuit_preset, circuit_out;
    double ej1_ghz = 14.0, ej2_ghz = 13.72;
    bool emit_config = false;
    auto* circuit = app.add_subcommand("circuit-derive", "derive frequencies and couplings from circuit elements");
    circuit->add_option("config", circuit_file, "circuit YAML");
    circuit->add_option("--preset", circuit_preset, "built-in circuit")->check(CLI::IsMember({"table1"}));
    circuit->add_option("--EJ1", ej1_ghz, "SQUID junction 1 energy in GHz (preset only)");
    circuit->add_option("--EJ2", ej2_ghz, "SQUID junction 2 energy in GHz (preset only)");
    circuit->add_flag("--emit-config", emit_config, "print the preset as an editable config");
    circuit->add_option("-o,--output", circuit_out, "write to file instead of stdout");

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario, print resolved parameters");
    validate->add_option("scenario", scenario_file, "scenario YAML")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            auto s = mpq::load_scenario(scenario_file);
            apply(s, o);
            run_one(s, o);
        } else if (*preset) {
            if (preset_list) {
                for (const auto& n : mpq::preset_names()) std::cout << n << "\n";
                return 0;
            }
            if (preset_name.empty()) throw mpq::ValidationError("preset needs a name (see --list)");
            auto s = mpq::figure_preset(preset_name);
            apply(s, o);
            if (preset_run)
                run_one(s, o);
            else
                emit(mpq::emit_scenario(s), preset_out);
        } else if (*sweep) {
            auto s = mpq::load_scenario(scenario_file);
            apply(s, o);
            std::vector<mpq::SweepAxis> ax;
            for (const auto& a : axes) ax.push_back(mpq::parse_axis(a));
            write_sweep(mpq::run_sweep(s, ax, o.threads), s, o);
        } else if (*circuit) {
            std::string text;
            if (!circuit_preset.empty()) {
                if (!circuit_file.empty()) throw mpq::ValidationError("give a config file or --preset, not both");
                text = mpq::emit_table1_circuit_config(mpq::kTwoPi * 1e9 * ej1_ghz, mpq::kTwoPi * 1e9 * ej2_ghz);
            } else if (!circuit_file.empty()) {
                text = read_file(circuit_file);
            } else {
                throw mpq::ValidationError("circuit-derive needs a config file or --preset table1");
            }
            if (emit_config) {
                emit(text, circuit_out);
            } else {
                const auto report = mpq::circuit_report(mpq::parse_circuit_config(text));
                emit(report.dump(2) + "\n", circuit_out);
            }
        } else if (*validate) {
            const auto s = mpq::load_scenario(scenario_file);
            std::cout << nlohmann::json{{"scenario", s.name}, {"model", s.model}, {"resolved", s.resolved()},
                                        {"regime", mpq::regime_diagnostics(s)}}
                             .dump(2)
                      << "\n";
        }
    } catch (const mpq::ValidationError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 2;
    } catch (const mpq::InvalidArgument& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 2;
    } catch (const mpq::ConvergenceFailure& e) {
        std::cerr << "convergence failure: " << e.what() << "\n" << e.diagnostics << "\n";
        return 3;
    } catch (const mpq::TruncationError& e) {
        std::cerr << "truncation failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
