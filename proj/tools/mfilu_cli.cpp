#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfilu/scenario.hpp"

using namespace mfilu;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

// Options shared by every subcommand. Values stay unset unless given, so a
// config file can fill them first.
struct CommonOptions {
    std::string config_file;
    std::vector<std::string> settings;
    std::map<std::string, std::string> flags;
    std::vector<int> degrees;
    bool no_reorder = false;
    bool timing = false;
    std::string history;
    std::string plot;

    void add(CLI::App* app) {
        app->add_option("-c,--config", config_file, "Configuration file (key = value, [sections])");
        app->add_option("--set", settings, "Override a setting, key=value (repeatable)");
        auto flag = [&](const std::string& names, const std::string& key, const std::string& help) {
            app->add_option_function<std::string>(names, [this, key](const std::string& v) { flags[key] = v; }, help);
        };
        flag("--shape,--geometry,--scenario", "geometry", "Builtin shape, 'cube' or a mesh file");
        flag("--height", "height", "Height of the distorted tetrahedron");
        flag("--h-lower", "h_lower", "Height of the lower box of the cube benchmark");
        flag("--levels", "levels", "Level range, e.g. 2:6");
        flag("--level", "level", "Finest level");
        flag("--coefficient", "coefficient", "constant, kappa0..kappa3 or jump");
        flag("--kappa", "kappa", "Constant coefficient value");
        flag("--kappa-upper", "kappa_upper", "Upper coefficient of the jump");
        flag("--kappa-lower", "kappa_lower", "Lower coefficient of the jump");
        flag("--smoother", "smoother", "gs, sgs, ilu or surrogate_ilu");
        flag("--variant", "variant", "Surrogate variant v1 or v2");
        flag("--coarse-level", "coarse_level", "Sampling level of the surrogate fit");
        flag("--perm", "permutation", "Vertex permutation, e.g. 2341 (disables reordering)");
        flag("--seed", "seed", "Seed of the random start vector");
        flag("--tol", "tolerance", "Absolute residual tolerance");
        flag("--max-iterations", "max_iterations", "Iteration limit");
        flag("--preconditioner", "preconditioner", "smoother, vcycle or none");
        flag("--rhs", "rhs", "one, random or load");
        flag("--inner", "inner", "Schur inner solver: exact or multigrid");
        flag("-o,--output", "output", "CSV output file (default: stdout)");
        app->add_option("--deg", degrees, "Surrogate degrees (one or three values)")->expected(1, 3);
        app->add_flag("--no-reorder", no_reorder, "Keep the given vertex order");
        app->add_flag("--timing", timing, "Add a wall-time column");
        app->add_option("--history", history, "Write the per-iteration history to this CSV file");
        app->add_option("--plot", plot, "Write the plot script to this file");
    }

    ScenarioConfig build(ScenarioConfig config) const {
        if (!config_file.empty()) load_config_file(config, config_file);
        for (const auto& [key, value] : flags) apply_setting(config, key, value);
        if (!degrees.empty()) {
            std::ostringstream s;
            for (int d : degrees) s << d << ' ';
            apply_setting(config, "degrees", s.str());
        }
        if (no_reorder) config.reorder = false;
        if (timing) config.timing = true;
        for (const auto& kv : settings) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        validate(config);
        return config;
    }
};

std::string plot_path_for(const std::string& csv) {
    const auto dot = csv.rfind('.');
    const auto slash = csv.rfind('/');
    const std::string stem = dot != std::string::npos && (slash == std::string::npos || dot > slash) ? csv.substr(0, dot) : csv;
    return stem + ".plot.py";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

void emit(const Table& table, const std::string& output, const std::string& plot, const std::string& kind) {
    if (output.empty()) {
        table.write_csv(std::cout);
    } else {
        std::ofstream out(output);
        if (!out) throw ConfigError("cannot write '" + output + "'");
        table.write_csv(out);
    }
    const std::string script = !plot.empty() ? plot : output.empty() ? std::string() : plot_path_for(output);
    if (!script.empty()) write_text(script, plot_script(kind, output.empty() ? "data.csv" : output, table));
}

ScenarioConfig defaults_for(const std::string& command) {
    ScenarioConfig c;
    if (command == "pcg") {
        c.mode = SolverMode::pcg;
        c.tolerance = 1e-3;
    } else if (command == "schur") {
        c.mode = SolverMode::schur;
        c.geometry = "cube";
        c.max_level = 3;
        c.tolerance = 1e-10;
        c.smoother = CellSmoother::sgs;
    } else if (command == "hybrid") {
        c.mode = SolverMode::hybrid_rate;
        c.geometry = "cube";
        c.max_level = 5;
    }
    return c;
}

bool converged(const Table& summary) {
    const auto& h = summary.header;
    const auto it = std::find(h.begin(), h.end(), "converged");
    if (it == h.end()) return true;
    const auto col = static_cast<std::size_t>(it - h.begin());
    for (const auto& row : summary.rows)
        if (row[col] != "1") return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multigrid with ILU smoothers on hybrid tetrahedral grids"};
    app.require_subcommand(1);
    std::map<std::string, CommonOptions> options;

    auto add_command = [&](const std::string& cmd, const std::string& help) {
        CLI::App* sub = app.add_subcommand(cmd, help);
        options[cmd].add(sub);
        return sub;
    };
    add_command("rate", "Asymptotic multigrid convergence factor");
    add_command("pcg", "Preconditioned CG iteration count");
    add_command("schur", "Interface Schur complement solve");
    add_command("hybrid", "Hybrid-smoother convergence factor on a multi-cell mesh");
    add_command("reorder", "Smoothing factor of all 24 orientations");
    CLI::App* dump = add_command("dump-stencils", "ILU factor entries along a line or slice");
    std::string target = "c", line, slice;
    dump->add_option("--direction", target, "Lower direction (w, s, se, bnw, bn, bc, be) or c");
    dump->add_option("--line", line, "Physical line x0,y0,z0:x1,y1,z1");
    dump->add_option("--slice", slice, "Logical slice, e.g. z=3");
    CLI::App* sweep = add_command("sweep", "Cartesian parameter sweep");
    std::string sweep_mode = "mg_rate";
    std::vector<std::string> params;
    sweep->add_option("--param", params, "key=v1,v2,... (repeatable)")->required();
    sweep->add_option("--mode", sweep_mode, "mg_rate, pcg, schur or hybrid_rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            const std::string cmd = sub->get_name();
            const CommonOptions& opt = options[cmd];
            ScenarioConfig base = defaults_for(cmd);
            if (cmd == "sweep") apply_setting(base, "mode", sweep_mode);
            const ScenarioConfig config = opt.build(base);

            if (cmd == "reorder") {
                emit(reorder_table(config), config.output, opt.plot, "reorder");
            } else if (cmd == "dump-stencils") {
                std::optional<LineSpec> l;
                std::optional<SliceSpec> s;
                if (!line.empty()) l = parse_line(line);
                if (!slice.empty()) s = parse_slice(slice);
                emit(dump_stencil_field(config, target, l, s), config.output, opt.plot, "dump");
            } else if (cmd == "sweep") {
                std::vector<std::pair<std::string, std::vector<std::string>>> grid;
                for (const auto& p : params) {
                    const auto eq = p.find('=');
                    if (eq == std::string::npos) throw ConfigError("--param expects key=v1,v2,...");
                    std::vector<std::string> values;
                    std::istringstream in(p.substr(eq + 1));
                    for (std::string v; std::getline(in, v, ',');) values.push_back(v);
                    grid.emplace_back(p.substr(0, eq), values);
                }
                const Table t = run_sweep(config, grid);
                emit(t, config.output, opt.plot, "sweep");
                if (!converged(t)) {
                    std::cerr << "error: a solve did not reach the tolerance\n";
                    return kSolverError;
                }
            } else {
                const ScenarioResult r = run_scenario(config);
                emit(r.summary, config.output, opt.plot, cmd);
                if (!opt.history.empty()) {
                    std::ofstream out(opt.history);
                    if (!out) throw ConfigError("cannot write '" + opt.history + "'");
                    r.history.write_csv(out);
                    write_text(plot_path_for(opt.history), plot_script("history", opt.history, r.history));
                }
                if (!converged(r.summary)) {
                    std::cerr << "error: the solver did not reach the tolerance\n";
                    return kSolverError;
                }
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    }
    return 0;
}
