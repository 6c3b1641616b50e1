#include "mfilu/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SparseCholesky>

namespace mfilu {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    const long d = parse_long(key, v);
    if (d < std::numeric_limits<int>::min() || d > std::numeric_limits<int>::max())
        throw ConfigError(key + ": out of range");
    return static_cast<int>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::pair<int, int> parse_level_range(const std::string& v) {
    const auto sep = v.find_first_of(":-");
    if (sep == std::string::npos) return {2, parse_int("levels", v)};
    return {parse_int("levels", v.substr(0, sep)), parse_int("levels", v.substr(sep + 1))};
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"geometry", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.geometry = v; }},
        {"height", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.height = parse_double(k, v); }},
        {"h_lower", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.h_lower = parse_double(k, v); }},
        {"min_level", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.min_level = parse_int(k, v); }},
        {"max_level", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.max_level = parse_int(k, v); }},
        {"level", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.max_level = parse_int(k, v); }},
        {"levels",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
             std::tie(c.min_level, c.max_level) = parse_level_range(v);
         }},
        {"coefficient", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.coefficient = v; }},
        {"kappa", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.kappa = parse_double(k, v); }},
        {"kappa_lower",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.kappa_lower = parse_double(k, v); }},
        {"kappa_upper",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.kappa_upper = parse_double(k, v); }},
        {"blending", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.blending = parse_bool(k, v); }},
        {"smoother",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.smoother = cell_smoother_from_name(v);
             } catch (const Error& e) {
                 throw ConfigError(k + ": " + e.what());
             }
         }},
        {"variant",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.variant = variant_from_name(v);
             } catch (const Error& e) {
                 throw ConfigError(k + ": " + e.what());
             }
         }},
        {"degrees", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.degrees = parse_degrees(v); }},
        {"degree",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             const int d = parse_int(k, v);
             c.degrees = {d, d, d};
         }},
        {"coarse_level",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.coarse_level = parse_int(k, v); }},
        {"surrogate_stencils",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.surrogate_stencils = parse_bool(k, v); }},
        {"stencil_degrees",
         [](ScenarioConfig& c, const std::string&, const std::string& v) { c.stencil_degrees = parse_degrees(v); }},
        {"reorder", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.reorder = parse_bool(k, v); }},
        {"permutation",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             if (v.empty() || v == "none") {
                 c.permutation.reset();
                 return;
             }
             try {
                 c.permutation = Permutation::parse(v);
             } catch (const Error& e) {
                 throw ConfigError(k + ": " + e.what());
             }
         }},
        {"mode",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             for (SolverMode m : {SolverMode::mg_rate, SolverMode::pcg, SolverMode::schur, SolverMode::hybrid_rate}) {
                 if (name(m) == v) {
                     c.mode = m;
                     return;
                 }
             }
             throw ConfigError(k + ": unknown solver mode '" + v + "'");
         }},
        {"seed",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             const long s = parse_long(k, v);
             if (s < 0) throw ConfigError(k + ": must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"power_steps",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.power_steps = parse_int(k, v); }},
        {"pre_smooth", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.pre_smooth = parse_int(k, v); }},
        {"post_smooth",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.post_smooth = parse_int(k, v); }},
        {"tolerance", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.tolerance = parse_double(k, v); }},
        {"max_iterations",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.max_iterations = parse_int(k, v); }},
        {"preconditioner", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.preconditioner = v; }},
        {"rhs", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.rhs = v; }},
        {"inner",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             if (v == "exact")
                 c.inner = InnerSolverKind::exact;
             else if (v == "multigrid")
                 c.inner = InnerSolverKind::multigrid;
             else
                 throw ConfigError(k + ": expected exact or multigrid");
         }},
        {"output", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.output = v; }},
        {"timing", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.timing = parse_bool(k, v); }},
    };
    return table;
}

const std::set<std::string> kSections = {"scenario", "geometry", "coefficient", "smoother", "solver", "output"};

bool single_cell_geometry(const std::string& g) { return g != "cube" && g.find('.') == std::string::npos && g.find('/') == std::string::npos; }

std::string degrees_or_dash(const ScenarioConfig& c) {
    return c.smoother == CellSmoother::surrogate_ilu ? format_degrees(c.degrees) : "-";
}
std::string variant_or_dash(const ScenarioConfig& c) {
    return c.smoother == CellSmoother::surrogate_ilu ? std::string(name(c.variant)) : "-";
}

SmootherConfig smoother_config(const ScenarioConfig& c) {
    SmootherConfig s;
    s.cell = c.smoother;
    s.surrogate.degrees = c.degrees;
    s.surrogate.variant = c.variant;
    s.surrogate.coarse_level = c.coarse_level;
    s.surrogate_stencils = c.surrogate_stencils;
    s.stencil_degrees = c.stencil_degrees;
    return s;
}

MultigridOptions multigrid_options(const ScenarioConfig& c) {
    MultigridOptions o;
    o.min_level = c.min_level;
    o.max_level = c.max_level;
    o.pre_smooth = c.pre_smooth;
    o.post_smooth = c.post_smooth;
    o.smoother = smoother_config(c);
    return o;
}

std::string permutation_label(const std::vector<Permutation>& applied) {
    if (applied.empty()) return "-";
    if (std::all_of(applied.begin(), applied.end(), [&](const Permutation& p) { return p == applied.front(); }))
        return applied.front().str();
    return "per-cell";
}

Vector make_rhs(const ScenarioConfig& c, const Problem& problem, const LevelDofs& dofs) {
    if (c.rhs == "one") {
        Vector b = Vector::Ones(dofs.size());
        for (int i = 0; i < b.size(); ++i)
            if (dofs.is_dirichlet(i)) b[i] = 0.0;
        return b;
    }
    if (c.rhs == "random") return random_free_vector(dofs, c.seed);
    if (c.rhs == "load") return assemble_load(problem, dofs, [](const Vec3&) { return 1.0; });
    throw ConfigError("rhs: expected one, random or load");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> common_header() {
    return {"geometry", "permutation", "coefficient", "smoother", "variant", "degrees", "min_level", "max_level"};
}

std::vector<std::string> common_row(const ScenarioConfig& c, const std::vector<Permutation>& applied) {
    return {c.geometry,
            permutation_label(applied),
            c.coefficient,
            std::string(name(c.smoother)),
            variant_or_dash(c),
            degrees_or_dash(c),
            std::to_string(c.min_level),
            std::to_string(c.max_level)};
}

Table history_table(const std::vector<double>& values, const std::string& column) {
    Table t;
    t.header = {"iteration", column};
    for (std::size_t i = 0; i < values.size(); ++i) t.rows.push_back({std::to_string(i), format_number(values[i])});
    return t;
}

ScenarioResult run_rate(const ScenarioConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Permutation> applied;
    Problem problem = build_problem(c, &applied);
    Hierarchy h(std::move(problem), multigrid_options(c));
    const RateReport r = convergence_factor(h, c.power_steps, c.seed);
    ScenarioResult out;
    out.summary.header = common_header();
    for (const char* col : {"seed", "rho", "iterations_1e-6"}) out.summary.header.push_back(col);
    auto row = common_row(c, applied);
    row.push_back(std::to_string(c.seed));
    row.push_back(format_number(r.rho));
    row.push_back(r.rho > 0 && r.rho < 1 ? std::to_string(static_cast<long>(std::ceil(-6.0 / std::log10(r.rho)))) : "inf");
    if (c.timing) {
        out.summary.header.push_back("time_s");
        row.push_back(format_number(seconds_since(t0)));
    }
    out.summary.rows.push_back(std::move(row));
    out.history = history_table(r.ratios, "ratio");
    return out;
}

ScenarioResult run_pcg(const ScenarioConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Permutation> applied;
    Problem problem = build_problem(c, &applied);
    PcgResult result;
    if (c.preconditioner == "vcycle") {
        Hierarchy h(std::move(problem), multigrid_options(c));
        const Vector b = make_rhs(c, h.problem(), h.finest().dofs);
        result = pcg_solve(
            matrix_operator(h.finest().matrix), b,
            [&](const Vector& r, Vector& z) {
                z.setZero(r.size());
                h.v_cycle(z, r);
            },
            c.tolerance, c.max_iterations);
    } else {
        const LevelSystem sys = assemble_level(problem, c.max_level);
        const Vector b = make_rhs(c, problem, sys.dofs);
        if (c.preconditioner == "smoother") {
            HybridSmoother smoother(problem.mesh, sys, smoother_config(c));
            result = pcg_solve(
                matrix_operator(sys.matrix), b, [&](const Vector& r, Vector& z) { smoother.precondition(r, z); },
                c.tolerance, c.max_iterations);
        } else if (c.preconditioner == "none") {
            result = pcg_solve(matrix_operator(sys.matrix), b, identity_operator(), c.tolerance, c.max_iterations);
        } else {
            throw ConfigError("preconditioner: expected smoother, vcycle or none");
        }
    }
    ScenarioResult out;
    out.summary.header = common_header();
    for (const char* col : {"preconditioner", "rhs", "tolerance", "iterations", "residual", "converged"})
        out.summary.header.push_back(col);
    auto row = common_row(c, applied);
    row.insert(row.end(), {c.preconditioner, c.rhs, format_number(c.tolerance), std::to_string(result.iterations),
                           format_number(result.residual), result.converged ? "1" : "0"});
    if (c.timing) {
        out.summary.header.push_back("time_s");
        row.push_back(format_number(seconds_since(t0)));
    }
    out.summary.rows.push_back(std::move(row));
    out.history = history_table(result.history, "residual");
    return out;
}

ScenarioResult run_schur(const ScenarioConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Permutation> applied;
    const Problem problem = build_problem(c, &applied);
    const LevelSystem sys = assemble_level(problem, c.max_level);
    InnerSolverOptions inner;
    inner.kind = c.inner;
    inner.smoother = smoother_config(c);
    const SchurComplement s(problem, sys, inner);
    const Vector b = make_rhs(c, problem, sys.dofs);
    const SchurSolveResult r = schur_solve(s, b, c.tolerance, c.max_iterations);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct(Eigen::SparseMatrix<double>(sys.matrix));
    if (direct.info() != Eigen::Success) throw Error("direct reference solve failed");
    const Vector u = direct.solve(b);
    const double error = (r.u - u).norm() / std::max(u.norm(), 1e-300);

    ScenarioResult out;
    out.summary.header = common_header();
    for (const char* col : {"inner", "interface_size", "iterations", "residual", "converged", "relative_error"})
        out.summary.header.push_back(col);
    auto row = common_row(c, applied);
    row.insert(row.end(), {c.inner == InnerSolverKind::exact ? "exact" : "multigrid", std::to_string(s.size()),
                           std::to_string(r.interface.iterations), format_number(r.interface.residual),
                           r.interface.converged ? "1" : "0", format_number(error)});
    if (c.timing) {
        out.summary.header.push_back("time_s");
        row.push_back(format_number(seconds_since(t0)));
    }
    out.summary.rows.push_back(std::move(row));
    out.history = history_table(r.interface.history, "residual");
    return out;
}

std::vector<std::string> csv_fields(const std::vector<std::string>& fields) {
    std::vector<std::string> out;
    for (const auto& f : fields) {
        if (f.find_first_of(",\"\n") == std::string::npos) {
            out.push_back(f);
            continue;
        }
        std::string q = "\"";
        for (char ch : f) {
            if (ch == '"') q += '"';
            q += ch;
        }
        out.push_back(q + "\"");
    }
    return out;
}

}  // namespace

std::string_view name(SolverMode m) {
    switch (m) {
        case SolverMode::mg_rate: return "mg_rate";
        case SolverMode::pcg: return "pcg";
        case SolverMode::schur: return "schur";
        case SolverMode::hybrid_rate: return "hybrid_rate";
    }
    return "?";
}

void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value) {
    const auto it = setters().find(trim(key));
    if (it == setters().end()) throw ConfigError("unknown setting '" + key + "'");
    it->second(config, it->first, trim(value));
}

std::vector<std::string> setting_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

void load_config(ScenarioConfig& config, std::istream& in, const std::string& source) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(number) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            const std::string section = trim(line.substr(1, line.size() - 2));
            if (!kSections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        try {
            apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void load_config_file(ScenarioConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    load_config(config, in, path);
}

void validate(const ScenarioConfig& c) {
    if (c.min_level < 2 || c.max_level > 8 || c.min_level > c.max_level)
        throw ConfigError("level range must satisfy 2 <= min_level <= max_level <= 8");
    for (int d : c.degrees)
        if (d < 0) throw ConfigError("degrees must be non-negative");
    for (int d : c.stencil_degrees)
        if (d < 0) throw ConfigError("stencil_degrees must be non-negative");
    if (c.coarse_level >= 0 && (c.coarse_level < 2 || c.coarse_level > c.max_level))
        throw ConfigError("coarse_level must lie in [2, max_level]");
    if (c.power_steps < 1) throw ConfigError("power_steps must be positive");
    if (c.pre_smooth < 0 || c.post_smooth < 0) throw ConfigError("smoothing steps must be non-negative");
    if (!(c.tolerance > 0)) throw ConfigError("tolerance must be positive");
    if (c.max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (!(c.height > 0)) throw ConfigError("height must be positive");
    if (!(c.h_lower > 0 && c.h_lower < 1)) throw ConfigError("h_lower must lie in (0, 1)");
    if (!(c.kappa > 0 && c.kappa_lower > 0 && c.kappa_upper > 0)) throw ConfigError("coefficients must be positive");
    static const std::set<std::string> coefficients = {"constant", "kappa0", "kappa1", "kappa2", "kappa3", "jump"};
    if (!coefficients.count(c.coefficient)) throw ConfigError("unknown coefficient '" + c.coefficient + "'");
    if (c.preconditioner != "smoother" && c.preconditioner != "vcycle" && c.preconditioner != "none")
        throw ConfigError("preconditioner must be smoother, vcycle or none");
    if (c.rhs != "one" && c.rhs != "random" && c.rhs != "load") throw ConfigError("rhs must be one, random or load");
    if (single_cell_geometry(c.geometry)) {
        const auto names = meshes::shape_names();
        if (std::find(names.begin(), names.end(), c.geometry) == names.end())
            throw ConfigError("unknown geometry '" + c.geometry + "'");
    }
    if (c.mode == SolverMode::hybrid_rate && single_cell_geometry(c.geometry))
        throw ConfigError("hybrid_rate needs a multi-cell geometry (cube or a mesh file)");
    if (c.mode == SolverMode::schur && c.max_level > 6) throw ConfigError("schur mode supports levels up to 6");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

Degrees parse_degrees(const std::string& text) {
    std::string t = text;
    std::replace_if(t.begin(), t.end(), [](char ch) { return ch == ',' || ch == 'x' || ch == ':'; }, ' ');
    std::istringstream in(t);
    std::vector<int> v;
    std::string word;
    while (in >> word) v.push_back(parse_int("degrees", word));
    if (v.size() == 1) return {v[0], v[0], v[0]};
    if (v.size() != 3) throw ConfigError("degrees: expected one or three integers, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

std::string format_degrees(const Degrees& d) {
    return std::to_string(d[0]) + " " + std::to_string(d[1]) + " " + std::to_string(d[2]);
}

void Table::write_csv(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& fields) {
        const auto q = csv_fields(fields);
        for (std::size_t i = 0; i < q.size(); ++i) out << (i ? "," : "") << q[i];
        out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
}

void Table::append(const Table& other) {
    if (header.empty()) header = other.header;
    if (other.header != header) throw Error("cannot append tables with different columns");
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

Problem build_problem(const ScenarioConfig& c, std::vector<Permutation>* applied) {
    validate(c);
    Problem problem;
    const bool single = single_cell_geometry(c.geometry);
    if (single) {
        problem.mesh = meshes::single_tet(meshes::shape(c.geometry, c.height));
    } else if (c.geometry == "cube") {
        problem.mesh = meshes::split_cube(c.h_lower);
    } else {
        try {
            problem.mesh = meshes::read_mesh_file(c.geometry);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }

    if (c.coefficient == "constant") {
        problem.coefficient = CoefficientField::constant(c.kappa);
    } else if (c.coefficient == "jump") {
        const double split = c.geometry == "cube" ? c.h_lower : 0.5;
        const double lo = c.kappa_lower, hi = c.kappa_upper;
        problem.coefficient =
            CoefficientField::scalar([split, lo, hi](const Vec3& x) { return x.z() < split ? lo : hi; }, "jump");
    } else {
        problem.coefficient = kappa_poly_field(c.coefficient.back() - '0');
    }

    std::vector<Permutation> perms(problem.mesh.num_cells());
    for (std::size_t k = 0; k < perms.size(); ++k) {
        const int cell = static_cast<int>(k);
        if (c.permutation) {
            perms[k] = *c.permutation;
        } else if (c.reorder) {
            perms[k] = best_permutation(problem.mesh.cell_tet(cell), problem.coefficient).best_permutation();
        }
        if (!(perms[k] == Permutation::identity())) problem.mesh.reorient_cell(cell, perms[k]);
    }

    const bool blend = c.blending.value_or(c.geometry == "shell");
    if (blend) {
        for (std::size_t k = 0; k < problem.mesh.num_cells(); ++k)
            problem.cell_maps.push_back(ShellBlending(problem.mesh.cell_tet(static_cast<int>(k))));
    }
    if (applied) *applied = perms;
    return problem;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    validate(config);
    switch (config.mode) {
        case SolverMode::mg_rate:
        case SolverMode::hybrid_rate: return run_rate(config);
        case SolverMode::pcg: return run_pcg(config);
        case SolverMode::schur: return run_schur(config);
    }
    throw ConfigError("unknown solver mode");
}

Table reorder_table(const ScenarioConfig& config) {
    validate(config);
    if (!single_cell_geometry(config.geometry)) throw ConfigError("reorder needs a single-cell geometry");
    ScenarioConfig c = config;
    c.reorder = false;
    c.permutation.reset();
    const Problem problem = build_problem(c);
    const LfaReport report = best_permutation(problem.mesh.cell_tet(0), problem.coefficient);
    Table t;
    t.header = {"geometry", "permutation", "mu", "selected"};
    for (std::size_t i = 0; i < report.permutations.size(); ++i) {
        t.rows.push_back({config.geometry, report.permutations[i].str(), format_number(report.mu[i]),
                          i == report.best ? "1" : "0"});
    }
    return t;
}

LineSpec parse_line(const std::string& text) {
    const auto sep = text.find(':');
    if (sep == std::string::npos) throw ConfigError("line: expected x0,y0,z0:x1,y1,z1");
    auto point = [&](const std::string& s) {
        std::string t = s;
        std::replace(t.begin(), t.end(), ',', ' ');
        std::istringstream in(t);
        Vec3 p;
        if (!(in >> p.x() >> p.y() >> p.z())) throw ConfigError("line: malformed point '" + s + "'");
        std::string rest;
        if (in >> rest) throw ConfigError("line: malformed point '" + s + "'");
        return p;
    };
    return {point(text.substr(0, sep)), point(text.substr(sep + 1))};
}

SliceSpec parse_slice(const std::string& text) {
    const auto eq = text.find('=');
    if (eq != 1 || (text[0] != 'x' && text[0] != 'y' && text[0] != 'z'))
        throw ConfigError("slice: expected x=<i>, y=<i> or z=<i>");
    return {text[0], parse_int("slice", text.substr(2))};
}

Table dump_stencil_field(const ScenarioConfig& config, const std::string& target, const std::optional<LineSpec>& line,
                         const std::optional<SliceSpec>& slice) {
    validate(config);
    if (!single_cell_geometry(config.geometry)) throw ConfigError("dump-stencils needs a single-cell geometry");
    std::size_t slot = kInvDiagonal;
    if (target != "c") {
        Direction d;
        try {
            d = direction_from_name(target);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        if (!is_lower(d)) throw ConfigError("direction '" + target + "' is not a lower direction of the factor");
        slot = index(d);
    }
    const Problem problem = build_problem(config);
    const int level = config.max_level;
    const MacroTet tet = problem.mesh.cell_tet(0);
    const StencilField a = StencilField::from_cell_stencils(
        level, assemble_cell_stencils(tet, level, problem.coefficient, problem.map(0)));
    const ILUFactors f = factorize_tet(a);
    const int n = cells_per_edge(level);

    Table t;
    t.header = {"level", "x", "y", "z", "px", "py", "pz", "t", "value"};
    auto emit = [&](LogicalCoord p, double param) {
        const LowerStencil& s = f.at(p);
        const double v = slot == kInvDiagonal ? s.d : s.l[slot];
        const Vec3 x = tet.micro_vertex_position(p, level);
        t.rows.push_back({std::to_string(level), std::to_string(p.x), std::to_string(p.y), std::to_string(p.z),
                          format_number(x.x()), format_number(x.y()), format_number(x.z()), format_number(param),
                          format_number(v)});
    };

    if (line) {
        Eigen::Matrix3d m;
        m << tet.edge(1), tet.edge(2), tet.edge(3);
        const Eigen::Matrix3d inv = m.inverse();
        const Vec3 qa = n * (inv * (line->from - tet.base()));
        const Vec3 qb = n * (inv * (line->to - tet.base()));
        const int steps = std::max(1, static_cast<int>(std::ceil((qb - qa).cwiseAbs().maxCoeff())));
        std::optional<LogicalCoord> last;
        for (int k = 0; k <= steps; ++k) {
            const double param = static_cast<double>(k) / steps;
            const Vec3 q = qa + param * (qb - qa);
            const LogicalCoord p{static_cast<int>(std::lround(q.x())), static_cast<int>(std::lround(q.y())),
                                 static_cast<int>(std::lround(q.z()))};
            if (!is_interior(p, level) || (last && *last == p)) continue;
            last = p;
            emit(p, param);
        }
    } else {
        for_each_interior(level, [&](LogicalCoord p) {
            if (slice) {
                const int v = slice->axis == 'x' ? p.x : slice->axis == 'y' ? p.y : p.z;
                if (v != slice->index) return;
            }
            emit(p, 0.0);
        });
    }
    return t;
}

Table run_sweep(const ScenarioConfig& base, const std::vector<std::pair<std::string, std::vector<std::string>>>& parameters) {
    for (const auto& [key, values] : parameters)
        if (values.empty()) throw ConfigError("sweep: no values for '" + key + "'");
    Table out;
    std::vector<std::size_t> idx(parameters.size(), 0);
    while (true) {
        ScenarioConfig c = base;
        std::vector<std::string> prefix;
        for (std::size_t k = 0; k < parameters.size(); ++k) {
            apply_setting(c, parameters[k].first, parameters[k].second[idx[k]]);
            prefix.push_back(parameters[k].second[idx[k]]);
        }
        const ScenarioResult r = run_scenario(c);
        Table t;
        for (const auto& [key, _] : parameters) t.header.push_back("sweep_" + key);
        t.header.insert(t.header.end(), r.summary.header.begin(), r.summary.header.end());
        for (const auto& row : r.summary.rows) {
            auto full = prefix;
            full.insert(full.end(), row.begin(), row.end());
            t.rows.push_back(std::move(full));
        }
        out.append(t);

        std::size_t k = parameters.size();
        while (k > 0) {
            --k;
            if (++idx[k] < parameters[k].second.size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
        if (parameters.empty()) return out;
    }
}

std::string plot_script(const std::string& kind, const std::string& csv_path, const Table& table) {
    auto column = [&](std::initializer_list<const char*> names) -> std::string {
        for (const char* n : names)
            if (std::find(table.header.begin(), table.header.end(), n) != table.header.end()) return n;
        return table.header.empty() ? "" : table.header.back();
    };
    std::string x, y, group;
    bool logy = false;
    if (kind == "dump") {
        x = "z";
        y = "value";
        group = "level";
    } else if (kind == "history") {
        x = "iteration";
        y = column({"residual", "ratio"});
        logy = y == "residual";
    } else if (kind == "reorder") {
        x = "permutation";
        y = "mu";
    } else if (kind == "sweep" && !table.header.empty()) {
        x = table.header.front();
        y = column({"rho", "iterations", "relative_error"});
        if (table.header.size() > 1 && table.header[1].rfind("sweep_", 0) == 0) group = table.header[1];
    } else {
        x = column({"permutation", "geometry"});
        y = column({"rho", "iterations", "relative_error"});
    }
    std::ostringstream s;
    s << "import csv\n"
         "import sys\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n\n"
      << "CSV = " << std::quoted(csv_path, '\'', '\\') << "\n"
      << "X, Y, GROUP = '" << x << "', '" << y << "', '" << group << "'\n\n"
      << "with open(CSV, newline='') as fh:\n"
         "    rows = list(csv.DictReader(fh))\n\n"
         "def num(v):\n"
         "    try:\n"
         "        return float(v)\n"
         "    except ValueError:\n"
         "        return v\n\n"
         "groups = {}\n"
         "for r in rows:\n"
         "    groups.setdefault(r.get(GROUP, '') if GROUP else '', []).append(r)\n\n"
         "fig, ax = plt.subplots()\n"
         "for label, rs in groups.items():\n"
         "    xs = [num(r[X]) for r in rs]\n"
         "    ys = [num(r[Y]) for r in rs]\n"
         "    ax.plot(xs, ys, marker='o', label=f'{GROUP}={label}' if GROUP else None)\n"
      << (logy ? "ax.set_yscale('log')\n" : "")
      << "ax.set_xlabel(X)\n"
         "ax.set_ylabel(Y)\n"
         "if GROUP:\n"
         "    ax.legend()\n"
         "out = sys.argv[1] if len(sys.argv) > 1 else CSV.rsplit('.', 1)[0] + '.png'\n"
         "fig.savefig(out, dpi=150)\n";
    return s.str();
}

}  // namespace mfilu
