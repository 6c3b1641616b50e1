#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfilu/scenario.hpp"

namespace py = pybind11;
using namespace mfilu;

namespace {

ScenarioConfig make_config(const py::dict& settings) {
    ScenarioConfig c;
    for (const auto& [k, v] : settings) {
        const auto key = py::str(k).cast<std::string>();
        std::string value;
        if (py::isinstance<py::bool_>(v))
            value = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            for (const auto& item : v) value += py::str(item).cast<std::string>() + " ";
        } else
            value = py::str(v).cast<std::string>();
        apply_setting(c, key, value);
    }
    validate(c);
    return c;
}

py::list rows(const Table& t) {
    py::list out;
    for (const auto& row : t.rows) {
        py::dict d;
        for (std::size_t i = 0; i < t.header.size(); ++i) d[py::str(t.header[i])] = row[i];
        out.append(d);
    }
    return out;
}

std::array<double, 15> stencil_array(const Stencil15& s) { return s; }

}  // namespace

PYBIND11_MODULE(_mfilu, m) {
    m.doc() = "Multigrid with ILU smoothers on hybrid tetrahedral grids";

    // Translators are tried newest first, so the derived type goes last.
    py::register_exception<Error>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("directions", [] {
        std::vector<std::string> out;
        for (Direction d : kAllDirections) out.emplace_back(name(d));
        return out;
    });
    m.def("shape_names", &meshes::shape_names);
    m.def("setting_keys", &setting_keys);

    m.def(
        "run",
        [](const py::dict& settings) {
            const ScenarioResult r = run_scenario(make_config(settings));
            return py::make_tuple(rows(r.summary), rows(r.history));
        },
        py::arg("settings"), "Runs one scenario; returns (summary rows, history rows).");
    m.def(
        "reorder", [](const py::dict& settings) { return rows(reorder_table(make_config(settings))); },
        py::arg("settings"));
    m.def(
        "sweep",
        [](const py::dict& settings, const std::vector<std::pair<std::string, std::vector<std::string>>>& grid) {
            return rows(run_sweep(make_config(settings), grid));
        },
        py::arg("settings"), py::arg("grid"));
    m.def(
        "dump_stencils",
        [](const py::dict& settings, const std::string& direction, const std::string& line, const std::string& slice) {
            std::optional<LineSpec> l;
            std::optional<SliceSpec> s;
            if (!line.empty()) l = parse_line(line);
            if (!slice.empty()) s = parse_slice(slice);
            return rows(dump_stencil_field(make_config(settings), direction, l, s));
        },
        py::arg("settings"), py::arg("direction") = "c", py::arg("line") = "", py::arg("slice") = "");

    m.def(
        "stencil",
        [](const std::string& shape, int level, const std::string& permutation) {
            MacroTet tet = meshes::shape(shape);
            if (!permutation.empty()) tet = tet.permuted(Permutation::parse(permutation));
            return stencil_array(assemble_stencil(tet, level, {1, 1, 1}, CoefficientField::constant(1.0)));
        },
        py::arg("shape"), py::arg("level") = 2, py::arg("permutation") = "",
        "Constant-coefficient stencil of a builtin shape, in direction order.");
    m.def(
        "asymptotic_stencils",
        [](const std::array<double, 15>& a) {
            const AsymptoticStencils s = asymptotic_stencils(a);
            return py::make_tuple(std::vector<double>(s.l.begin(), s.l.end()), s.d);
        },
        py::arg("stencil"), "Returns (L for the seven lower directions, D_c).");
    m.def(
        "smoothing_factor", [](const std::array<double, 15>& a, int samples) { return smoothing_factor(a, samples); },
        py::arg("stencil"), py::arg("samples") = 16);
    m.def(
        "best_permutation",
        [](const std::string& shape) {
            const LfaReport r = best_permutation(meshes::shape(shape));
            std::vector<std::string> perms;
            for (const auto& p : r.permutations) perms.push_back(p.str());
            return py::make_tuple(r.best_permutation().str(), perms, r.mu);
        },
        py::arg("shape"), "Returns (best, permutations, mu).");
}
