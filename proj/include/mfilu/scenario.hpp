#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfilu/lfa.hpp"
#include "mfilu/multigrid.hpp"
#include "mfilu/schur.hpp"

namespace mfilu {

/// Invalid configuration (unknown key, malformed value, out-of-range setting).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class SolverMode { mg_rate, pcg, schur, hybrid_rate };
std::string_view name(SolverMode m);

struct ScenarioConfig {
    std::string geometry = "regular";  // builtin shape, "cube", or a mesh file
    double height = 0.1;               // distorted tetrahedron
    double h_lower = 0.5;              // cube benchmark
    int min_level = 2;
    int max_level = 6;

    std::string coefficient = "constant";  // constant, kappa0..kappa3, jump
    double kappa = 1.0;
    double kappa_lower = 1.0;
    double kappa_upper = 1.0;
    std::optional<bool> blending;  // unset: on for the shell geometry

    CellSmoother smoother = CellSmoother::ilu;
    Variant variant = Variant::v1;
    Degrees degrees{2, 2, 2};
    int coarse_level = -1;
    bool surrogate_stencils = false;
    Degrees stencil_degrees{3, 3, 3};

    bool reorder = true;
    std::optional<Permutation> permutation;  // overrides reorder

    SolverMode mode = SolverMode::mg_rate;
    std::uint64_t seed = 42;
    int power_steps = 20;
    int pre_smooth = 3;
    int post_smooth = 3;
    double tolerance = 1e-3;
    int max_iterations = 10000;
    std::string preconditioner = "smoother";  // pcg: smoother, vcycle, none
    std::string rhs = "one";                  // one, random
    InnerSolverKind inner = InnerSolverKind::exact;

    std::string output;  // empty: stdout
    bool timing = false;
};

/// Applies one key=value setting; throws ConfigError.
void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> setting_keys();

/// Flat key=value file with optional [section] headers. '#' starts a comment.
void load_config(ScenarioConfig& config, std::istream& in, const std::string& source = "<config>");
void load_config_file(ScenarioConfig& config, const std::string& path);

/// Throws ConfigError for inconsistent settings.
void validate(const ScenarioConfig& config);

/// Fixed-precision number formatting shared by all CSV output.
std::string format_number(double v);
Degrees parse_degrees(const std::string& text);
std::string format_degrees(const Degrees& d);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& out) const;
    void append(const Table& other);
};

/// Problem (mesh, coefficient, blending) described by the config, with the
/// orientation applied. `applied` receives the permutation used per cell.
Problem build_problem(const ScenarioConfig& config, std::vector<Permutation>* applied = nullptr);

/// Runs the configured solver mode. The summary table has one row; the
/// history table holds per-iteration data where the mode produces it.
struct ScenarioResult {
    Table summary;
    Table history;
};
ScenarioResult run_scenario(const ScenarioConfig& config);

/// mu for all 24 orientations of the (single-cell) geometry.
Table reorder_table(const ScenarioConfig& config);

struct LineSpec {
    Vec3 from = Vec3::Zero();
    Vec3 to = Vec3::Zero();
};
struct SliceSpec {
    char axis = 'z';
    int index = 1;
};

/// Matrix-based ILU factor entries of `target` (a lower direction or "c")
/// on the finest level, at every interior point, along a physical line or on
/// a logical slice.
Table dump_stencil_field(const ScenarioConfig& config, const std::string& target,
                         const std::optional<LineSpec>& line = {}, const std::optional<SliceSpec>& slice = {});
LineSpec parse_line(const std::string& text);
SliceSpec parse_slice(const std::string& text);

/// Cartesian product of `parameters` (key, values) applied on top of `base`.
Table run_sweep(const ScenarioConfig& base, const std::vector<std::pair<std::string, std::vector<std::string>>>& parameters);

/// Stand-alone matplotlib script plotting `csv_path`.
std::string plot_script(const std::string& kind, const std::string& csv_path, const Table& table);

}  // namespace mfilu
