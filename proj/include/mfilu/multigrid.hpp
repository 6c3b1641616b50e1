#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mfilu/assembly.hpp"
#include "mfilu/ilu.hpp"
#include "mfilu/surrogate.hpp"

namespace mfilu {

/// Linear interpolation from `coarse` to `fine` (one uniform refinement).
/// Rows of Dirichlet fine DoF and columns of Dirichlet coarse DoF are empty.
SparseMatrix build_prolongation(const MacroMesh& mesh, const LevelDofs& coarse, const LevelDofs& fine);

Vector prolongate(const SparseMatrix& p, const Vector& coarse);
Vector restrict_to_coarse(const SparseMatrix& p, const Vector& fine);

enum class GsMode { forward, backward, symmetric };

/// Multiplicative Gauss-Seidel on the DoF of one macro-primitive, in DoF order.
void gs_smooth(const LevelSystem& sys, Vector& u, const Vector& f, PrimitiveRef primitive, GsMode mode);

// ---------------------------------------------------------------------------
// Smoothers.
// ---------------------------------------------------------------------------

class Smoother {
public:
    virtual ~Smoother() = default;
    virtual void pre(Vector& u, const Vector& f) const = 0;
    virtual void post(Vector& u, const Vector& f) const { pre(u, f); }
    /// u = C^{-1} r, the smoother used as a preconditioner.
    void precondition(const Vector& r, Vector& u) const {
        u.setZero(r.size());
        pre(u, r);
    }
};

enum class CellSmoother { gs, sgs, ilu, surrogate_ilu };
std::string_view name(CellSmoother s);
CellSmoother cell_smoother_from_name(std::string_view s);

struct SmootherConfig {
    CellSmoother cell = CellSmoother::sgs;
    SurrogateOptions surrogate;
    /// Replaces the assembled stencils of the residual by fitted polynomials.
    bool surrogate_stencils = false;
    Degrees stencil_degrees{3, 3, 3};
};

/// Vertex, edge, face, cell, face, edge, vertex sweep. Each stage recomputes
/// the residual once and updates all primitives of its class additively; the
/// return path uses transposed sweeps. Cells use the configured block
/// smoother. Stages without free DoF are skipped, so on a single
/// macro-tetrahedron with Dirichlet boundary it is the cell smoother.
class HybridSmoother final : public Smoother {
public:
    HybridSmoother(const MacroMesh& mesh, const LevelSystem& sys, SmootherConfig config);
    ~HybridSmoother() override;

    void pre(Vector& u, const Vector& f) const override;
    void post(Vector& u, const Vector& f) const override;

    const SmootherConfig& config() const { return config_; }
    const LevelSystem& system() const { return sys_; }
    const StencilSource& stencils(int cell) const;
    const ILUFactors* factors(int cell) const;
    const SurrogateILU* surrogate(int cell) const;

private:
    void interface_stage(PrimitiveType type, bool backward, Vector& u, const Vector& f) const;
    void cell_stage(bool backward, Vector& u, const Vector& f) const;

    const MacroMesh* mesh_;
    const LevelSystem& sys_;
    SmootherConfig config_;
    std::array<bool, 3> active_{};  // interface classes with free DoF
    std::vector<std::unique_ptr<SurrogateStencils>> fitted_;
    std::vector<ILUFactors> factors_;
    std::vector<SurrogateILU> surrogates_;
};

// ---------------------------------------------------------------------------
// Multigrid.
// ---------------------------------------------------------------------------

struct MultigridOptions {
    int min_level = 2;
    int max_level = 4;
    int pre_smooth = 3;
    int post_smooth = 3;
    double coarse_tolerance = 1e-12;  // relative residual of the coarse CG
    int coarse_max_iterations = 10000;
    SmootherConfig smoother;
};

using SmootherFactory = std::function<std::unique_ptr<Smoother>(const MacroMesh&, const LevelSystem&)>;

/// Rediscretized operators on levels min_level..max_level, transfers and smoothers.
class Hierarchy {
public:
    Hierarchy(Problem problem, MultigridOptions options, SmootherFactory factory = {});
    Hierarchy(const Hierarchy&) = delete;
    Hierarchy& operator=(const Hierarchy&) = delete;

    int min_level() const { return options_.min_level; }
    int max_level() const { return options_.max_level; }
    const Problem& problem() const { return problem_; }
    const MultigridOptions& options() const { return options_; }
    const LevelSystem& system(int level) const { return *systems_[slot(level)]; }
    const LevelSystem& finest() const { return system(max_level()); }
    const Smoother& smoother(int level) const { return *smoothers_[slot(level)]; }
    /// Interpolation into `level` from level - 1.
    const SparseMatrix& prolongation(int level) const { return prolongations_[slot(level)]; }

    void v_cycle(Vector& u, const Vector& f) const { v_cycle(max_level(), u, f); }
    void v_cycle(int level, Vector& u, const Vector& f) const;
    void coarse_solve(Vector& u, const Vector& f) const;

private:
    std::size_t slot(int level) const { return static_cast<std::size_t>(level - options_.min_level); }

    Problem problem_;
    MultigridOptions options_;
    std::vector<std::unique_ptr<LevelSystem>> systems_;
    std::vector<SparseMatrix> prolongations_;
    std::vector<std::unique_ptr<Smoother>> smoothers_;
};

struct RateReport {
    double rho = 0;
    std::vector<double> ratios;  // per power-iteration step
};

/// Power iteration on the V-cycle error propagator (f = 0) from a seeded
/// uniform random error on the free DoF; Euclidean normalization each step.
RateReport convergence_factor(const Hierarchy& h, int steps = 20, std::uint64_t seed = 42);

Vector random_free_vector(const LevelDofs& dofs, std::uint64_t seed);

using LinearOperator = std::function<void(const Vector&, Vector&)>;

struct PcgResult {
    Vector x;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
    std::vector<double> history;  // unpreconditioned residual norms, starting with the initial one
};

/// Preconditioned CG from x = 0; stops once ||b - A x|| < tol (absolute).
/// Throws Error on a non-positive curvature <p, A p>.
PcgResult pcg_solve(const LinearOperator& a, const Vector& b, const LinearOperator& preconditioner, double tol,
                    int max_iterations = 10000);

LinearOperator matrix_operator(const SparseMatrix& a);
LinearOperator identity_operator();

}  // namespace mfilu
