#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "mfilu/multigrid.hpp"

namespace mfilu {

enum class InnerSolverKind { exact, multigrid };

struct InnerSolverOptions {
    InnerSolverKind kind = InnerSolverKind::exact;
    double tolerance = 1e-8;  // relative residual of the multigrid inner solves
    int max_cycles = 50;
    SmootherConfig smoother{CellSmoother::surrogate_ilu, {}, false, {3, 3, 3}};
};

/// Steklov-Poincare operator of one hybrid-grid level,
/// S = A_GG - sum_t A_Gt A_tt^{-1} A_tG, acting on the free interface DoF
/// (LevelDofs::free_interface order).
class SchurComplement {
public:
    SchurComplement(const Problem& problem, const LevelSystem& sys, InnerSolverOptions options = {});
    ~SchurComplement();

    int size() const { return static_cast<int>(sys_.dofs.free_interface().size()); }
    const LevelSystem& system() const { return sys_; }

    Vector apply(const Vector& u_gamma) const;
    /// chi = R_G b - sum_t A_Gt A_tt^{-1} R_t b.
    Vector rhs(const Vector& b) const;
    /// Solves A_tt u_t = R_t b - A_tG u_G per cell and returns the full vector.
    Vector reconstruct(const Vector& u_gamma, const Vector& b) const;

    Vector gather(const Vector& global) const;
    Vector scatter(const Vector& u_gamma) const;

    /// A_tt^{-1} applied to the cell-interior part of `v`; zero on the interface.
    Vector solve_interiors(const Vector& v) const;

    Eigen::MatrixXd dense() const;

private:
    struct CellSolver;
    const LevelSystem& sys_;
    InnerSolverOptions options_;
    std::vector<std::unique_ptr<CellSolver>> cells_;
};

struct SchurSolveResult {
    Vector u;
    PcgResult interface;
};

/// Interface PCG (diagonal of A_GG as preconditioner) followed by interior reconstruction.
SchurSolveResult schur_solve(const SchurComplement& s, const Vector& b, double tol, int max_iterations = 1000);

/// One application of the symmetric hybrid smoother.
void hybrid_smooth(const HybridSmoother& smoother, Vector& u, const Vector& f);

}  // namespace mfilu
