#include "mfilu/schur.hpp"

namespace mfilu {

struct SchurComplement::CellSolver {
    int cell = 0;
    int offset = 0;
    int count = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    std::unique_ptr<Hierarchy> mg;
    int mg_offset = 0;
    double tolerance = 1e-8;
    int max_cycles = 50;

    Vector solve(const Vector& rhs) const {
        if (!mg) return ldlt.solve(rhs);
        const auto& sys = mg->finest();
        Vector f = Vector::Zero(sys.dofs.size());
        f.segment(mg_offset, count) = rhs;
        Vector u = Vector::Zero(f.size());
        const double target = tolerance * f.norm();
        if (target == 0.0) return Vector::Zero(count);
        for (int k = 0; k < max_cycles; ++k) {
            mg->v_cycle(u, f);
            if ((f - sys.matrix * u).norm() <= target) return u.segment(mg_offset, count);
        }
        throw Error("inner multigrid solve did not converge on macro-tetrahedron " + std::to_string(cell));
    }
};

SchurComplement::SchurComplement(const Problem& problem, const LevelSystem& sys, InnerSolverOptions options)
    : sys_(sys), options_(std::move(options)) {
    const auto& dofs = sys.dofs;
    const auto& a = sys.matrix;
    for (std::size_t c = 0; c < problem.mesh.num_cells(); ++c) {
        auto cs = std::make_unique<CellSolver>();
        cs->cell = static_cast<int>(c);
        const auto [first, last] = dofs.primitive_range(PrimitiveType::cell, static_cast<int>(c));
        cs->offset = first;
        cs->count = last - first;
        cs->tolerance = options_.tolerance;
        cs->max_cycles = options_.max_cycles;
        if (cs->count > 0) {
            if (options_.kind == InnerSolverKind::exact) {
                std::vector<Eigen::Triplet<double>> t;
                for (int i = first; i < last; ++i)
                    for (SparseMatrix::InnerIterator it(a, i); it; ++it)
                        if (it.col() >= first && it.col() < last)
                            t.emplace_back(i - first, static_cast<int>(it.col()) - first, it.value());
                Eigen::SparseMatrix<double> block(cs->count, cs->count);
                block.setFromTriplets(t.begin(), t.end());
                cs->ldlt.compute(block);
                if (cs->ldlt.info() != Eigen::Success)
                    throw Error("interior factorization failed on macro-tetrahedron " + std::to_string(c));
            } else {
                const int ci = static_cast<int>(c);
                Problem local{meshes::single_tet(problem.mesh.cell_tet(ci)), problem.coefficient, {}};
                if (const GeometryMap* m = problem.map(ci)) local.cell_maps.push_back(*m);
                MultigridOptions mo;
                mo.min_level = 2;
                mo.max_level = sys.level();
                mo.smoother = options_.smoother;
                cs->mg = std::make_unique<Hierarchy>(std::move(local), mo);
                cs->mg_offset = cs->mg->finest().dofs.cell_interior_offset(0);
            }
        }
        cells_.push_back(std::move(cs));
    }
}

SchurComplement::~SchurComplement() = default;

Vector SchurComplement::gather(const Vector& global) const {
    const auto& idx = sys_.dofs.free_interface();
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = global[idx[k]];
    return out;
}

Vector SchurComplement::scatter(const Vector& u_gamma) const {
    const auto& idx = sys_.dofs.free_interface();
    if (u_gamma.size() != static_cast<Eigen::Index>(idx.size())) throw Error("interface vector has the wrong size");
    Vector out = Vector::Zero(sys_.dofs.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = u_gamma[static_cast<Eigen::Index>(k)];
    return out;
}

Vector SchurComplement::solve_interiors(const Vector& v) const {
    Vector out = Vector::Zero(v.size());
    for (const auto& cs : cells_) {
        if (cs->count == 0) continue;
        out.segment(cs->offset, cs->count) = cs->solve(v.segment(cs->offset, cs->count));
    }
    return out;
}

Vector SchurComplement::apply(const Vector& u_gamma) const {
    const Vector y = sys_.matrix * scatter(u_gamma);
    const Vector z = solve_interiors(y);
    const Vector w = sys_.matrix * z;
    return gather(y) - gather(w);
}

Vector SchurComplement::rhs(const Vector& b) const {
    const Vector z = solve_interiors(b);
    return gather(b) - gather(sys_.matrix * z);
}

Vector SchurComplement::reconstruct(const Vector& u_gamma, const Vector& b) const {
    const Vector x = scatter(u_gamma);
    const Vector y = b - sys_.matrix * x;
    return x + solve_interiors(y);
}

Eigen::MatrixXd SchurComplement::dense() const {
    const int n = size();
    Eigen::MatrixXd s(n, n);
    for (int j = 0; j < n; ++j) s.col(j) = apply(Vector::Unit(n, j));
    return s;
}

SchurSolveResult schur_solve(const SchurComplement& s, const Vector& b, double tol, int max_iterations) {
    const auto& idx = s.system().dofs.free_interface();
    Vector inv_diag(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        inv_diag[static_cast<Eigen::Index>(k)] = 1.0 / s.system().matrix.coeff(idx[k], idx[k]);
    SchurSolveResult out;
    out.interface = pcg_solve([&](const Vector& x, Vector& y) { y = s.apply(x); }, s.rhs(b),
                              [&](const Vector& x, Vector& y) { y = inv_diag.cwiseProduct(x); }, tol, max_iterations);
    out.u = s.reconstruct(out.interface.x, b);
    return out;
}

void hybrid_smooth(const HybridSmoother& smoother, Vector& u, const Vector& f) { smoother.pre(u, f); }

}  // namespace mfilu
