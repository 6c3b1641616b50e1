#include <Eigen/SparseCholesky>

#include "doctest.h"
#include "mfilu/schur.hpp"
#include "oracles.hpp"

using namespace mfilu;

namespace {

Problem cube_problem(double h_lower = 0.5) {
    Problem p{meshes::split_cube(h_lower), {}, {}};
    p.coefficient = CoefficientField::scalar([h_lower](const Vec3& x) { return x.z() < h_lower ? 1.0 : 10.0; });
    return p;
}

}  // namespace

TEST_CASE("Schur complement equals dense block elimination") {
    const Problem problem = cube_problem();
    const LevelSystem sys = assemble_level(problem, 3);
    const SchurComplement s(problem, sys);
    const auto& gamma = sys.dofs.free_interface();
    std::vector<int> inner;
    for (int i = 0; i < sys.dofs.size(); ++i)
        if (!sys.dofs.is_interface(i)) inner.push_back(i);
    const Eigen::MatrixXd a(sys.matrix);
    auto block = [&](const std::vector<int>& r, const std::vector<int>& c) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(r[i], c[j]);
        return m;
    };
    const Eigen::MatrixXd agi = block(gamma, inner);
    const Eigen::MatrixXd ref = block(gamma, gamma) - agi * block(inner, inner).ldlt().solve(agi.transpose());
    const Eigen::MatrixXd dense = s.dense();
    REQUIRE(dense.rows() == s.size());
    CHECK((dense - ref).norm() <= 1e-10 * ref.norm());
    CHECK((dense - dense.transpose()).norm() <= 1e-12 * dense.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff() > 0);

    const Vector x = Vector::Random(s.size());
    CHECK((s.apply(x) - ref * x).norm() <= 1e-10 * (ref * x).norm());
}

TEST_CASE("Schur solve matches the direct solve") {
    const Problem problem = cube_problem(0.25);
    const LevelSystem sys = assemble_level(problem, 3);
    const SchurComplement s(problem, sys);
    const Vector b = assemble_load(problem, sys.dofs, [](const Vec3& x) { return 1.0 + x.x(); });
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct{Eigen::SparseMatrix<double>(sys.matrix)};
    const Vector ref = direct.solve(b);
    const SchurSolveResult r = schur_solve(s, b, 1e-14);
    CHECK(r.interface.converged);
    CHECK((r.u - ref).norm() <= 1e-10 * ref.norm());
    CHECK((s.gather(s.scatter(s.gather(ref))) - s.gather(ref)).norm() == 0.0);
}

TEST_CASE("multigrid inner solves approximate the exact ones") {
    const Problem problem = cube_problem();
    const LevelSystem sys = assemble_level(problem, 3);
    InnerSolverOptions mg;
    mg.kind = InnerSolverKind::multigrid;
    mg.tolerance = 1e-10;
    mg.smoother.cell = CellSmoother::ilu;
    const SchurComplement exact(problem, sys), approx(problem, sys, mg);
    const Vector x = Vector::Random(exact.size());
    const Vector se = exact.apply(x), sa = approx.apply(x);
    CHECK((se - sa).norm() <= 1e-7 * se.norm());
}

TEST_CASE("hybrid smoother with surrogate cells tracks the matrix-based one") {
    auto rate = [](CellSmoother cell) {
        MultigridOptions opt;
        opt.max_level = 4;
        opt.smoother.cell = cell;
        opt.smoother.surrogate.degrees = {3, 3, 3};
        const Hierarchy h(cube_problem(), opt);
        return convergence_factor(h, 20, 42).rho;
    };
    const double ilu = rate(CellSmoother::ilu);
    const double sur = rate(CellSmoother::surrogate_ilu);
    const double sgs = rate(CellSmoother::sgs);
    CHECK(std::abs(ilu - sur) < 0.02);
    CHECK(ilu <= sgs);
    CHECK(ilu < 0.5);

    const Problem problem = cube_problem();
    const LevelSystem sys = assemble_level(problem, 3);
    SmootherConfig cfg;
    cfg.cell = CellSmoother::ilu;
    const HybridSmoother s(problem.mesh, sys, cfg);
    const Vector f = random_free_vector(sys.dofs, 1);
    Vector u1 = Vector::Zero(f.size()), u2 = u1;
    hybrid_smooth(s, u1, f);
    s.precondition(f, u2);
    CHECK((u1 - u2).norm() == 0.0);
}
