#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "mfilu/assembly.hpp"

using namespace mfilu;

TEST_CASE("reference element stiffness") {
    const std::array<Vec3, 4> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    const Eigen::Matrix4d k = element_stiffness(v, Eigen::Matrix3d::Identity());
    CHECK(k(0, 0) == doctest::Approx(0.5));
    CHECK(k(1, 1) == doctest::Approx(1.0 / 6));
    CHECK(k(0, 1) == doctest::Approx(-1.0 / 6));
    CHECK(k(1, 2) == doctest::Approx(0.0));
    CHECK((k - k.transpose()).norm() < 1e-15);
    CHECK(k.rowwise().sum().norm() < 1e-15);

    const Eigen::Matrix4d k2 = element_stiffness(v, 2.5 * Eigen::Matrix3d::Identity());
    CHECK((k2 - 2.5 * k).norm() < 1e-14);

    const std::array<Vec3, 4> flat = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    CHECK_THROWS_WITH_AS(element_stiffness(flat, Eigen::Matrix3d::Identity(), 17), doctest::Contains("17"), Error);
}

TEST_CASE("element energy of a linear function") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<Vec3, 4> v;
        for (auto& x : v) x = Vec3(u(gen), u(gen), u(gen));
        Eigen::Matrix3d b;
        b << u(gen), u(gen), u(gen), u(gen), u(gen), u(gen), u(gen), u(gen), u(gen);
        const Eigen::Matrix3d kappa = b * b.transpose() + Eigen::Matrix3d::Identity();
        const Vec3 a(u(gen), u(gen), u(gen));
        Eigen::Vector4d w;
        for (int i = 0; i < 4; ++i) w[i] = a.dot(v[static_cast<std::size_t>(i)]) + 0.3;
        Eigen::Matrix3d m;
        m << v[1] - v[0], v[2] - v[0], v[3] - v[0];
        const double vol = std::abs(m.determinant()) / 6;
        CHECK(w.dot(element_stiffness(v, kappa) * w) == doctest::Approx(vol * a.dot(kappa * a)).epsilon(1e-10));
    }
}

TEST_CASE("interior stencils") {
    const MacroTet tet({Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 0.9, 0.1), Vec3(0.1, 0.3, 0.8)});
    const int level = 3;
    const auto coeff = CoefficientField::constant(1.0);
    const auto cell = assemble_cell_stencils(tet, level, coeff);
    const Stencil15 s0 = assemble_stencil(tet, level, {1, 1, 1}, coeff);
    double sum = 0;
    for (double x : s0) sum += x;
    CHECK(std::abs(sum) < 1e-13);
    CHECK(at(s0, Direction::c) > 0);

    for_each_interior(level, [&](LogicalCoord p) {
        const Stencil15 s = assemble_stencil(tet, level, p, coeff);
        const Stencil15& c = cell[grid_index(p, level)];
        for (std::size_t d = 0; d < kNumDirections; ++d) {
            CHECK(s[d] == doctest::Approx(c[d]).epsilon(1e-13));
            // constant coefficient on an affine cell: the stencil is translation invariant
            CHECK(s[d] == doctest::Approx(s0[d]).epsilon(1e-12));
        }
    });

    // stencils of a variable coefficient remain symmetric
    const auto field = StencilField::from_cell_stencils(level, assemble_cell_stencils(tet, level, kappa_poly_field(2)));
    for_each_interior(level, [&](LogicalCoord p) {
        for (Direction d : kAllDirections) {
            const LogicalCoord q = p + offset(d);
            if (!is_interior(q, level)) continue;
            CHECK(at(field.ref(p), d) == doctest::Approx(at(field.ref(q), opposite(d))).epsilon(1e-12));
        }
    });
}

TEST_CASE("stiffness scales with 1/h on the refined lattice") {
    const MacroTet tet = MacroTet();
    const auto coeff = CoefficientField::constant(1.0);
    const double c3 = at(assemble_stencil(tet, 3, {1, 1, 1}, coeff), Direction::c);
    const double c4 = at(assemble_stencil(tet, 4, {1, 1, 1}, coeff), Direction::c);
    CHECK(c3 == doctest::Approx(2 * c4));
}

TEST_CASE("coefficients and blending") {
    CHECK(kappa_poly(0, Vec3(0.2, 0.3, 0.4)) == doctest::Approx(31));
    CHECK(kappa_poly(2, Vec3(0.5, 0.5, 0.0)) == doctest::Approx(6));
    CHECK(kappa_poly_field(1)(Vec3(0.1, 0.1, 0.1))(0, 0) == doctest::Approx(4));

    const double phi = (1 + std::sqrt(5.0)) / 2;
    const Vec3 a = Vec3(0, 1, phi).normalized(), b = Vec3(0, -1, phi).normalized(), c = Vec3(phi, 0, 1).normalized();
    const MacroTet tet({a, b, c, 0.9 * a});
    const ShellBlending blend(tet);
    for (int i = 0; i < 4; ++i) CHECK((blend(tet.vertex(i)) - tet.vertex(i)).norm() < 1e-14);
    const Vec3 mid = (a + b + c) / 3;
    CHECK(blend(mid).norm() == doctest::Approx(1.0));
    CHECK(blend(mid).normalized().dot(mid.normalized()) == doctest::Approx(1.0));
}

TEST_CASE("assembled level system") {
    Problem problem{meshes::split_cube(0.5), CoefficientField::constant(1.0), {}};
    const LevelSystem sys = assemble_level(problem, 3);
    const SparseMatrix& a = sys.matrix;
    CHECK(a.rows() == sys.dofs.size());
    const Eigen::MatrixXd dense(a);
    CHECK((dense - dense.transpose()).norm() < 1e-12 * dense.norm());
    for (int i = 0; i < sys.dofs.size(); ++i) {
        if (!sys.dofs.is_dirichlet(i)) continue;
        CHECK(dense(i, i) == 1.0);
        CHECK(dense.row(i).norm() == 1.0);
        CHECK(dense.col(i).norm() == 1.0);
    }
    // load of f = 1 on the free DoF plus the Dirichlet shares sums to the volume
    const Vector b = assemble_load(problem, sys.dofs, [](const Vec3&) { return 1.0; });
    CHECK(b.sum() < 1.0);
    CHECK(b.sum() > 0.7);
    problem.mesh.tag_boundary(BoundaryKind::neumann, [](const Vec3&) { return true; });
    const LevelDofs all_free(problem.mesh, 3);
    CHECK(assemble_load(problem, all_free, [](const Vec3&) { return 1.0; }).sum() == doctest::Approx(1.0));
}
