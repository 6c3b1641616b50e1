#include "doctest.h"
#include "mfilu/ilu.hpp"
#include "oracles.hpp"

using namespace mfilu;

namespace {

StencilField variable_field(int level, const MacroTet& tet = meshes::shape("cap")) {
    return StencilField::from_cell_stencils(level, assemble_cell_stencils(tet, level, kappa_poly_field(3)));
}

std::vector<int> identity_map(int level) {
    std::vector<int> m(grid_size(level));
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<int>(i);
    return m;
}

}  // namespace

TEST_CASE("stencil factors match dense ILU(0)") {
    for (int level : {2, 3, 4}) {
        const StencilField a = variable_field(level);
        const auto op = oracle::dense_interior(a);
        const Eigen::MatrixXd lu = oracle::ilu0(op.a, op.pattern);
        const ILUFactors f = factorize_tet(a);
        double err = 0, scale = 0;
        for (std::size_t i = 0; i < op.points.size(); ++i) {
            const LogicalCoord p = op.points[i];
            const auto ii = static_cast<Eigen::Index>(i);
            const LowerStencil& s = f.at(p);
            err = std::max(err, std::abs(s.d - lu(ii, ii)));
            scale = std::max(scale, std::abs(lu(ii, ii)));
            for (Direction d : kLowerDirections) {
                const int j = oracle::find_point(op.points, p + offset(d));
                const double ref = j < 0 ? 0.0 : lu(ii, j);
                err = std::max(err, std::abs(s.at(d) - ref));
            }
        }
        CHECK(err <= 1e-12 * std::max(scale, 1.0));
    }
}

TEST_CASE("factor product reproduces A on the pattern") {
    const int level = 4;
    const StencilField a = variable_field(level, meshes::shape("spade"));
    const auto op = oracle::dense_interior(a);
    const ILUFactors f = factorize_tet(a);
    const auto n = static_cast<Eigen::Index>(op.points.size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const LogicalCoord p = op.points[static_cast<std::size_t>(i)];
        d[i] = f.at(p).d;
        for (Direction dir : kLowerDirections) {
            const int j = oracle::find_point(op.points, p + offset(dir));
            if (j >= 0) l(i, j) = f.at(p).at(dir);
        }
    }
    const Eigen::MatrixXd m = l * d.asDiagonal() * l.transpose();
    double err = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (op.pattern(i, j)) err = std::max(err, std::abs(m(i, j) - op.a(i, j)));
    CHECK(err <= 1e-12 * op.a.cwiseAbs().maxCoeff());
}

TEST_CASE("streaming factorization hands out factors in DoF order") {
    const int level = 4;
    const StencilField a = variable_field(level);
    const ILUFactors stored = factorize_tet(a);
    std::vector<LogicalCoord> order;
    bool same = true;
    factorize_streaming(a, [&](LogicalCoord p, const LowerStencil& s) {
        order.push_back(p);
        same = same && s.d == stored.at(p).d && s.l == stored.at(p).l;
    });
    CHECK(same);
    CHECK(order == enumerate_grid(level, GridRegion::interior));
}

TEST_CASE("ILU smoother applies (L D L^T)^{-1} to the residual") {
    const int level = 3;
    const StencilField a = variable_field(level);
    const auto op = oracle::dense_interior(a);
    const ILUFactors f = factorize_tet(a);
    const auto n = static_cast<Eigen::Index>(op.points.size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const LogicalCoord p = op.points[static_cast<std::size_t>(i)];
        d[i] = f.at(p).d;
        for (Direction dir : kLowerDirections) {
            const int j = oracle::find_point(op.points, p + offset(dir));
            if (j >= 0) l(i, j) = f.at(p).at(dir);
        }
    }
    const Eigen::MatrixXd m = l * d.asDiagonal() * l.transpose();

    const auto map = identity_map(level);
    const Eigen::VectorXd ui = oracle::random_vector(n, 1), fi = oracle::random_vector(n, 2);
    Vector u = Vector::Zero(static_cast<Eigen::Index>(grid_size(level))), rhs = u;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto g = static_cast<Eigen::Index>(grid_index(op.points[static_cast<std::size_t>(i)], level));
        u[g] = ui[i];
        rhs[g] = fi[i];
    }
    ilu_smooth(u, rhs, f, a, map);
    const Eigen::VectorXd expect = ui + m.ldlt().solve(fi - op.a * ui);
    double err = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        err = std::max(err, std::abs(u[static_cast<Eigen::Index>(grid_index(op.points[static_cast<std::size_t>(i)], level))] - expect[i]));
    CHECK(err < 1e-10 * expect.cwiseAbs().maxCoeff());
}

TEST_CASE("Gauss-Seidel sweeps match the dense triangular solves") {
    const int level = 3;
    const StencilField a = variable_field(level);
    const auto op = oracle::dense_interior(a);
    const auto n = static_cast<Eigen::Index>(op.points.size());
    const auto map = identity_map(level);
    const Eigen::VectorXd ui = oracle::random_vector(n, 3), fi = oracle::random_vector(n, 4);
    auto embed = [&](const Eigen::VectorXd& v) {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(grid_size(level)));
        for (Eigen::Index i = 0; i < n; ++i)
            out[static_cast<Eigen::Index>(grid_index(op.points[static_cast<std::size_t>(i)], level))] = v[i];
        return out;
    };
    auto extract = [&](const Vector& v) {
        Eigen::VectorXd out(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out[i] = v[static_cast<Eigen::Index>(grid_index(op.points[static_cast<std::size_t>(i)], level))];
        return out;
    };
    const Eigen::MatrixXd lower = op.a.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd upper = op.a.triangularView<Eigen::Upper>();
    Vector u = embed(ui);
    gs_cell_smooth(u, embed(fi), a, map);
    const Eigen::VectorXd fwd = ui + lower.triangularView<Eigen::Lower>().solve(fi - op.a * ui);
    CHECK((extract(u) - fwd).norm() < 1e-12 * fwd.norm());

    u = embed(ui);
    sgs_cell_smooth(u, embed(fi), a, map);
    const Eigen::VectorXd sym = fwd + upper.triangularView<Eigen::Upper>().solve(fi - op.a * fwd);
    CHECK((extract(u) - sym).norm() < 1e-12 * sym.norm());
}

TEST_CASE("zero pivot is reported with its location") {
    Stencil15 s{};
    at(s, Direction::c) = 0.0;
    const StencilField a = StencilField::constant(2, s);
    try {
        factorize_tet(a);
        FAIL("expected a pivot breakdown");
    } catch (const PivotBreakdown& e) {
        CHECK(e.where == LogicalCoord{1, 1, 1});
        CHECK(e.pivot == 0.0);
    }
}

TEST_CASE("mask removes couplings to the boundary") {
    Stencil15 s;
    s.fill(-1.0);
    const Stencil15 m = mask_to_interior(s, {1, 1, 1}, 3);
    for (Direction d : kAllDirections) {
        if (d == Direction::c) continue;
        const bool inside = is_interior(LogicalCoord{1, 1, 1} + offset(d), 3);
        if (is_lower(d)) CHECK((at(m, d) != 0.0) == inside);
    }
}

TEST_CASE("working set of the streaming factorization grows like h^-2") {
    const MacroTet tet = meshes::shape("regular");
    FactorizationStats s5, s6;
    const StencilField a5 = StencilField::from_cell_stencils(5, assemble_cell_stencils(tet, 5, CoefficientField::constant(1)));
    const StencilField a6 = StencilField::from_cell_stencils(6, assemble_cell_stencils(tet, 6, CoefficientField::constant(1)));
    const ILUFactors f5 = factorize_tet(a5, &s5);
    const ILUFactors f6 = factorize_tet(a6, &s6);
    const double layer = static_cast<double>(s6.layer_bytes) / static_cast<double>(s5.layer_bytes);
    const double store = static_cast<double>(f6.bytes()) / static_cast<double>(f5.bytes());
    CHECK(layer > 3.0);
    CHECK(layer < 5.0);
    CHECK(store > 6.5);
    CHECK(store < 9.0);
    CHECK(FaceLayerPair(6).bytes() <= s6.layer_bytes);
}
