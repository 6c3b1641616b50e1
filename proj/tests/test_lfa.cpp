#include <numbers>

#include "doctest.h"
#include "mfilu/lfa.hpp"

using namespace mfilu;

namespace {

Stencil15 constant_stencil(const MacroTet& tet, int level = 4) {
    return assemble_stencil(tet, level, {1, 1, 1}, CoefficientField::constant(1.0));
}

MacroTet scaled(const MacroTet& t, double s, const Vec3& shift) {
    return MacroTet({s * t.vertex(0) + shift, s * t.vertex(1) + shift, s * t.vertex(2) + shift, s * t.vertex(3) + shift});
}

}  // namespace

TEST_CASE("asymptotic stencils are the ILU factors far from the boundary") {
    for (const char* shape : {"regular", "cap", "spade"}) {
        const MacroTet tet = meshes::shape(shape);
        const Stencil15 a = constant_stencil(tet);
        const AsymptoticStencils s = asymptotic_stencils(a);
        CHECK(fixed_point_residual(a, s) < 1e-12);

        const int level = 6;
        const ILUFactors f = factorize_tet(StencilField::constant(level, a));
        const LowerStencil& mid = f.at({16, 16, 16});
        CHECK(mid.d == doctest::Approx(s.d).epsilon(1e-4));
        for (std::size_t k = 0; k < kNumLower; ++k) CHECK(std::abs(mid.l[k] - s.l[k]) < 1e-4);
    }
}

TEST_CASE("symbols") {
    const Stencil15 a = constant_stencil(meshes::shape("spade"));
    const std::array<double, 3> zero{0, 0, 0};
    CHECK(std::abs(symbol(a, zero)) < 1e-12);
    const std::array<double, 3> t{0.3, -2.1, 1.7};
    std::complex<double> direct = 0;
    for (Direction d : kAllDirections) {
        const LogicalCoord o = offset(d);
        direct += at(a, d) * std::exp(std::complex<double>(0, o.x * t[0] + o.y * t[1] + o.z * t[2]));
    }
    CHECK(std::abs(symbol(a, t) - direct) < 1e-12);
    CHECK(std::abs(direct.imag()) < 1e-12);

    const AsymptoticStencils s = asymptotic_stencils(a);
    std::complex<double> l = 1;
    for (Direction d : kLowerDirections) {
        const LogicalCoord o = offset(d);
        l += s.l[index(d)] * std::exp(std::complex<double>(0, o.x * t[0] + o.y * t[1] + o.z * t[2]));
    }
    CHECK(factor_symbol(s, t) == doctest::Approx(s.d * std::norm(l)).epsilon(1e-12));
}

TEST_CASE("high-frequency grid") {
    const auto g = high_frequencies(16);
    CHECK(g.size() == 16 * 16 * 16 - 8 * 8 * 8);
    for (const auto& t : g) {
        bool high = false;
        for (double x : t) {
            CHECK(std::abs(x) < std::numbers::pi);
            high = high || std::abs(x) >= std::numbers::pi / 2;
        }
        CHECK(high);
    }
}

TEST_CASE("smoothing factor agrees with a direct sweep") {
    const Stencil15 a = constant_stencil(meshes::shape("cap"));
    const AsymptoticStencils s = asymptotic_stencils(a);
    double mu = 0;
    for (const auto& t : high_frequencies(16)) {
        const double m = factor_symbol(s, t);
        mu = std::max(mu, std::abs((m - symbol(a, t).real()) / m));
    }
    CHECK(smoothing_factor(a) == doctest::Approx(mu).epsilon(1e-12));
    CHECK(mu > 0);
    CHECK(mu < 1);
}

TEST_CASE("smoothing factor is invariant under scaling and translation") {
    const MacroTet cap = meshes::shape("cap");
    const Stencil15 a = constant_stencil(cap);
    Stencil15 b = a;
    for (double& x : b) x *= 3.7;
    CHECK(smoothing_factor(b) == doctest::Approx(smoothing_factor(a)).epsilon(1e-10));

    const LfaReport r1 = best_permutation(cap);
    const LfaReport r2 = best_permutation(scaled(cap, 4.0, Vec3(1, -2, 3)));
    CHECK(r1.best == r2.best);
    for (std::size_t i = 0; i < 24; ++i) CHECK(r1.mu[i] == doctest::Approx(r2.mu[i]).epsilon(1e-8));
    CHECK(r1.grid_points == 24L * (16 * 16 * 16 - 8 * 8 * 8));
}

TEST_CASE("regular tetrahedron has no preferred orientation") {
    const LfaReport r = best_permutation(meshes::shape("regular"));
    for (double m : r.mu) CHECK(m == doctest::Approx(r.mu[0]).epsilon(1e-8));
    CHECK(r.best == 0);
}

TEST_CASE("cap prefers the flat face as the first layer") {
    const LfaReport r = best_permutation(meshes::shape("cap"));
    const auto all = Permutation::all();
    const auto it = std::find(all.begin(), all.end(), Permutation::parse("2341"));
    const double mu_ref = r.mu[static_cast<std::size_t>(it - all.begin())];
    const double best = r.mu[r.best];
    CHECK(best <= mu_ref);
    CHECK(mu_ref <= 1.01 * best);
    double worst = 0;
    for (double m : r.mu) worst = std::max(worst, m);
    CHECK(worst > 2 * best);
}
