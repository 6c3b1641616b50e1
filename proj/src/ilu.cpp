#include "mfilu/ilu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfilu {

namespace {

constexpr std::size_t W = index(Direction::w);
constexpr std::size_t S = index(Direction::s);
constexpr std::size_t SE = index(Direction::se);
constexpr std::size_t BNW = index(Direction::bnw);
constexpr std::size_t BN = index(Direction::bn);
constexpr std::size_t BC = index(Direction::bc);
constexpr std::size_t BE = index(Direction::be);

std::string pivot_message(LogicalCoord p, double pivot) {
    return "ILU pivot breakdown at (" + std::to_string(p.x) + "," + std::to_string(p.y) + "," + std::to_string(p.z) +
           "): D_c = " + std::to_string(pivot);
}

}  // namespace

PivotBreakdown::PivotBreakdown(LogicalCoord p, double value)
    : Error(pivot_message(p, value)), where(p), pivot(value) {}

LowerStencil factor_step(const Stencil15& a, const std::array<const LowerStencil*, kNumLower>& nb, LogicalCoord p) {
    const LowerStencil& w = *nb[W];
    const LowerStencil& s = *nb[S];
    const LowerStencil& se = *nb[SE];
    const LowerStencil& bnw = *nb[BNW];
    const LowerStencil& bn = *nb[BN];
    const LowerStencil& bc = *nb[BC];
    const LowerStencil& be = *nb[BE];

    LowerStencil out;
    auto& l = out.l;
    l[BC] = a[BC] * bc.inv_d;
    const double bc_term = l[BC] * bc.d;
    l[S] = (a[S] - bc_term * s.l[BN]) * s.inv_d;
    l[BNW] = (a[BNW] - bc_term * bnw.l[SE]) * bnw.inv_d;
    l[BE] = (a[BE] - bc_term * be.l[W]) * be.inv_d;
    const double bnw_term = l[BNW] * bnw.d;
    const double be_term = l[BE] * be.d;
    const double s_term = l[S] * s.d;
    l[W] = (a[W] - bc_term * w.l[BE] - bnw_term * w.l[BN] - s_term * w.l[SE]) * w.inv_d;
    l[BN] = (a[BN] - bc_term * bn.l[S] - be_term * bn.l[SE] - bnw_term * bn.l[W]) * bn.inv_d;
    l[SE] = (a[SE] - bc_term * se.l[BNW] - be_term * se.l[BN] - s_term * se.l[W]) * se.inv_d;

    double d = a[index(Direction::c)];
    for (std::size_t k = 0; k < kNumLower; ++k) d -= l[k] * l[k] * nb[k]->d;
    const double scale = std::abs(a[index(Direction::c)]);
    if (!std::isfinite(d) || !(std::abs(d) > 1e-300 * std::max(scale, 1.0))) throw PivotBreakdown(p, d);
    out.d = d;
    out.inv_d = 1.0 / d;
    return out;
}

Stencil15 mask_to_interior(Stencil15 a, LogicalCoord p, int level) {
    for (Direction d : kLowerDirections)
        if (!is_interior(p + offset(d), level)) at(a, d) = 0.0;
    return a;
}

FaceLayerPair::FaceLayerPair(int level)
    : n_(cells_per_edge(level)),
      beta_(triangular_count(n_ + 1), LowerStencil::identity()),
      gamma_(triangular_count(n_ + 1), LowerStencil::identity()) {}

void FaceLayerPair::begin_layer(int z) {
    std::swap(beta_, gamma_);
    side_ = n_ + 1 - z;
    std::fill(beta_.begin(), beta_.begin() + static_cast<std::ptrdiff_t>(triangular_count(side_)),
              LowerStencil::identity());
}

std::size_t FaceLayerPair::bytes() const { return (beta_.capacity() + gamma_.capacity()) * sizeof(LowerStencil); }

FactorizationStats factorize_streaming(const StencilSource& a, const FactorConsumer& consumer) {
    const int level = a.level();
    const int n = cells_per_edge(level);
    FaceLayerPair layers(level);
    FactorizationStats stats;
    stats.layer_bytes = layers.bytes();
    for (int z = 1; z <= n - 3; ++z) {
        layers.begin_layer(z);
        for (int y = 1; y <= n - 2 - z; ++y) {
            for (int x = 1; x <= n - 1 - y - z; ++x) {
                const LogicalCoord p{x, y, z};
                const std::array<const LowerStencil*, kNumLower> nb = {
                    &layers.current(x - 1, y),      &layers.current(x, y - 1),  &layers.current(x + 1, y - 1),
                    &layers.previous(x - 1, y + 1), &layers.previous(x, y + 1), &layers.previous(x, y),
                    &layers.previous(x + 1, y)};
                const LowerStencil f = factor_step(mask_to_interior(a.at(p), p, level), nb, p);
                layers.current(x, y) = f;
                consumer(p, f);
            }
        }
        stats.layer_bytes = std::max(stats.layer_bytes, layers.bytes());
    }
    return stats;
}

ILUFactors::ILUFactors(int level) : level_(level), data_(grid_size(level), LowerStencil::identity()) {}

ILUFactors factorize_tet(const StencilSource& a, FactorizationStats* stats) {
    ILUFactors factors(a.level());
    auto s = factorize_streaming(a, [&](LogicalCoord p, const LowerStencil& f) { factors.at(p) = f; });
    s.store_bytes = factors.bytes();
    if (stats) *stats = s;
    return factors;
}

namespace {

inline double stencil_residual(const Stencil15& s, const Vector& f, const Eigen::Ref<Vector>& u,
                               std::span<const int> map, LogicalCoord p, int level) {
    double r = f[map[grid_index(p, level)]];
    for (Direction d : kAllDirections) r -= at(s, d) * u[map[grid_index(p + offset(d), level)]];
    return r;
}

}  // namespace

void ilu_smooth(Eigen::Ref<Vector> u, const Vector& f, const ILUFactors& factors, const StencilSource& a,
                std::span<const int> map) {
    const int level = a.level();
    if (factors.empty() || factors.level() != level) throw Error("ilu_smooth: factors missing for this level");
    std::vector<double> w(grid_size(level), 0.0);
    for_each_interior(level, [&](LogicalCoord p) {
        double r = stencil_residual(a.at(p), f, u, map, p, level);
        const LowerStencil& fp = factors.at(p);
        for (std::size_t k = 0; k < kNumLower; ++k) r -= fp.l[k] * w[grid_index(p + offset(kLowerDirections[k]), level)];
        w[grid_index(p, level)] = r;
    });
    std::vector<double> acc(w.size(), 0.0);
    for_each_interior(
        level,
        [&](LogicalCoord p) {
            const std::size_t i = grid_index(p, level);
            const LowerStencil& fp = factors.at(p);
            const double x = w[i] * fp.inv_d + acc[i];
            for (std::size_t k = 0; k < kNumLower; ++k)
                acc[grid_index(p + offset(kLowerDirections[k]), level)] -= fp.l[k] * x;
            u[map[i]] += x;
        },
        true);
}

void gs_cell_smooth(Eigen::Ref<Vector> u, const Vector& f, const StencilSource& a, std::span<const int> map,
                    bool backward) {
    const int level = a.level();
    for_each_interior(
        level,
        [&](LogicalCoord p) {
            const Stencil15 s = a.at(p);
            const double diag = at(s, Direction::c);
            if (diag == 0.0) throw Error("Gauss-Seidel: zero diagonal");
            const double r = stencil_residual(s, f, u, map, p, level);
            u[map[grid_index(p, level)]] += r / diag;
        },
        backward);
}

void sgs_cell_smooth(Eigen::Ref<Vector> u, const Vector& f, const StencilSource& a, std::span<const int> map) {
    gs_cell_smooth(u, f, a, map, false);
    gs_cell_smooth(u, f, a, map, true);
}

}  // namespace mfilu
