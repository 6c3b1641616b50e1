#include "mfilu/lfa.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mfilu {

namespace {

constexpr std::size_t W = index(Direction::w);
constexpr std::size_t S = index(Direction::s);
constexpr std::size_t SE = index(Direction::se);
constexpr std::size_t BNW = index(Direction::bnw);
constexpr std::size_t BN = index(Direction::bn);
constexpr std::size_t BC = index(Direction::bc);
constexpr std::size_t BE = index(Direction::be);

double phase(LogicalCoord o, const std::array<double, 3>& t) { return o.x * t[0] + o.y * t[1] + o.z * t[2]; }

}  // namespace

LowerStencil AsymptoticStencils::lower() const {
    LowerStencil s;
    s.l = l;
    s.d = d;
    s.inv_d = 1.0 / d;
    return s;
}

AsymptoticStencils asymptotic_stencils(const Stencil15& a, double tol, int max_iterations) {
    AsymptoticStencils s;
    auto& l = s.l;
    double& d = s.d;
    d = a[index(Direction::c)];
    for (int it = 1; it <= max_iterations; ++it) {
        const auto old_l = l;
        const double old_d = d;
        l[BC] = a[BC] / d;
        l[S] = (a[S] - l[BC] * d * l[BN]) / d;
        l[BNW] = (a[BNW] - l[BC] * d * l[SE]) / d;
        l[BE] = (a[BE] - l[BC] * d * l[W]) / d;
        l[W] = (a[W] - l[BC] * d * l[BE] - l[BNW] * d * l[BN] - l[S] * d * l[SE]) / d;
        l[BN] = (a[BN] - l[BC] * d * l[S] - l[BE] * d * l[SE] - l[BNW] * d * l[W]) / d;
        l[SE] = (a[SE] - l[BC] * d * l[BNW] - l[BE] * d * l[BN] - l[S] * d * l[W]) / d;
        double sq = 0;
        for (double v : l) sq += v * v;
        d = a[index(Direction::c)] - d * sq;
        if (!std::isfinite(d) || d <= 0) throw Error("asymptotic ILU stencils: non-positive pivot");
        double change = std::abs(d - old_d) / std::abs(d);
        for (std::size_t k = 0; k < kNumLower; ++k)
            change = std::max(change, std::abs(l[k] - old_l[k]) / std::max(std::abs(l[k]), 1e-8));
        s.iterations = it;
        if (change < tol) return s;
    }
    throw Error("asymptotic ILU stencils did not converge");
}

double fixed_point_residual(const Stencil15& a, const AsymptoticStencils& s) {
    const auto& l = s.l;
    const double d = s.d;
    const std::array<double, 8> res = {
        a[BC] - l[BC] * d,
        a[S] - l[BC] * d * l[BN] - l[S] * d,
        a[BNW] - l[BC] * d * l[SE] - l[BNW] * d,
        a[BE] - l[BC] * d * l[W] - l[BE] * d,
        a[W] - l[BC] * d * l[BE] - l[BNW] * d * l[BN] - l[S] * d * l[SE] - l[W] * d,
        a[BN] - l[BC] * d * l[S] - l[BE] * d * l[SE] - l[BNW] * d * l[W] - l[BN] * d,
        a[SE] - l[BC] * d * l[BNW] - l[BE] * d * l[BN] - l[S] * d * l[W] - l[SE] * d,
        [&] {
            double sq = 0;
            for (double v : l) sq += v * v;
            return a[index(Direction::c)] - d - d * sq;
        }(),
    };
    double m = 0;
    for (double r : res) m = std::max(m, std::abs(r));
    return m / std::abs(a[index(Direction::c)]);
}

std::complex<double> symbol(const Stencil15& a, const std::array<double, 3>& theta) {
    std::complex<double> s = 0;
    for (Direction d : kAllDirections) s += at(a, d) * std::polar(1.0, phase(offset(d), theta));
    return s;
}

double factor_symbol(const AsymptoticStencils& s, const std::array<double, 3>& theta) {
    std::complex<double> l = 1.0;
    for (std::size_t k = 0; k < kNumLower; ++k) l += s.l[k] * std::polar(1.0, phase(offset(kLowerDirections[k]), theta));
    return s.d * std::norm(l);
}

std::vector<std::array<double, 3>> high_frequencies(int samples) {
    const double pi = std::numbers::pi;
    std::vector<double> axis(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) axis[static_cast<std::size_t>(k)] = -pi + (k + 0.5) * 2.0 * pi / samples;
    std::vector<std::array<double, 3>> out;
    for (double t3 : axis)
        for (double t2 : axis)
            for (double t1 : axis) {
                const bool low = std::abs(t1) < pi / 2 && std::abs(t2) < pi / 2 && std::abs(t3) < pi / 2;
                if (!low) out.push_back({t1, t2, t3});
            }
    return out;
}

double smoothing_factor(const Stencil15& a, const AsymptoticStencils& s, int samples) {
    const double scale = std::abs(a[index(Direction::c)]);
    double mu = 0;
    for (const auto& theta : high_frequencies(samples)) {
        const double c = factor_symbol(s, theta);
        if (std::abs(c) < 1e-14 * scale) throw Error("LFA: factor symbol vanishes at a sampled frequency");
        mu = std::max(mu, std::abs((c - symbol(a, theta)) / c));
    }
    return mu;
}

double smoothing_factor(const Stencil15& a, int samples) { return smoothing_factor(a, asymptotic_stencils(a), samples); }

LfaReport best_permutation(const MacroTet& tet, const CoefficientField& coeff, int samples) {
    const Eigen::Matrix3d k = coeff(tet.centroid());
    const auto frozen = CoefficientField::tensor([k](const Vec3&) { return k; }, "frozen");
    LfaReport report;
    report.permutations = Permutation::all();
    const long per_permutation = static_cast<long>(high_frequencies(samples).size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.permutations.size(); ++i) {
        double mu = std::numeric_limits<double>::infinity();
        try {
            const Stencil15 a = assemble_stencil(tet.permuted(report.permutations[i]), 2, {1, 1, 1}, frozen);
            mu = smoothing_factor(a, samples);
        } catch (const Error&) {
        }
        report.grid_points += per_permutation;
        report.mu.push_back(mu);
        if (mu < best * (1.0 - 1e-9)) {
            best = mu;
            report.best = i;
        }
    }
    if (!std::isfinite(best)) throw Error("LFA failed for every vertex permutation");
    return report;
}

}  // namespace mfilu
