#include "mfilu/multigrid.hpp"

#include <cmath>
#include <random>

namespace mfilu {

SparseMatrix build_prolongation(const MacroMesh& mesh, const LevelDofs& coarse, const LevelDofs& fine) {
    if (fine.level() != coarse.level() + 1) throw Error("prolongation needs adjacent levels");
    static constexpr std::array<LogicalCoord, 7> edge_dirs = {
        {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, -1, 0}, {1, 0, -1}, {0, 1, -1}, {1, -1, 1}}};
    const int lf = fine.level(), lc = coarse.level();
    std::vector<Eigen::Triplet<double, int>> t;
    std::vector<char> done(static_cast<std::size_t>(fine.size()), 0);
    const auto points = enumerate_grid(lf, GridRegion::full);
    auto mod2 = [](int v) { return v & 1; };
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto fmap = fine.cell_map(static_cast<int>(c));
        const auto cmap = coarse.cell_map(static_cast<int>(c));
        auto add = [&](int row, LogicalCoord q, double w) {
            const int col = cmap[grid_index(q, lc)];
            if (!coarse.is_dirichlet(col)) t.emplace_back(row, col, w);
        };
        for (const auto& q : points) {
            const int row = fmap[grid_index(q, lf)];
            if (done[static_cast<std::size_t>(row)]) continue;
            done[static_cast<std::size_t>(row)] = 1;
            if (fine.is_dirichlet(row)) continue;
            const LogicalCoord r{mod2(q.x), mod2(q.y), mod2(q.z)};
            if (r == LogicalCoord{}) {
                add(row, {q.x / 2, q.y / 2, q.z / 2}, 1.0);
                continue;
            }
            bool found = false;
            for (const auto& d : edge_dirs) {
                if (LogicalCoord{mod2(d.x), mod2(d.y), mod2(d.z)} != r) continue;
                const LogicalCoord a = q - d, b = q + d;
                if (!in_grid(a, lf) || !in_grid(b, lf)) throw Error("prolongation: edge midpoint outside the grid");
                add(row, {a.x / 2, a.y / 2, a.z / 2}, 0.5);
                add(row, {b.x / 2, b.y / 2, b.z / 2}, 0.5);
                found = true;
                break;
            }
            if (!found) throw Error("prolongation: no coarse edge through fine vertex");
        }
    }
    SparseMatrix p(fine.size(), coarse.size());
    p.setFromTriplets(t.begin(), t.end());
    p.makeCompressed();
    return p;
}

Vector prolongate(const SparseMatrix& p, const Vector& coarse) {
    if (coarse.size() != p.cols()) throw Error("prolongate: level mismatch");
    return p * coarse;
}

Vector restrict_to_coarse(const SparseMatrix& p, const Vector& fine) {
    if (fine.size() != p.rows()) throw Error("restrict: level mismatch");
    return p.transpose() * fine;
}

void gs_smooth(const LevelSystem& sys, Vector& u, const Vector& f, PrimitiveRef prim, GsMode mode) {
    const auto [first, last] = sys.dofs.primitive_range(prim.type, prim.index);
    const auto& a = sys.matrix;
    auto sweep = [&](bool backward) {
        for (int k = 0; k < last - first; ++k) {
            const int i = backward ? last - 1 - k : first + k;
            if (sys.dofs.is_dirichlet(i)) continue;
            double r = f[i], diag = 0;
            for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
                r -= it.value() * u[it.col()];
                if (it.col() == i) diag = it.value();
            }
            if (diag == 0.0) throw Error("Gauss-Seidel: zero diagonal");
            u[i] += r / diag;
        }
    };
    if (mode != GsMode::backward) sweep(false);
    if (mode != GsMode::forward) sweep(true);
}

std::string_view name(CellSmoother s) {
    switch (s) {
        case CellSmoother::gs: return "gs";
        case CellSmoother::sgs: return "sgs";
        case CellSmoother::ilu: return "ilu";
        case CellSmoother::surrogate_ilu: return "surrogate_ilu";
    }
    return "?";
}

CellSmoother cell_smoother_from_name(std::string_view s) {
    if (s == "gs") return CellSmoother::gs;
    if (s == "sgs") return CellSmoother::sgs;
    if (s == "ilu") return CellSmoother::ilu;
    if (s == "surrogate_ilu" || s == "surrogate") return CellSmoother::surrogate_ilu;
    throw Error("unknown smoother '" + std::string(s) + "'");
}

HybridSmoother::HybridSmoother(const MacroMesh& mesh, const LevelSystem& sys, SmootherConfig config)
    : mesh_(&mesh), sys_(sys), config_(std::move(config)) {
    for (int i = 0; i < sys.dofs.size(); ++i) {
        const auto& p = sys.dofs.primitive(i);
        if (p.type != PrimitiveType::cell && !sys.dofs.is_dirichlet(i)) active_[static_cast<std::size_t>(p.type)] = true;
    }
    const std::size_t cells = mesh.num_cells();
    if (config_.surrogate_stencils) {
        for (std::size_t c = 0; c < cells; ++c)
            fitted_.push_back(std::make_unique<SurrogateStencils>(sys.cell_stencils[c], config_.stencil_degrees));
    }
    for (std::size_t c = 0; c < cells; ++c) {
        const StencilSource& a = stencils(static_cast<int>(c));
        if (config_.cell == CellSmoother::ilu) factors_.push_back(factorize_tet(a));
        if (config_.cell == CellSmoother::surrogate_ilu) surrogates_.push_back(build_surrogate_ilu(a, config_.surrogate));
    }
}

HybridSmoother::~HybridSmoother() = default;

const StencilSource& HybridSmoother::stencils(int cell) const {
    if (config_.surrogate_stencils) return *fitted_[static_cast<std::size_t>(cell)];
    return sys_.cell_stencils[static_cast<std::size_t>(cell)];
}

const ILUFactors* HybridSmoother::factors(int cell) const {
    return factors_.empty() ? nullptr : &factors_[static_cast<std::size_t>(cell)];
}

const SurrogateILU* HybridSmoother::surrogate(int cell) const {
    return surrogates_.empty() ? nullptr : &surrogates_[static_cast<std::size_t>(cell)];
}

void HybridSmoother::interface_stage(PrimitiveType type, bool backward, Vector& u, const Vector& f) const {
    if (!active_[static_cast<std::size_t>(type)]) return;
    const auto& a = sys_.matrix;
    const Vector r = f - a * u;
    const int count = static_cast<int>(mesh_->num_primitives(type));
    std::vector<double> delta;
    for (int p = 0; p < count; ++p) {
        const auto [first, last] = sys_.dofs.primitive_range(type, p);
        delta.assign(static_cast<std::size_t>(last - first), 0.0);
        for (int k = 0; k < last - first; ++k) {
            const int i = backward ? last - 1 - k : first + k;
            if (sys_.dofs.is_dirichlet(i)) continue;
            double s = r[i], diag = 0;
            for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
                const int j = static_cast<int>(it.col());
                if (j == i) {
                    diag = it.value();
                } else if (j >= first && j < last) {
                    s -= it.value() * delta[static_cast<std::size_t>(j - first)];
                }
            }
            if (diag == 0.0) throw Error("Gauss-Seidel: zero diagonal");
            delta[static_cast<std::size_t>(i - first)] = s / diag;
        }
        for (int i = first; i < last; ++i) u[i] += delta[static_cast<std::size_t>(i - first)];
    }
}

void HybridSmoother::cell_stage(bool backward, Vector& u, const Vector& f) const {
    for (std::size_t c = 0; c < mesh_->num_cells(); ++c) {
        const int ci = static_cast<int>(c);
        const auto map = sys_.dofs.cell_map(ci);
        const StencilSource& a = stencils(ci);
        switch (config_.cell) {
            case CellSmoother::gs: gs_cell_smooth(u, f, a, map, backward); break;
            case CellSmoother::sgs: sgs_cell_smooth(u, f, a, map); break;
            case CellSmoother::ilu: ilu_smooth(u, f, factors_[c], a, map); break;
            case CellSmoother::surrogate_ilu: surrogate_smooth(u, f, surrogates_[c], a, map); break;
        }
    }
}

void HybridSmoother::pre(Vector& u, const Vector& f) const {
    interface_stage(PrimitiveType::vertex, false, u, f);
    interface_stage(PrimitiveType::edge, false, u, f);
    interface_stage(PrimitiveType::face, false, u, f);
    cell_stage(false, u, f);
    if (config_.cell == CellSmoother::gs) return;
    interface_stage(PrimitiveType::face, true, u, f);
    interface_stage(PrimitiveType::edge, true, u, f);
    interface_stage(PrimitiveType::vertex, true, u, f);
}

void HybridSmoother::post(Vector& u, const Vector& f) const {
    if (config_.cell != CellSmoother::gs) {
        pre(u, f);
        return;
    }
    cell_stage(true, u, f);
    interface_stage(PrimitiveType::face, true, u, f);
    interface_stage(PrimitiveType::edge, true, u, f);
    interface_stage(PrimitiveType::vertex, true, u, f);
}

// ---------------------------------------------------------------------------

Hierarchy::Hierarchy(Problem problem, MultigridOptions options, SmootherFactory factory)
    : problem_(std::move(problem)), options_(std::move(options)) {
    if (options_.min_level < 2 || options_.max_level < options_.min_level)
        throw Error("multigrid levels must satisfy 2 <= min_level <= max_level");
    if (!factory) {
        factory = [cfg = options_.smoother](const MacroMesh& mesh, const LevelSystem& sys) {
            return std::make_unique<HybridSmoother>(mesh, sys, cfg);
        };
    }
    for (int l = options_.min_level; l <= options_.max_level; ++l) {
        systems_.push_back(std::make_unique<LevelSystem>(assemble_level(problem_, l)));
        if (l == options_.min_level) {
            prolongations_.emplace_back();
            smoothers_.push_back(nullptr);
        } else {
            prolongations_.push_back(build_prolongation(problem_.mesh, systems_[slot(l - 1)]->dofs, systems_[slot(l)]->dofs));
            smoothers_.push_back(factory(problem_.mesh, *systems_.back()));
        }
    }
}

void Hierarchy::coarse_solve(Vector& u, const Vector& f) const {
    const auto& a = system(min_level()).matrix;
    const Vector r = f - a * u;
    const double norm = r.norm();
    if (norm == 0.0) return;
    const auto res = pcg_solve(matrix_operator(a), r, identity_operator(), options_.coarse_tolerance * norm,
                               options_.coarse_max_iterations);
    if (!res.converged) throw Error("coarse CG did not reach the requested tolerance");
    u += res.x;
}

void Hierarchy::v_cycle(int level, Vector& u, const Vector& f) const {
    if (level == min_level()) {
        coarse_solve(u, f);
        return;
    }
    const auto& a = system(level).matrix;
    const Smoother& s = smoother(level);
    for (int i = 0; i < options_.pre_smooth; ++i) s.pre(u, f);
    const Vector rc = restrict_to_coarse(prolongation(level), f - a * u);
    Vector ec = Vector::Zero(rc.size());
    v_cycle(level - 1, ec, rc);
    u += prolongation(level) * ec;
    for (int i = 0; i < options_.post_smooth; ++i) s.post(u, f);
}

Vector random_free_vector(const LevelDofs& dofs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v = Vector::Zero(dofs.size());
    for (int i = 0; i < dofs.size(); ++i) {
        const double x = dist(rng);
        if (!dofs.is_dirichlet(i)) v[i] = x;
    }
    return v;
}

RateReport convergence_factor(const Hierarchy& h, int steps, std::uint64_t seed) {
    const auto& sys = h.finest();
    Vector e = random_free_vector(sys.dofs, seed);
    const Vector zero = Vector::Zero(e.size());
    RateReport report;
    double norm = e.norm();
    if (norm == 0.0) throw Error("convergence_factor: no free DoF");
    e /= norm;
    for (int k = 0; k < steps; ++k) {
        h.v_cycle(e, zero);
        const double next = e.norm();
        if (!std::isfinite(next)) throw Error("convergence_factor: overflow in power iteration");
        report.ratios.push_back(next);
        report.rho = next;
        if (next == 0.0) break;
        if (next < 1e-300) throw Error("convergence_factor: underflow in power iteration");
        e /= next;
    }
    return report;
}

PcgResult pcg_solve(const LinearOperator& a, const Vector& b, const LinearOperator& preconditioner, double tol,
                    int max_iterations) {
    PcgResult out;
    out.x = Vector::Zero(b.size());
    Vector r = b;
    out.residual = r.norm();
    out.history.push_back(out.residual);
    if (out.residual < tol) {
        out.converged = true;
        return out;
    }
    Vector z(b.size()), q(b.size());
    preconditioner(r, z);
    Vector p = z;
    double rz = r.dot(z);
    for (int it = 1; it <= max_iterations; ++it) {
        a(p, q);
        const double pq = p.dot(q);
        if (!(pq > 0)) throw Error("PCG breakdown: non-positive curvature");
        const double alpha = rz / pq;
        out.x += alpha * p;
        r -= alpha * q;
        out.residual = r.norm();
        out.history.push_back(out.residual);
        out.iterations = it;
        if (out.residual < tol) {
            out.converged = true;
            break;
        }
        preconditioner(r, z);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    return out;
}

LinearOperator matrix_operator(const SparseMatrix& a) {
    return [&a](const Vector& x, Vector& y) { y = a * x; };
}

LinearOperator identity_operator() {
    return [](const Vector& x, Vector& y) { y = x; };
}

}  // namespace mfilu
