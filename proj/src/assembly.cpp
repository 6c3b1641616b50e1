#include "mfilu/assembly.hpp"

#include <cmath>

#include <Eigen/LU>

namespace mfilu {

CoefficientField CoefficientField::constant(double kappa) {
    if (!(kappa > 0)) throw Error("coefficient must be positive");
    return CoefficientField([kappa](const Vec3&) -> Eigen::Matrix3d { return kappa * Eigen::Matrix3d::Identity(); },
                            "constant");
}

CoefficientField CoefficientField::scalar(ScalarFn kappa, std::string label) {
    return CoefficientField(
        [kappa = std::move(kappa)](const Vec3& x) -> Eigen::Matrix3d { return kappa(x) * Eigen::Matrix3d::Identity(); },
        std::move(label));
}

CoefficientField CoefficientField::tensor(TensorFn k, std::string label) {
    return CoefficientField(std::move(k), std::move(label));
}

double kappa_poly(int i, const Vec3& x) {
    if (i < 0 || i > 3) throw Error("kappa_poly degree must be in [0, 3]");
    return 1.0 + 10.0 * (std::pow(x.x(), i) + std::pow(x.y(), i) + std::pow(x.z(), i));
}

CoefficientField kappa_poly_field(int i) {
    if (i < 0 || i > 3) throw Error("kappa_poly degree must be in [0, 3]");
    return CoefficientField::scalar([i](const Vec3& x) { return kappa_poly(i, x); },
                                    "kappa_poly(" + std::to_string(i) + ")");
}

ShellBlending::ShellBlending(const MacroTet& reference) : reference_(reference) {
    for (int k = 0; k < 4; ++k) radii_[k] = reference.vertex(k).norm();
}

Vec3 ShellBlending::operator()(const Vec3& x) const {
    const double r = x.norm();
    if (r < 1e-14) throw Error("shell blending is undefined at the origin");
    return (reference_.barycentric(x).dot(radii_) / r) * x;
}

Eigen::Matrix4d element_stiffness(const std::array<Vec3, 4>& v, const Eigen::Matrix3d& k, long element_id) {
    Eigen::Matrix3d m;
    m << v[1] - v[0], v[2] - v[0], v[3] - v[0];
    const double det = m.determinant();
    double scale = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            scale = std::max(scale, (v[static_cast<std::size_t>(a)] - v[static_cast<std::size_t>(b)]).norm());
    if (!(std::abs(det) > 1e-14 * scale * scale * scale)) {
        throw Error("degenerate element" + (element_id >= 0 ? " " + std::to_string(element_id) : std::string()));
    }
    // Rows of m^{-1} are the gradients of the barycentric coordinates 1..3.
    const Eigen::Matrix3d inv = m.inverse();
    Eigen::Matrix<double, 3, 4> g;
    g.col(1) = inv.row(0).transpose();
    g.col(2) = inv.row(1).transpose();
    g.col(3) = inv.row(2).transpose();
    g.col(0) = -(g.col(1) + g.col(2) + g.col(3));
    return (std::abs(det) / 6.0) * (g.transpose() * k * g);
}

const std::vector<std::array<LogicalCoord, 4>>& vertex_patch() {
    static const std::vector<std::array<LogicalCoord, 4>> patch = [] {
        std::vector<std::array<LogicalCoord, 4>> out;
        const LogicalCoord centre{1, 1, 1};
        for_each_micro_tet(2, [&](const std::array<LogicalCoord, 4>& t) {
            for (const auto& q : t) {
                if (q == centre) {
                    out.push_back({t[0] - centre, t[1] - centre, t[2] - centre, t[3] - centre});
                    return;
                }
            }
        });
        return out;
    }();
    return patch;
}

namespace {

std::array<Vec3, 4> element_positions(const MacroTet& tet, int level, const std::array<LogicalCoord, 4>& q,
                                      const GeometryMap* map) {
    std::array<Vec3, 4> x;
    for (std::size_t k = 0; k < 4; ++k) {
        x[k] = tet.micro_vertex_position(q[k], level);
        if (map) x[k] = (*map)(x[k]);
    }
    return x;
}

Eigen::Matrix3d centroid_tensor(const CoefficientField& coeff, const std::array<Vec3, 4>& x) {
    return coeff(0.25 * (x[0] + x[1] + x[2] + x[3]));
}

}  // namespace

Stencil15 assemble_stencil(const MacroTet& tet, int level, LogicalCoord p, const CoefficientField& coeff,
                           const GeometryMap* map) {
    if (!is_interior(p, level)) throw Error("stencil assembly requires an interior point");
    Stencil15 s{};
    for (const auto& rel : vertex_patch()) {
        std::array<LogicalCoord, 4> q;
        int centre = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            q[k] = p + rel[k];
            if (rel[k] == LogicalCoord{}) centre = static_cast<int>(k);
        }
        const auto x = element_positions(tet, level, q, map);
        const Eigen::Matrix4d ke = element_stiffness(x, centroid_tensor(coeff, x));
        for (std::size_t k = 0; k < 4; ++k) at(s, direction_from_offset(rel[k])) += ke(centre, static_cast<int>(k));
    }
    return s;
}

std::vector<Stencil15> assemble_cell_stencils(const MacroTet& tet, int level, const CoefficientField& coeff,
                                              const GeometryMap* map) {
    std::vector<Stencil15> out(grid_size(level), Stencil15{});
    long element = 0;
    for_each_micro_tet(level, [&](const std::array<LogicalCoord, 4>& q) {
        const auto x = element_positions(tet, level, q, map);
        const Eigen::Matrix4d ke = element_stiffness(x, centroid_tensor(coeff, x), element++);
        for (std::size_t a = 0; a < 4; ++a) {
            auto& s = out[grid_index(q[a], level)];
            for (std::size_t b = 0; b < 4; ++b)
                at(s, direction_from_offset(q[b] - q[a])) += ke(static_cast<int>(a), static_cast<int>(b));
        }
    });
    return out;
}

StencilField StencilField::from_cell_stencils(int level, const std::vector<Stencil15>& cell) {
    std::vector<Stencil15> interior;
    interior.reserve(interior_size(level));
    for (const auto& p : enumerate_grid(level, GridRegion::interior)) interior.push_back(cell[grid_index(p, level)]);
    return StencilField(level, std::move(interior));
}

StencilField StencilField::constant(int level, const Stencil15& s) {
    return StencilField(level, std::vector<Stencil15>(interior_size(level), s));
}

LevelSystem assemble_level(const Problem& problem, int level) {
    LevelDofs dofs(problem.mesh, level);
    std::vector<StencilField> fields;
    std::vector<Eigen::Triplet<double, int>> triplets;
    const auto points = enumerate_grid(level, GridRegion::full);
    const auto& mask = dofs.dirichlet_mask();
    for (std::size_t c = 0; c < problem.mesh.num_cells(); ++c) {
        const int ci = static_cast<int>(c);
        const auto cell = assemble_cell_stencils(problem.mesh.cell_tet(ci), level, problem.coefficient,
                                                 problem.map(ci));
        const auto map = dofs.cell_map(ci);
        for (const auto& p : points) {
            const auto& s = cell[grid_index(p, level)];
            const int row = map[grid_index(p, level)];
            for (Direction d : kAllDirections) {
                const LogicalCoord q = p + offset(d);
                if (at(s, d) == 0.0 || !in_grid(q, level)) continue;
                const int col = map[grid_index(q, level)];
                if (mask[static_cast<std::size_t>(row)] || mask[static_cast<std::size_t>(col)]) continue;
                triplets.emplace_back(row, col, at(s, d));
            }
        }
        fields.push_back(StencilField::from_cell_stencils(level, cell));
    }
    for (int i = 0; i < dofs.size(); ++i)
        if (mask[static_cast<std::size_t>(i)]) triplets.emplace_back(i, i, 1.0);
    SparseMatrix a(dofs.size(), dofs.size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return LevelSystem{std::move(dofs), std::move(a), std::move(fields)};
}

Vector assemble_load(const Problem& problem, const LevelDofs& dofs, const std::function<double(const Vec3&)>& f) {
    const int level = dofs.level();
    Vector b = Vector::Zero(dofs.size());
    for (std::size_t c = 0; c < problem.mesh.num_cells(); ++c) {
        const int ci = static_cast<int>(c);
        const MacroTet tet = problem.mesh.cell_tet(ci);
        const auto map = dofs.cell_map(ci);
        for_each_micro_tet(level, [&](const std::array<LogicalCoord, 4>& q) {
            const auto x = element_positions(tet, level, q, problem.map(ci));
            Eigen::Matrix3d m;
            m << x[1] - x[0], x[2] - x[0], x[3] - x[0];
            const double share = std::abs(m.determinant()) / 24.0 * f(0.25 * (x[0] + x[1] + x[2] + x[3]));
            for (const auto& qk : q) b[map[grid_index(qk, level)]] += share;
        });
    }
    for (int i = 0; i < dofs.size(); ++i)
        if (dofs.is_dirichlet(i)) b[i] = 0.0;
    return b;
}

}  // namespace mfilu
