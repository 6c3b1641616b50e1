#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mfilu/dofs.hpp"
#include "mfilu/geometry.hpp"
#include "mfilu/mesh.hpp"

namespace mfilu {

/// One row of the P1 stiffness matrix at a micro-vertex, indexed by Direction.
using Stencil15 = std::array<double, kNumDirections>;

inline double& at(Stencil15& s, Direction d) { return s[index(d)]; }
inline double at(const Stencil15& s, Direction d) { return s[index(d)]; }

/// Symmetric positive-definite diffusion tensor K(x); scalar coefficients are
/// promoted to kappa(x) * Id.
class CoefficientField {
public:
    using TensorFn = std::function<Eigen::Matrix3d(const Vec3&)>;
    using ScalarFn = std::function<double(const Vec3&)>;

    CoefficientField() : CoefficientField(constant(1.0)) {}

    static CoefficientField constant(double kappa);
    static CoefficientField scalar(ScalarFn kappa, std::string label = "scalar");
    static CoefficientField tensor(TensorFn k, std::string label = "tensor");

    Eigen::Matrix3d operator()(const Vec3& x) const { return fn_(x); }
    const std::string& label() const { return label_; }

private:
    CoefficientField(TensorFn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}
    TensorFn fn_;
    std::string label_;
};

/// Maps points of the (affine) reference macro-tetrahedron to the physical domain.
using GeometryMap = std::function<Vec3(const Vec3&)>;

/// kappa_i(x, y, z) = 1 + 10 (x^i + y^i + z^i), 0 <= i <= 3.
double kappa_poly(int i, const Vec3& x);
CoefficientField kappa_poly_field(int i);

/// Radial blending of a macro-tetrahedron onto a spherical shell: the
/// barycentric interpolation of the vertex radii becomes the radius of the
/// mapped point. Vertices on a sphere of radius r stay on it.
class ShellBlending {
public:
    explicit ShellBlending(const MacroTet& reference);
    Vec3 operator()(const Vec3& x) const;

private:
    MacroTet reference_;
    Eigen::Vector4d radii_;
};

/// |T| g_i^T K g_j for the P1 shape function gradients g_i of the tetrahedron.
/// Throws Error (mentioning `element_id` when non-negative) if degenerate.
Eigen::Matrix4d element_stiffness(const std::array<Vec3, 4>& v, const Eigen::Matrix3d& k, long element_id = -1);

/// Stencil of the interior micro-vertex p, summed over its 24 adjacent
/// micro-elements. One-point (centroid) quadrature for K; with a geometry
/// map the micro-vertex positions are mapped before element assembly.
Stencil15 assemble_stencil(const MacroTet& tet, int level, LogicalCoord p, const CoefficientField& coeff,
                           const GeometryMap* map = nullptr);

/// Offsets (relative to the centre vertex) of the 24 micro-elements around an
/// interior vertex.
const std::vector<std::array<LogicalCoord, 4>>& vertex_patch();

/// Per-vertex contributions of one cell over its full lattice (indexed by
/// grid_index). At interior vertices these are the complete stencils.
std::vector<Stencil15> assemble_cell_stencils(const MacroTet& tet, int level, const CoefficientField& coeff,
                                              const GeometryMap* map = nullptr);

// ---------------------------------------------------------------------------
// Stencil sources for the interior of a macro-tetrahedron.
// ---------------------------------------------------------------------------

class StencilSource {
public:
    virtual ~StencilSource() = default;
    virtual int level() const = 0;
    /// Stencil at an interior point.
    virtual Stencil15 at(LogicalCoord p) const = 0;
};

/// Precomputed interior stencils (indexed by interior_index).
class StencilField final : public StencilSource {
public:
    StencilField(int level, std::vector<Stencil15> interior) : level_(level), data_(std::move(interior)) {}
    /// Extracts the interior stencils from per-cell lattice contributions.
    static StencilField from_cell_stencils(int level, const std::vector<Stencil15>& cell);
    static StencilField constant(int level, const Stencil15& s);

    int level() const override { return level_; }
    Stencil15 at(LogicalCoord p) const override { return data_[interior_index(p, level_)]; }
    const Stencil15& ref(LogicalCoord p) const { return data_[interior_index(p, level_)]; }

private:
    int level_;
    std::vector<Stencil15> data_;
};

/// Assembles every requested stencil from scratch (matrix-free path).
class OnTheFlyStencils final : public StencilSource {
public:
    OnTheFlyStencils(MacroTet tet, int level, CoefficientField coeff, GeometryMap map = {})
        : tet_(std::move(tet)), level_(level), coeff_(std::move(coeff)), map_(std::move(map)) {}
    int level() const override { return level_; }
    Stencil15 at(LogicalCoord p) const override {
        return assemble_stencil(tet_, level_, p, coeff_, map_ ? &map_ : nullptr);
    }

private:
    MacroTet tet_;
    int level_;
    CoefficientField coeff_;
    GeometryMap map_;
};

// ---------------------------------------------------------------------------
// Whole-problem discretization.
// ---------------------------------------------------------------------------

/// A macro-mesh with its coefficient and optional per-cell geometry maps.
struct Problem {
    MacroMesh mesh;
    CoefficientField coefficient = CoefficientField::constant(1.0);
    std::vector<GeometryMap> cell_maps;  // empty or one per cell; empty entries mean affine

    const GeometryMap* map(int c) const {
        if (cell_maps.empty()) return nullptr;
        const auto& m = cell_maps[static_cast<std::size_t>(c)];
        return m ? &m : nullptr;
    }
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// Operator of one hybrid-grid level: DoF layout, global matrix (Dirichlet
/// rows and columns replaced by identity) and interior stencils per cell.
struct LevelSystem {
    LevelDofs dofs;
    SparseMatrix matrix;
    std::vector<StencilField> cell_stencils;

    int level() const { return dofs.level(); }
};

LevelSystem assemble_level(const Problem& problem, int level);

/// Lumped load vector of a source f (zero on Dirichlet DoF).
Vector assemble_load(const Problem& problem, const LevelDofs& dofs, const std::function<double(const Vec3&)>& f);

}  // namespace mfilu
