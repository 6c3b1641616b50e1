#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "mfilu/assembly.hpp"

namespace mfilu {

/// L_d for the seven lower directions (unit diagonal implied) and D_c.
struct LowerStencil {
    std::array<double, kNumLower> l{};
    double d = 1.0;
    double inv_d = 1.0;

    double& at(Direction dir) { return l[index(dir)]; }
    double at(Direction dir) const { return l[index(dir)]; }
    static LowerStencil identity() { return {}; }
};

class PivotBreakdown : public Error {
public:
    PivotBreakdown(LogicalCoord p, double pivot);
    LogicalCoord where;
    double pivot;
};

/// Solves the eight ILU stencil equations at one point. `nb[k]` is the
/// factorized stencil at p + offset(kLowerDirections[k]); entries of `a`
/// pointing outside the interior must already be zero.
LowerStencil factor_step(const Stencil15& a, const std::array<const LowerStencil*, kNumLower>& nb,
                         LogicalCoord p = {});

/// Lower part of `a` with couplings to non-interior neighbours removed.
Stencil15 mask_to_interior(Stencil15 a, LogicalCoord p, int level);

/// The two face layers of the streaming factorization: `current` (beta) for
/// layer z and `previous` (gamma) for z - 1. Both cover the full layer
/// triangle; boundary entries stay at (L = 0, D = 1).
class FaceLayerPair {
public:
    explicit FaceLayerPair(int level);

    void begin_layer(int z);
    LowerStencil& current(int x, int y) { return beta_[triangle_index(x, y, side_)]; }
    const LowerStencil& current(int x, int y) const { return beta_[triangle_index(x, y, side_)]; }
    const LowerStencil& previous(int x, int y) const { return gamma_[triangle_index(x, y, side_ + 1)]; }

    /// Bytes held by the two layer buffers (capacity of the allocation).
    std::size_t bytes() const;

private:
    int n_;
    int side_ = 0;
    std::vector<LowerStencil> beta_;
    std::vector<LowerStencil> gamma_;
};

struct FactorizationStats {
    std::size_t layer_bytes = 0;  // peak size of the face-layer working set
    std::size_t store_bytes = 0;  // size of a retained factor store, if any
};

using FactorConsumer = std::function<void(LogicalCoord, const LowerStencil&)>;

/// Streams the factorization bottom-up through the z-layers, handing every
/// interior factor to `consumer` in DoF order. Nothing of the volume is kept.
FactorizationStats factorize_streaming(const StencilSource& a, const FactorConsumer& consumer);

/// Factor store over the full lattice of one macro-tetrahedron.
class ILUFactors {
public:
    ILUFactors() = default;
    explicit ILUFactors(int level);

    int level() const { return level_; }
    const LowerStencil& at(LogicalCoord p) const { return data_[grid_index(p, level_)]; }
    LowerStencil& at(LogicalCoord p) { return data_[grid_index(p, level_)]; }
    std::size_t bytes() const { return data_.size() * sizeof(LowerStencil); }
    bool empty() const { return data_.empty(); }

private:
    int level_ = 0;
    std::vector<LowerStencil> data_;
};

/// Matrix-based ILU(0): streaming factorization retained in a full store.
ILUFactors factorize_tet(const StencilSource& a, FactorizationStats* stats = nullptr);

/// u <- u + (L D L^T)^{-1} (f - A u) on the interior of one macro-tetrahedron.
/// `map` sends the cell lattice (grid_index) to entries of u and f.
void ilu_smooth(Eigen::Ref<Vector> u, const Vector& f, const ILUFactors& factors, const StencilSource& a,
                std::span<const int> map);

/// Symmetric Gauss-Seidel sweep (forward then backward) on the interior of
/// one macro-tetrahedron.
void sgs_cell_smooth(Eigen::Ref<Vector> u, const Vector& f, const StencilSource& a, std::span<const int> map);

/// Forward-only Gauss-Seidel sweep on the interior of one macro-tetrahedron.
void gs_cell_smooth(Eigen::Ref<Vector> u, const Vector& f, const StencilSource& a, std::span<const int> map,
                    bool backward = false);

}  // namespace mfilu
