#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfilu/assembly.hpp"
#include "mfilu/ilu.hpp"

namespace mfilu {

using Degrees = std::array<int, 3>;

/// Trivariate tensor-product polynomial of degrees (dg_x, dg_y, dg_z) over a
/// macro-tetrahedron refined to `level`. Each logical axis is mapped to
/// t = 2 h x - 1 in [-1, 1] (h = 2^-level) and expanded in Chebyshev
/// polynomials T_i(t_x) T_j(t_y) T_k(t_z).
class Polynomial3 {
public:
    Polynomial3() = default;
    Polynomial3(int level, Degrees degrees, std::vector<double> coefficients);
    static Polynomial3 zero(int level, Degrees degrees = {0, 0, 0});
    /// Builds the polynomial from monomial coefficients c_ijk of
    /// s_x^i s_y^j s_z^k with s = h x (physical coordinates of the unit frame).
    static Polynomial3 from_monomials(int level, Degrees degrees, const std::vector<double>& monomials);

    static std::size_t basis_size(Degrees d) {
        return static_cast<std::size_t>(d[0] + 1) * static_cast<std::size_t>(d[1] + 1) *
               static_cast<std::size_t>(d[2] + 1);
    }
    static double axis_coordinate(double x, int level) { return 2.0 * std::ldexp(x, -level) - 1.0; }

    int level() const { return level_; }
    const Degrees& degrees() const { return degrees_; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    double coefficient(int i, int j, int k) const { return coeffs_[flat(i, j, k)]; }

    /// Direct evaluation at a (possibly fractional) logical position.
    double operator()(double x, double y, double z) const;
    double operator()(LogicalCoord p) const { return (*this)(p.x, p.y, p.z); }

    /// Chebyshev coefficients in t_x of the restriction to the row (., y, z).
    std::vector<double> row_coefficients(int y, int z) const;

private:
    std::size_t flat(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(degrees_[0] + 1) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(degrees_[1] + 1) * static_cast<std::size_t>(k));
    }

    int level_ = 2;
    Degrees degrees_{0, 0, 0};
    std::vector<double> coeffs_{0.0};
};

/// Values of T_0..T_deg at t.
std::vector<double> chebyshev_values(int deg, double t);

/// Incremental evaluation of a polynomial along an equispaced lattice row
/// using the forward-difference table: one initial evaluation, then dg_x + 1
/// additions per point.
class NddfRow {
public:
    NddfRow() = default;
    /// Row (x0 + k step, y, z), k = 0, 1, ...
    NddfRow(const Polynomial3& poly, LogicalCoord start, int step = 1);

    double value() const { return table_[0]; }
    void advance() {
        for (std::size_t j = 0; j + 1 < table_.size(); ++j) table_[j] += table_[j + 1];
    }

private:
    std::vector<double> table_{0.0};
};

std::vector<double> nddf_row_evaluate(const Polynomial3& poly, LogicalCoord start, int count, int step = 1);

// ---------------------------------------------------------------------------
// Sampling and least squares.
// ---------------------------------------------------------------------------

/// Targets of the surrogate: the seven lower L directions, then 1/D_c.
inline constexpr std::size_t kNumTargets = kNumLower + 1;
inline constexpr std::size_t kInvDiagonal = kNumLower;
std::string_view target_name(std::size_t target);

struct SampleSet {
    Direction direction = Direction::c;
    int level = 2;
    int coarse_level = 2;
    int stride = 1;
    std::vector<LogicalCoord> points;
};

int sample_stride(int level, int coarse_level);

/// Points p of the interior with p + d interior and p + d - (1,1,1) a
/// multiple of the stride in every component (no shift for c).
SampleSet sample_set(Direction d, int level, int coarse_level);
bool in_sample_set(Direction d, LogicalCoord p, int level, int stride);

/// Least-squares problem on a fixed point set; the factorization is reused for
/// every right-hand side.
class LsqProblem {
public:
    /// With `allow_rank_deficient` the minimum-norm solution is returned for a
    /// rank-deficient design, otherwise solving throws.
    LsqProblem(std::span<const LogicalCoord> points, Degrees degrees, int level, bool allow_rank_deficient = false);
    ~LsqProblem();
    LsqProblem(LsqProblem&&) noexcept;
    LsqProblem& operator=(LsqProblem&&) noexcept;

    bool full_rank() const;
    int rank() const;
    std::size_t num_points() const { return num_points_; }
    Polynomial3 solve(std::span<const double> values, std::string_view label = {}) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t num_points_ = 0;
    Degrees degrees_;
    int level_;
};

/// Least-squares fit over the tensor Chebyshev basis by Householder QR.
/// Throws Error (mentioning `label`) for an empty or rank-deficient design.
Polynomial3 lsq_fit(std::span<const LogicalCoord> points, std::span<const double> values, Degrees degrees, int level,
                    std::string_view label = {});

/// Minimum-norm least-squares fit, defined for any design.
Polynomial3 lsq_fit_min_norm(std::span<const LogicalCoord> points, std::span<const double> values, Degrees degrees,
                             int level);

double lsq_residual(const Polynomial3& poly, std::span<const LogicalCoord> points, std::span<const double> values);

// ---------------------------------------------------------------------------
// Surrogate ILU.
// ---------------------------------------------------------------------------

enum class Variant { v1, v2 };
std::string_view name(Variant v);
Variant variant_from_name(std::string_view s);

/// Exact factors on the boundary band of the interior. Rows with y == 1 or
/// z == 1 are stored completely, every other row keeps its first and last
/// point, so the store holds O(h^-2) stencils.
class BandStore {
public:
    BandStore() = default;
    explicit BandStore(int level);

    bool full_row(int y, int z) const { return y == 1 || z == 1; }
    bool contains(LogicalCoord p) const;
    const LowerStencil& at(LogicalCoord p) const { return data_[slot(p)]; }
    void set(LogicalCoord p, const LowerStencil& f) { data_[slot(p)] = f; }
    std::size_t size() const { return data_.size(); }
    std::size_t bytes() const { return data_.size() * sizeof(LowerStencil) + row_start_.size() * sizeof(int); }

private:
    std::size_t slot(LogicalCoord p) const;
    int level_ = 0;
    int n_ = 0;
    std::vector<int> row_start_;  // per interior row (y, z)
    std::vector<LowerStencil> data_;
};

struct SurrogateOptions {
    Degrees degrees{2, 2, 2};
    Variant variant = Variant::v1;
    int coarse_level = -1;  // sampling level L_H; negative selects it automatically
};

class SurrogateILU {
public:
    int level = 2;
    Degrees degrees{0, 0, 0};
    Variant variant = Variant::v1;
    int coarse_level = 2;
    bool min_norm = false;  // true if the design stayed rank deficient on every sampling level
    std::array<Polynomial3, kNumTargets> polys;
    BandStore band;
    FactorizationStats stats;

    /// Stencil used by the substitution at p (band store or surrogate).
    LowerStencil evaluate(LogicalCoord p) const;
};

/// Smallest admissible sampling level >= max(2, level - 2) for which every
/// non-empty sample set gives a full-rank design; `level + 1` if none does.
int choose_coarse_level(int level, Degrees degrees);

SurrogateILU build_surrogate_ilu(const StencilSource& a, const SurrogateOptions& options);

/// Two sweeps over the rows of the interior: residual fused with forward
/// substitution, then diagonal scaling, backward substitution and update.
void surrogate_smooth(Eigen::Ref<Vector> u, const Vector& f, const SurrogateILU& sur, const StencilSource& a,
                      std::span<const int> map);

/// Stencil source whose 15 entries are polynomial surrogates fitted to a
/// reference source on the S_c sample set.
class SurrogateStencils final : public StencilSource {
public:
    SurrogateStencils(const StencilSource& reference, Degrees degrees, int coarse_level = -1);
    int level() const override { return level_; }
    Stencil15 at(LogicalCoord p) const override;

private:
    int level_;
    std::array<Polynomial3, kNumDirections> polys_;
};

}  // namespace mfilu
