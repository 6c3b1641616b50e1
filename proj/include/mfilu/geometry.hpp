#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mfilu {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec3 = Eigen::Vector3d;

/// Integer position of a micro-vertex inside a refined macro-tetrahedron.
struct LogicalCoord {
    int x = 0;
    int y = 0;
    int z = 0;

    friend constexpr LogicalCoord operator+(LogicalCoord a, LogicalCoord b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr LogicalCoord operator-(LogicalCoord a, LogicalCoord b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr LogicalCoord operator-(LogicalCoord a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(LogicalCoord, LogicalCoord) = default;
};

/// Strict z-then-y-then-x ordering of the DoF inside a macro-tetrahedron.
constexpr bool precedes(LogicalCoord a, LogicalCoord b) {
    if (a.z != b.z) return a.z < b.z;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

// Stencil directions. The enumerator order is the order used by every
// stencil array in the library; the opposite of lower direction i is i + 8.
enum class Direction : std::uint8_t { w, s, se, bnw, bn, bc, be, c, e, n, nw, tse, ts, tc, tw };

inline constexpr std::size_t kNumDirections = 15;
inline constexpr std::size_t kNumLower = 7;

inline constexpr std::array<Direction, kNumDirections> kAllDirections = {
    Direction::w,  Direction::s,  Direction::se, Direction::bnw, Direction::bn,
    Direction::bc, Direction::be, Direction::c,  Direction::e,   Direction::n,
    Direction::nw, Direction::tse, Direction::ts, Direction::tc, Direction::tw};

/// The seven directions preceding the center under the DoF ordering.
inline constexpr std::array<Direction, kNumLower> kLowerDirections = {
    Direction::w, Direction::s, Direction::se, Direction::bnw, Direction::bn, Direction::bc, Direction::be};

constexpr std::size_t index(Direction d) { return static_cast<std::size_t>(d); }

constexpr Direction opposite(Direction d) {
    const std::size_t i = index(d);
    return static_cast<Direction>(i < kNumLower ? i + kNumLower + 1 : i > kNumLower ? i - kNumLower - 1 : i);
}

constexpr LogicalCoord offset(Direction d) {
    constexpr std::array<LogicalCoord, kNumDirections> table = {{
        {-1, 0, 0},   // w
        {0, -1, 0},   // s
        {1, -1, 0},   // se
        {-1, 1, -1},  // bnw
        {0, 1, -1},   // bn
        {0, 0, -1},   // bc
        {1, 0, -1},   // be
        {0, 0, 0},    // c
        {1, 0, 0},    // e
        {0, 1, 0},    // n
        {-1, 1, 0},   // nw
        {1, -1, 1},   // tse
        {0, -1, 1},   // ts
        {0, 0, 1},    // tc
        {-1, 0, 1},   // tw
    }};
    return table[index(d)];
}

constexpr bool is_lower(Direction d) { return index(d) < kNumLower; }

std::string_view name(Direction d);

/// Parses a direction name; throws Error for anything outside the 15 names.
Direction direction_from_name(std::string_view name);

/// Returns the direction whose offset equals `o`, throwing if there is none.
Direction direction_from_offset(LogicalCoord o);

// ---------------------------------------------------------------------------
// Logical grid of a macro-tetrahedron refined to `level`.
//
// Full grid:     x, y, z >= 0 and x + y + z <= 2^level
// Interior grid: x, y, z >= 1 and x + y + z <  2^level
// ---------------------------------------------------------------------------

constexpr int cells_per_edge(int level) { return 1 << level; }

/// Number of lattice points of the full grid with `n` intervals per edge.
constexpr std::size_t tetrahedral_count(long n) {
    return n < 0 ? 0 : static_cast<std::size_t>((n + 1) * (n + 2) * (n + 3) / 6);
}
constexpr std::size_t triangular_count(long m) { return m <= 0 ? 0 : static_cast<std::size_t>(m * (m + 1) / 2); }

std::size_t grid_size(int level);
std::size_t interior_size(int level);

bool in_grid(LogicalCoord p, int level);
bool is_interior(LogicalCoord p, int level);

/// An interior point adjacent to the boundary of the macro-tetrahedron.
bool in_boundary_band(LogicalCoord p, int level);

/// Rank of `p` in the z-y-x enumeration of the grid with `n` intervals per edge.
inline std::size_t lattice_index(LogicalCoord p, int n) {
    const long z = p.z, y = p.y, x = p.x;
    const long m = n + 1 - z;  // points per edge of layer z
    return tetrahedral_count(n) - tetrahedral_count(n - z) +
           static_cast<std::size_t>(y * m - y * (y - 1) / 2 + x);
}

inline std::size_t grid_index(LogicalCoord p, int level) { return lattice_index(p, cells_per_edge(level)); }

/// Rank of an interior point among the interior points of the grid.
inline std::size_t interior_index(LogicalCoord p, int level) {
    return lattice_index({p.x - 1, p.y - 1, p.z - 1}, cells_per_edge(level) - 4);
}

/// Index of (x, y) in a face layer triangle with `side` points per edge.
inline std::size_t triangle_index(int x, int y, int side) {
    return static_cast<std::size_t>(y) * side - static_cast<std::size_t>(y) * (y - 1) / 2 + x;
}

enum class GridRegion { full, interior, boundary, face_layer };

/// Lattice points of `region` in strictly increasing z-y-x order.
/// `layer` selects z for GridRegion::face_layer.
std::vector<LogicalCoord> enumerate_grid(int level, GridRegion region, int layer = 0);

/// Visits the interior points in DoF order (or reversed).
template <typename Fn>
void for_each_interior(int level, Fn&& fn, bool reverse = false) {
    const int n = cells_per_edge(level);
    if (!reverse) {
        for (int z = 1; z <= n - 3; ++z)
            for (int y = 1; y <= n - 2 - z; ++y)
                for (int x = 1; x <= n - 1 - y - z; ++x) fn(LogicalCoord{x, y, z});
    } else {
        for (int z = n - 3; z >= 1; --z)
            for (int y = n - 2 - z; y >= 1; --y)
                for (int x = n - 1 - y - z; x >= 1; --x) fn(LogicalCoord{x, y, z});
    }
}

// ---------------------------------------------------------------------------
// Macro-tetrahedron frames and vertex permutations.
// ---------------------------------------------------------------------------

/// Vertex permutation: vertex i moves to position `map[i]` (0-based) of the
/// permuted tetrahedron. Printed 1-based, e.g. "(2 3 4 1)".
struct Permutation {
    std::array<int, 4> map{0, 1, 2, 3};

    static Permutation identity() { return {}; }
    /// Accepts "2341", "2 3 4 1" or "(2 3 4 1)" (1-based).
    static Permutation parse(std::string_view text);
    /// All 24 permutations in lexicographic order of their 1-based notation.
    static std::vector<Permutation> all();

    Permutation inverse() const;
    Permutation then(const Permutation& next) const;  // apply *this first
    bool is_valid() const;
    std::string str() const;
    friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// A macro-tetrahedron with an ordered vertex list; the order fixes the
/// logical frame (base point = vertex 0, edge vectors d_i = v_i - v_0).
class MacroTet {
public:
    MacroTet() = default;
    explicit MacroTet(std::array<Vec3, 4> vertices) : vertices_(std::move(vertices)) {}

    const std::array<Vec3, 4>& vertices() const { return vertices_; }
    const Vec3& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const Vec3& base() const { return vertices_[0]; }
    Vec3 edge(int i) const { return vertices_[static_cast<std::size_t>(i)] - vertices_[0]; }

    double volume() const;
    Vec3 centroid() const;

    /// Position of the micro-vertex p on `level`; throws if p is outside the grid.
    Vec3 micro_vertex_position(LogicalCoord p, int level) const;

    MacroTet permuted(const Permutation& pi) const;

    /// Barycentric coordinates of a physical point.
    Eigen::Vector4d barycentric(const Vec3& x) const;

private:
    std::array<Vec3, 4> vertices_{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
};

/// Calls fn(std::array<LogicalCoord, 4>) for every micro-tetrahedron of the
/// uniformly refined macro-tetrahedron on `level` (8^level elements).
template <typename Fn>
void for_each_micro_tet(int level, Fn&& fn) {
    const int n = cells_per_edge(level);
    for (int z = 0; z < n; ++z) {
        for (int y = 0; y < n - z; ++y) {
            for (int x = 0; x < n - z - y; ++x) {
                const LogicalCoord p{x, y, z};
                fn(std::array<LogicalCoord, 4>{p, p + LogicalCoord{1, 0, 0}, p + LogicalCoord{0, 1, 0},
                                               p + LogicalCoord{0, 0, 1}});
                if (x + y + z > n - 2) continue;
                // Octahedron split along the (x, y+1, z)-(x+1, y, z+1) diagonal.
                const LogicalCoord d0 = p + LogicalCoord{0, 1, 0};
                const LogicalCoord d1 = p + LogicalCoord{1, 0, 1};
                const std::array<LogicalCoord, 4> ring = {p + LogicalCoord{1, 0, 0}, p + LogicalCoord{1, 1, 0},
                                                          p + LogicalCoord{0, 1, 1}, p + LogicalCoord{0, 0, 1}};
                for (int k = 0; k < 4; ++k) fn(std::array<LogicalCoord, 4>{d0, d1, ring[k], ring[(k + 1) % 4]});
                if (x + y + z > n - 3) continue;
                fn(std::array<LogicalCoord, 4>{p + LogicalCoord{1, 1, 0}, p + LogicalCoord{1, 0, 1},
                                               p + LogicalCoord{0, 1, 1}, p + LogicalCoord{1, 1, 1}});
            }
        }
    }
}

}  // namespace mfilu
