#include "mfilu/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <Eigen/LU>

namespace mfilu {

namespace {

constexpr std::array<std::string_view, kNumDirections> kNames = {
    "w", "s", "se", "bnw", "bn", "bc", "be", "c", "e", "n", "nw", "tse", "ts", "tc", "tw"};

}  // namespace

std::string_view name(Direction d) { return kNames[index(d)]; }

Direction direction_from_name(std::string_view text) {
    for (std::size_t i = 0; i < kNumDirections; ++i) {
        if (kNames[i] == text) return static_cast<Direction>(i);
    }
    throw Error("unknown stencil direction '" + std::string(text) + "'");
}

Direction direction_from_offset(LogicalCoord o) {
    for (Direction d : kAllDirections) {
        if (offset(d) == o) return d;
    }
    throw Error("offset (" + std::to_string(o.x) + "," + std::to_string(o.y) + "," + std::to_string(o.z) +
                ") is not a stencil direction");
}

std::size_t grid_size(int level) { return tetrahedral_count(cells_per_edge(level)); }

std::size_t interior_size(int level) { return tetrahedral_count(cells_per_edge(level) - 4); }

bool in_grid(LogicalCoord p, int level) {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x + p.y + p.z <= cells_per_edge(level);
}

bool is_interior(LogicalCoord p, int level) {
    return p.x >= 1 && p.y >= 1 && p.z >= 1 && p.x + p.y + p.z < cells_per_edge(level);
}

bool in_boundary_band(LogicalCoord p, int level) {
    return is_interior(p, level) &&
           (p.x == 1 || p.y == 1 || p.z == 1 || p.x + p.y + p.z == cells_per_edge(level) - 1);
}

std::vector<LogicalCoord> enumerate_grid(int level, GridRegion region, int layer) {
    if (level < 2) throw Error("grid level must be >= 2, got " + std::to_string(level));
    const int n = cells_per_edge(level);
    std::vector<LogicalCoord> out;
    if (region == GridRegion::face_layer) {
        if (layer < 0 || layer > n) throw Error("face layer out of range");
        for (int y = 0; y <= n - layer; ++y)
            for (int x = 0; x <= n - layer - y; ++x) out.push_back({x, y, layer});
        return out;
    }
    out.reserve(region == GridRegion::interior ? interior_size(level) : grid_size(level));
    for (int z = 0; z <= n; ++z) {
        for (int y = 0; y <= n - z; ++y) {
            for (int x = 0; x <= n - z - y; ++x) {
                const LogicalCoord p{x, y, z};
                const bool interior = is_interior(p, level);
                if (region == GridRegion::full || (region == GridRegion::interior) == interior) out.push_back(p);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Permutation Permutation::parse(std::string_view text) {
    Permutation pi;
    int count = 0;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' || ch == ',') continue;
        if (ch < '1' || ch > '4' || count == 4) throw Error("invalid permutation '" + std::string(text) + "'");
        pi.map[static_cast<std::size_t>(count++)] = ch - '1';
    }
    if (count != 4 || !pi.is_valid()) throw Error("invalid permutation '" + std::string(text) + "'");
    return pi;
}

std::vector<Permutation> Permutation::all() {
    std::vector<Permutation> out;
    Permutation pi;
    do {
        out.push_back(pi);
    } while (std::next_permutation(pi.map.begin(), pi.map.end()));
    return out;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    for (int i = 0; i < 4; ++i) inv.map[static_cast<std::size_t>(map[static_cast<std::size_t>(i)])] = i;
    return inv;
}

Permutation Permutation::then(const Permutation& next) const {
    Permutation out;
    for (std::size_t i = 0; i < 4; ++i) out.map[i] = next.map[static_cast<std::size_t>(map[i])];
    return out;
}

bool Permutation::is_valid() const {
    std::array<int, 4> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    return sorted == std::array<int, 4>{0, 1, 2, 3};
}

std::string Permutation::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < 4; ++i) {
        if (i) s += ' ';
        s += static_cast<char>('1' + map[i]);
    }
    return s + ")";
}

// ---------------------------------------------------------------------------

double MacroTet::volume() const {
    Eigen::Matrix3d m;
    m << edge(1), edge(2), edge(3);
    return std::abs(m.determinant()) / 6.0;
}

Vec3 MacroTet::centroid() const {
    return 0.25 * (vertices_[0] + vertices_[1] + vertices_[2] + vertices_[3]);
}

Vec3 MacroTet::micro_vertex_position(LogicalCoord p, int level) const {
    if (!in_grid(p, level)) throw Error("logical coordinate outside the macro-tetrahedron grid");
    const double inv_n = 1.0 / cells_per_edge(level);
    return base() + inv_n * (p.x * edge(1) + p.y * edge(2) + p.z * edge(3));
}

MacroTet MacroTet::permuted(const Permutation& pi) const {
    std::array<Vec3, 4> v;
    for (std::size_t i = 0; i < 4; ++i) v[static_cast<std::size_t>(pi.map[i])] = vertices_[i];
    return MacroTet(v);
}

Eigen::Vector4d MacroTet::barycentric(const Vec3& x) const {
    Eigen::Matrix3d m;
    m << edge(1), edge(2), edge(3);
    const Vec3 local = m.partialPivLu().solve(x - base());
    return {1.0 - local.sum(), local.x(), local.y(), local.z()};
}

}  // namespace mfilu
