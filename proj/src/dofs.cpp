#include "mfilu/dofs.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace mfilu {

namespace {

// A micro-vertex is identified globally by its integer barycentric weights
// with respect to the global ids of the macro-vertices spanning its primitive.
using VertexKey = std::array<std::int64_t, 4>;

struct VertexKeyHash {
    std::size_t operator()(const VertexKey& k) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
        return h;
    }
};

}  // namespace

LevelDofs::LevelDofs(const MacroMesh& mesh, int level) : level_(level) {
    if (level < 2) throw Error("hybrid grid level must be >= 2");
    const int n = cells_per_edge(level);
    const auto points = enumerate_grid(level, GridRegion::full);

    std::unordered_map<VertexKey, int, VertexKeyHash> lookup;
    std::vector<PrimitiveRef> temp_primitive;
    cell_maps_.assign(mesh.num_cells(), std::vector<int>(points.size(), -1));

    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto& cv = mesh.cell_vertices(static_cast<int>(c));
        for (const auto& p : points) {
            const std::array<int, 4> weight = {n - p.x - p.y - p.z, p.x, p.y, p.z};
            std::array<std::pair<int, int>, 4> parts;
            int count = 0;
            for (std::size_t k = 0; k < 4; ++k) {
                if (weight[k] > 0) parts[static_cast<std::size_t>(count++)] = {cv[k], weight[k]};
            }
            std::sort(parts.begin(), parts.begin() + count);
            VertexKey key{-1, -1, -1, -1};
            for (int k = 0; k < count; ++k) {
                key[static_cast<std::size_t>(k)] =
                    (static_cast<std::int64_t>(parts[static_cast<std::size_t>(k)].first) << 32) |
                    parts[static_cast<std::size_t>(k)].second;
            }
            auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(temp_primitive.size()));
            if (inserted) {
                PrimitiveRef ref;
                switch (count) {
                    case 1: ref = {PrimitiveType::vertex, parts[0].first}; break;
                    case 2: ref = {PrimitiveType::edge, mesh.find_edge(parts[0].first, parts[1].first)}; break;
                    case 3:
                        ref = {PrimitiveType::face, mesh.find_face(parts[0].first, parts[1].first, parts[2].first)};
                        break;
                    default: ref = {PrimitiveType::cell, static_cast<int>(c)}; break;
                }
                temp_primitive.push_back(ref);
            }
            cell_maps_[c][grid_index(p, level)] = it->second;
        }
    }

    // Renumber primitive by primitive, keeping first-occurrence order inside.
    std::vector<int> order(temp_primitive.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& pa = temp_primitive[static_cast<std::size_t>(a)];
        const auto& pb = temp_primitive[static_cast<std::size_t>(b)];
        if (pa.type != pb.type) return pa.type < pb.type;
        return pa.index < pb.index;
    });
    std::vector<int> renumber(order.size());
    primitive_.resize(order.size());
    dirichlet_.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        renumber[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
        primitive_[i] = temp_primitive[static_cast<std::size_t>(order[i])];
        dirichlet_[i] = mesh.is_dirichlet(primitive_[i].type, primitive_[i].index) ? 1 : 0;
    }
    for (auto& map : cell_maps_)
        for (auto& id : map) id = renumber[static_cast<std::size_t>(id)];

    for (std::size_t t = 0; t < 4; ++t) {
        const auto type = static_cast<PrimitiveType>(t);
        auto& begin = primitive_begin_[t];
        begin.assign(mesh.num_primitives(type) + 1, 0);
        for (const auto& ref : primitive_)
            if (ref.type == type) ++begin[static_cast<std::size_t>(ref.index) + 1];
        // Offsets are global: shift by the first DoF of this type.
        int first = 0;
        while (first < size() && primitive_[static_cast<std::size_t>(first)].type < type) ++first;
        begin[0] = first;
        std::partial_sum(begin.begin(), begin.end(), begin.begin());
    }
    cell_offsets_.resize(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        cell_offsets_[c] = primitive_begin_[static_cast<std::size_t>(PrimitiveType::cell)][c];

    for (int i = 0; i < size(); ++i)
        if (is_interface(i) && !is_dirichlet(i)) free_interface_.push_back(i);
}

std::pair<int, int> LevelDofs::primitive_range(PrimitiveType type, int index) const {
    const auto& begin = primitive_begin_[static_cast<std::size_t>(type)];
    return {begin[static_cast<std::size_t>(index)], begin[static_cast<std::size_t>(index) + 1]};
}

}  // namespace mfilu
