#pragma once

#include <span>
#include <vector>

#include "mfilu/mesh.hpp"

namespace mfilu {

struct PrimitiveRef {
    PrimitiveType type = PrimitiveType::cell;
    int index = -1;
    friend bool operator==(const PrimitiveRef&, const PrimitiveRef&) = default;
};

/// Global numbering of the micro-vertices of a hybrid grid on one level.
///
/// Each micro-vertex belongs to exactly one macro-primitive (the one whose
/// relative interior contains it). DoF are numbered primitive by primitive:
/// vertices, edges, faces, then cells; the interior DoF of a cell are
/// contiguous and follow the cell's z-y-x lattice order. Every cell keeps a
/// map from its full lattice (including its ghost layer) to global ids.
class LevelDofs {
public:
    LevelDofs(const MacroMesh& mesh, int level);

    int level() const { return level_; }
    int size() const { return static_cast<int>(primitive_.size()); }
    std::size_t num_cells() const { return cell_maps_.size(); }

    /// Global ids of the full lattice of cell c, indexed by grid_index().
    std::span<const int> cell_map(int c) const { return cell_maps_[static_cast<std::size_t>(c)]; }
    int dof(int c, LogicalCoord p) const { return cell_map(c)[grid_index(p, level_)]; }

    /// First global id of the interior block of cell c.
    int cell_interior_offset(int c) const { return cell_offsets_[static_cast<std::size_t>(c)]; }

    const PrimitiveRef& primitive(int dof) const { return primitive_[static_cast<std::size_t>(dof)]; }
    bool is_dirichlet(int dof) const { return dirichlet_[static_cast<std::size_t>(dof)] != 0; }
    bool is_interface(int dof) const { return primitive(dof).type != PrimitiveType::cell; }
    const std::vector<char>& dirichlet_mask() const { return dirichlet_; }

    /// Half-open range [first, last) of the global ids owned by a primitive.
    std::pair<int, int> primitive_range(PrimitiveType type, int index) const;

    /// Free (non-Dirichlet) interface DoF in ascending order.
    const std::vector<int>& free_interface() const { return free_interface_; }

private:
    int level_;
    std::vector<std::vector<int>> cell_maps_;
    std::vector<int> cell_offsets_;
    std::vector<PrimitiveRef> primitive_;
    std::vector<char> dirichlet_;
    std::array<std::vector<int>, 4> primitive_begin_;  // per type, size count+1
    std::vector<int> free_interface_;
};

}  // namespace mfilu
