#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mfilu/geometry.hpp"

namespace mfilu {

enum class BoundaryKind : std::uint8_t { interior, dirichlet, neumann };
enum class PrimitiveType : std::uint8_t { vertex, edge, face, cell };

std::string_view name(PrimitiveType t);

/// Unstructured macro-mesh of tetrahedra with derived edge and face
/// adjacency. Boundary faces default to Dirichlet.
class MacroMesh {
public:
    MacroMesh() = default;
    MacroMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells);

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_faces() const { return faces_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_primitives(PrimitiveType t) const;

    const Vec3& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const std::array<int, 4>& cell_vertices(int c) const { return cells_[static_cast<std::size_t>(c)]; }
    const std::array<int, 6>& cell_edges(int c) const { return cell_edges_[static_cast<std::size_t>(c)]; }
    const std::array<int, 4>& cell_faces(int c) const { return cell_faces_[static_cast<std::size_t>(c)]; }
    const std::array<int, 2>& edge_vertices(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    const std::array<int, 3>& face_vertices(int f) const { return faces_[static_cast<std::size_t>(f)]; }
    /// Cells adjacent to face f; the second entry is -1 on the boundary.
    const std::array<int, 2>& face_cells(int f) const { return face_cells_[static_cast<std::size_t>(f)]; }
    BoundaryKind face_boundary(int f) const { return face_boundary_[static_cast<std::size_t>(f)]; }

    MacroTet cell_tet(int c) const;

    /// Sets the boundary kind of a boundary face given by its vertices.
    void tag_face(std::array<int, 3> vertices, BoundaryKind kind);
    /// Tags every boundary face whose centroid satisfies `pred`.
    template <typename Pred>
    void tag_boundary(BoundaryKind kind, Pred&& pred) {
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (face_boundary_[f] == BoundaryKind::interior) continue;
            const auto& fv = faces_[f];
            const Vec3 centroid = (vertex(fv[0]) + vertex(fv[1]) + vertex(fv[2])) / 3.0;
            if (pred(centroid)) face_boundary_[f] = kind;
        }
        update_dirichlet_closure();
    }

    /// True if the primitive lies in the closure of a Dirichlet boundary face.
    bool is_dirichlet(PrimitiveType type, int index) const;

    /// Reorders the vertex list of cell c (changes only its logical frame).
    void reorient_cell(int c, const Permutation& pi);

    int find_edge(int a, int b) const;
    int find_face(int a, int b, int c) const;

private:
    void build_adjacency();
    void update_dirichlet_closure();

    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 4>> cells_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<std::array<int, 6>> cell_edges_;
    std::vector<std::array<int, 4>> cell_faces_;
    std::vector<std::array<int, 2>> face_cells_;
    std::vector<BoundaryKind> face_boundary_;
    std::map<std::array<int, 2>, int> edge_lookup_;
    std::map<std::array<int, 3>, int> face_lookup_;
    std::vector<char> dirichlet_vertex_, dirichlet_edge_, dirichlet_face_;
};

namespace meshes {

/// Builtin single-tetrahedron geometries: regular, spindle, cap, spade,
/// trirectangular, distorted (trirectangular with top vertex at `height`),
/// shell (thin tetrahedron under the outer surface of a spherical shell).
MacroTet shape(const std::string& name, double height = 0.1);
std::vector<std::string> shape_names();

MacroMesh single_tet(const MacroTet& tet, BoundaryKind boundary = BoundaryKind::dirichlet);

/// Unit cube split at z = h_lower into two boxes of six tetrahedra each.
/// Dirichlet on top and bottom, Neumann on the sides.
MacroMesh split_cube(double h_lower);

/// Plain-text mesh description:
///   vertices <n>      followed by n lines "x y z"
///   cells <m>         followed by m lines "a b c d" (0-based vertex ids)
///   boundary <k>      followed by k lines "a b c D|N"   (optional)
/// '#' starts a comment. Untagged boundary faces are Dirichlet.
MacroMesh read_mesh(std::istream& in);
MacroMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const MacroMesh& mesh);

}  // namespace meshes

}  // namespace mfilu
