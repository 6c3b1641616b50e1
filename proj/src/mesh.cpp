#include "mfilu/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfilu {

std::string_view name(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::vertex: return "vertex";
        case PrimitiveType::edge: return "edge";
        case PrimitiveType::face: return "face";
        case PrimitiveType::cell: return "cell";
    }
    return "?";
}

namespace {

// Local vertex pairs/triples of the six edges and four faces of a cell.
constexpr std::array<std::array<int, 2>, 6> kCellEdges = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
constexpr std::array<std::array<int, 3>, 4> kCellFaces = {{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

template <std::size_t N>
std::array<int, N> sorted(std::array<int, N> a) {
    std::sort(a.begin(), a.end());
    return a;
}

}  // namespace

MacroMesh::MacroMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        for (int v : cells_[c]) {
            if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
                throw Error("cell " + std::to_string(c) + " references unknown vertex " + std::to_string(v));
        }
        auto s = sorted(cells_[c]);
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw Error("cell " + std::to_string(c) + " repeats a vertex");
        if (cell_tet(static_cast<int>(c)).volume() <= 1e-14)
            throw Error("cell " + std::to_string(c) + " is degenerate");
    }
    build_adjacency();
}

void MacroMesh::build_adjacency() {
    edges_.clear();
    faces_.clear();
    edge_lookup_.clear();
    face_lookup_.clear();
    cell_edges_.assign(cells_.size(), {});
    cell_faces_.assign(cells_.size(), {});
    face_cells_.clear();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& cv = cells_[c];
        for (std::size_t k = 0; k < 6; ++k) {
            const auto key = sorted(std::array<int, 2>{cv[static_cast<std::size_t>(kCellEdges[k][0])],
                                                       cv[static_cast<std::size_t>(kCellEdges[k][1])]});
            auto [it, inserted] = edge_lookup_.try_emplace(key, static_cast<int>(edges_.size()));
            if (inserted) edges_.push_back(key);
            cell_edges_[c][k] = it->second;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            const auto key = sorted(std::array<int, 3>{cv[static_cast<std::size_t>(kCellFaces[k][0])],
                                                       cv[static_cast<std::size_t>(kCellFaces[k][1])],
                                                       cv[static_cast<std::size_t>(kCellFaces[k][2])]});
            auto [it, inserted] = face_lookup_.try_emplace(key, static_cast<int>(faces_.size()));
            if (inserted) {
                faces_.push_back(key);
                face_cells_.push_back({static_cast<int>(c), -1});
            } else {
                auto& fc = face_cells_[static_cast<std::size_t>(it->second)];
                if (fc[1] != -1) throw Error("macro-face shared by more than two cells");
                fc[1] = static_cast<int>(c);
            }
            cell_faces_[c][k] = it->second;
        }
    }
    face_boundary_.assign(faces_.size(), BoundaryKind::interior);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (face_cells_[f][1] == -1) face_boundary_[f] = BoundaryKind::dirichlet;
    }
    update_dirichlet_closure();
}

void MacroMesh::update_dirichlet_closure() {
    dirichlet_vertex_.assign(vertices_.size(), 0);
    dirichlet_edge_.assign(edges_.size(), 0);
    dirichlet_face_.assign(faces_.size(), 0);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (face_boundary_[f] != BoundaryKind::dirichlet) continue;
        dirichlet_face_[f] = 1;
        const auto& fv = faces_[f];
        for (int k = 0; k < 3; ++k) {
            dirichlet_vertex_[static_cast<std::size_t>(fv[static_cast<std::size_t>(k)])] = 1;
            const int e = find_edge(fv[static_cast<std::size_t>(k)], fv[static_cast<std::size_t>((k + 1) % 3)]);
            dirichlet_edge_[static_cast<std::size_t>(e)] = 1;
        }
    }
}

std::size_t MacroMesh::num_primitives(PrimitiveType t) const {
    switch (t) {
        case PrimitiveType::vertex: return num_vertices();
        case PrimitiveType::edge: return num_edges();
        case PrimitiveType::face: return num_faces();
        case PrimitiveType::cell: return num_cells();
    }
    return 0;
}

MacroTet MacroMesh::cell_tet(int c) const {
    const auto& cv = cells_[static_cast<std::size_t>(c)];
    return MacroTet({vertex(cv[0]), vertex(cv[1]), vertex(cv[2]), vertex(cv[3])});
}

void MacroMesh::tag_face(std::array<int, 3> v, BoundaryKind kind) {
    const int f = find_face(v[0], v[1], v[2]);
    if (f < 0) throw Error("tagged face is not a macro-face");
    if (face_boundary_[static_cast<std::size_t>(f)] == BoundaryKind::interior || kind == BoundaryKind::interior)
        throw Error("only boundary faces can carry boundary tags");
    face_boundary_[static_cast<std::size_t>(f)] = kind;
    update_dirichlet_closure();
}

bool MacroMesh::is_dirichlet(PrimitiveType type, int i) const {
    const auto k = static_cast<std::size_t>(i);
    switch (type) {
        case PrimitiveType::vertex: return dirichlet_vertex_[k] != 0;
        case PrimitiveType::edge: return dirichlet_edge_[k] != 0;
        case PrimitiveType::face: return dirichlet_face_[k] != 0;
        case PrimitiveType::cell: return false;
    }
    return false;
}

void MacroMesh::reorient_cell(int c, const Permutation& pi) {
    auto& cv = cells_[static_cast<std::size_t>(c)];
    std::array<int, 4> out;
    for (std::size_t i = 0; i < 4; ++i) out[static_cast<std::size_t>(pi.map[i])] = cv[i];
    cv = out;
    // Edge and face ids are keyed by sorted vertex ids; only the local slots move.
    const auto boundary = face_boundary_;
    build_adjacency();
    face_boundary_ = boundary;
    update_dirichlet_closure();
}

int MacroMesh::find_edge(int a, int b) const {
    auto it = edge_lookup_.find(sorted(std::array<int, 2>{a, b}));
    return it == edge_lookup_.end() ? -1 : it->second;
}

int MacroMesh::find_face(int a, int b, int c) const {
    auto it = face_lookup_.find(sorted(std::array<int, 3>{a, b, c}));
    return it == face_lookup_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------

namespace meshes {

MacroTet shape(const std::string& name, double height) {
    if (name == "regular") {
        return MacroTet({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2, 0),
                         Vec3(0.5, std::sqrt(3.0) / 6, std::sqrt(2.0 / 3.0))});
    }
    if (name == "spindle") {
        return MacroTet({Vec3(0, 0, 0.5), Vec3(0, 0, -0.5), Vec3(0.5, 1, 0), Vec3(-0.5, 1, 0)});
    }
    if (name == "cap") {
        return MacroTet({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.866, 0), Vec3(0.5, 0.288, 0.093)});
    }
    if (name == "spade") {
        return MacroTet({Vec3(0, 0, 0), Vec3(1, -0.666, 0), Vec3(1, 0.666, 0), Vec3(1, 0, 0.443)});
    }
    if (name == "trirectangular") {
        return MacroTet({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
    }
    if (name == "distorted") {
        if (!(height > 0)) throw Error("distorted tetrahedron needs a positive height");
        return MacroTet({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, height)});
    }
    if (name == "shell") {
        // Three neighbouring icosahedron vertices on the outer sphere (r = 1)
        // and the first one projected onto the inner sphere (r = 0.9).
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const Vec3 a = Vec3(0, 1, phi).normalized();
        const Vec3 b = Vec3(0, -1, phi).normalized();
        const Vec3 c = Vec3(phi, 0, 1).normalized();
        return MacroTet({a, b, c, 0.9 * a});
    }
    throw Error("unknown builtin geometry '" + name + "'");
}

std::vector<std::string> shape_names() {
    return {"regular", "spindle", "cap", "spade", "trirectangular", "distorted", "shell"};
}

MacroMesh single_tet(const MacroTet& tet, BoundaryKind boundary) {
    std::vector<Vec3> v(tet.vertices().begin(), tet.vertices().end());
    MacroMesh mesh(std::move(v), {{0, 1, 2, 3}});
    if (boundary != BoundaryKind::dirichlet) mesh.tag_boundary(boundary, [](const Vec3&) { return true; });
    return mesh;
}

MacroMesh split_cube(double h_lower) {
    if (!(h_lower > 0 && h_lower < 1)) throw Error("h_lower must lie in (0, 1)");
    const std::array<double, 3> heights = {0.0, h_lower, 1.0};
    std::vector<Vec3> v;
    for (double z : heights)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) v.emplace_back(x, y, z);
    auto id = [](int x, int y, int k) { return 4 * k + 2 * y + x; };
    std::vector<std::array<int, 4>> cells;
    // Kuhn split of each box along its main diagonal.
    const std::array<std::array<int, 3>, 6> orders = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int k = 0; k < 2; ++k) {
        for (const auto& order : orders) {
            std::array<int, 3> pos{0, 0, 0};
            std::array<int, 4> cell;
            cell[0] = id(0, 0, k);
            for (std::size_t s = 0; s < 3; ++s) {
                pos[static_cast<std::size_t>(order[s])] = 1;
                cell[s + 1] = id(pos[0], pos[1], k + pos[2]);
            }
            cells.push_back(cell);
        }
    }
    MacroMesh mesh(std::move(v), std::move(cells));
    mesh.tag_boundary(BoundaryKind::neumann, [](const Vec3& c) { return c.z() > 1e-12 && c.z() < 1 - 1e-12; });
    return mesh;
}

namespace {

std::string next_content_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    return {};
}

std::size_t read_header(std::istream& in, const std::string& keyword, bool optional) {
    const std::streampos pos = in.tellg();
    const std::string line = next_content_line(in);
    std::istringstream ls(line);
    std::string word;
    std::size_t count = 0;
    if (!(ls >> word) || word != keyword || !(ls >> count)) {
        if (optional && line.empty()) return 0;
        if (optional && word != keyword) {
            in.clear();
            in.seekg(pos);
            return 0;
        }
        throw Error("mesh file: expected '" + keyword + " <count>'");
    }
    return count;
}

}  // namespace

MacroMesh read_mesh(std::istream& in) {
    const std::size_t nv = read_header(in, "vertices", false);
    std::vector<Vec3> vertices(nv);
    for (auto& p : vertices) {
        std::istringstream ls(next_content_line(in));
        if (!(ls >> p.x() >> p.y() >> p.z())) throw Error("mesh file: malformed vertex line");
    }
    const std::size_t nc = read_header(in, "cells", false);
    std::vector<std::array<int, 4>> cells(nc);
    for (auto& c : cells) {
        std::istringstream ls(next_content_line(in));
        if (!(ls >> c[0] >> c[1] >> c[2] >> c[3])) throw Error("mesh file: malformed cell line");
    }
    MacroMesh mesh(std::move(vertices), std::move(cells));
    const std::size_t nb = read_header(in, "boundary", true);
    for (std::size_t i = 0; i < nb; ++i) {
        std::istringstream ls(next_content_line(in));
        std::array<int, 3> f;
        std::string tag;
        if (!(ls >> f[0] >> f[1] >> f[2] >> tag)) throw Error("mesh file: malformed boundary line");
        if (tag == "D")
            mesh.tag_face(f, BoundaryKind::dirichlet);
        else if (tag == "N")
            mesh.tag_face(f, BoundaryKind::neumann);
        else
            throw Error("mesh file: boundary tag must be D or N");
    }
    return mesh;
}

MacroMesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const MacroMesh& mesh) {
    out.precision(17);
    out << "vertices " << mesh.num_vertices() << "\n";
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const auto& p = mesh.vertex(static_cast<int>(v));
        out << p.x() << " " << p.y() << " " << p.z() << "\n";
    }
    out << "cells " << mesh.num_cells() << "\n";
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto& cv = mesh.cell_vertices(static_cast<int>(c));
        out << cv[0] << " " << cv[1] << " " << cv[2] << " " << cv[3] << "\n";
    }
    std::vector<int> boundary;
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        if (mesh.face_boundary(static_cast<int>(f)) != BoundaryKind::interior) boundary.push_back(static_cast<int>(f));
    }
    out << "boundary " << boundary.size() << "\n";
    for (int f : boundary) {
        const auto& fv = mesh.face_vertices(f);
        out << fv[0] << " " << fv[1] << " " << fv[2] << " "
            << (mesh.face_boundary(f) == BoundaryKind::dirichlet ? "D" : "N") << "\n";
    }
}

}  // namespace meshes

}  // namespace mfilu
