#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpg/common.hpp"

namespace dpg {

enum class Domain { UnitSquare, UnitCube, LShape };

Domain parse_domain(const std::string& name);
std::string domain_name(Domain d);

/// One facet with its (at most two) incident cells.
struct Facet {
    std::array<int, 3> v{-1, -1, -1};  ///< ascending vertex ids, first `dim` entries used
    std::array<int, 2> cell{-1, -1};   ///< owner, neighbor (-1 on the boundary)
    std::array<int, 2> local{-1, -1};  ///< local facet index (opposite local vertex) per side
    std::array<int, 2> sign{0, 0};     ///< +1 if the side's outward normal matches the facet normal

    bool boundary() const { return cell[1] < 0; }
};

/// Conforming simplicial mesh. Cells store vertex ids in ascending order.
struct SimplicialMesh {
    int dim = 2;
    std::vector<Vec3> vertices;                   ///< z = 0 in 2D
    std::vector<std::array<int, 4>> cells;        ///< first dim+1 entries used
    std::vector<Facet> facets;
    std::vector<std::array<int, 4>> cell_facets;  ///< facet id per local facet index
    std::map<int, int> boundary_tags;             ///< facet id -> tag
    std::vector<int> parent;                      ///< parent cell in the previous mesh, -1 at the root
    std::vector<std::array<int, 2>> refinement_edge;  ///< 2D bisection edge per cell; empty: longest edge

    int num_cells() const { return static_cast<int>(cells.size()); }
    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_facets() const { return static_cast<int>(facets.size()); }
    int nv_cell() const { return dim + 1; }
};

/// Sorts cell vertices, builds the facet topology and tags boundary facets with `default_tag`.
SimplicialMesh make_mesh(int dim, std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells,
                         int default_tag = 1);

/// `dim` = 0 selects the domain's natural dimension; a mismatching dim is rejected.
SimplicialMesh build_structured(Domain domain, int n, int dim = 0);
SimplicialMesh refine_uniform(const SimplicialMesh& mesh);
SimplicialMesh refine_marked(const SimplicialMesh& mesh, const std::set<int>& marked);

/// Rebuilds facets, cell_facets and orientation signs; throws on non-manifold facets.
void facet_topology(SimplicialMesh& mesh);

/// Signed measure of a cell with vertices taken in stored (ascending) order.
double signed_volume(const SimplicialMesh& mesh, int cell);
double cell_volume(const SimplicialMesh& mesh, int cell);
double cell_diameter(const SimplicialMesh& mesh, int cell);
double facet_measure(const SimplicialMesh& mesh, int facet);
double max_diameter(const SimplicialMesh& mesh);

/// Max over cells of diameter / inradius.
double shape_regularity(const SimplicialMesh& mesh);

/// Empty string when the mesh is conforming, else a description of the first defect.
std::string check_conformity(const SimplicialMesh& mesh);

void write_mesh(std::ostream& os, const SimplicialMesh& mesh);
SimplicialMesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const SimplicialMesh& mesh);
SimplicialMesh read_mesh_file(const std::string& path);

}  // namespace dpg
