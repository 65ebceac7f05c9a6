#pragma once

#include <memory>

#include "dpg/basis.hpp"
#include "dpg/mesh.hpp"

namespace dpg {

/// Global numbering of vertices, edges, faces and cells of a mesh.
struct MeshEntities {
    int dim = 0;
    std::array<int, 4> count{0, 0, 0, 0};
    /// [e][cell] -> global ids of the cell's e-entities in local lexicographic order.
    std::array<std::vector<std::vector<int>>, 4> cell_entities;
    /// [e][id] -> entity lies on the domain boundary.
    std::array<std::vector<char>, 4> boundary;
};

MeshEntities build_entities(const SimplicialMesh& mesh);

/// Global degrees of freedom of one conforming space. With `skeleton` set, only the
/// dofs attached to vertices, edges and faces are kept (interface variables).
struct DofLayout {
    std::shared_ptr<const ReferenceSpace> space;
    bool skeleton = false;
    int ndofs = 0;
    std::vector<std::vector<int>> cell_dofs;  ///< local index -> global id
    std::vector<char> on_boundary;            ///< per global dof

    int nlocal() const { return skeleton ? space->nboundary : space->n; }
};

DofLayout make_layout(const MeshEntities& ents, std::shared_ptr<const ReferenceSpace> space, bool skeleton);

}  // namespace dpg
