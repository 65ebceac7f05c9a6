#include "dpg/space.hpp"

#include <map>

namespace dpg {

MeshEntities build_entities(const SimplicialMesh& mesh) {
    MeshEntities me;
    const int d = mesh.dim;
    me.dim = d;
    std::array<std::map<std::vector<int>, int>, 4> ids;
    for (int e = 0; e <= d; ++e) {
        auto locals = simplex_entities(d, e);
        me.cell_entities[e].resize(mesh.num_cells());
        for (int c = 0; c < mesh.num_cells(); ++c) {
            for (const auto& loc : locals) {
                std::vector<int> key;
                for (int v : loc) key.push_back(mesh.cells[c][v]);
                auto [it, inserted] = ids[e].emplace(key, static_cast<int>(ids[e].size()));
                me.cell_entities[e][c].push_back(it->second);
            }
        }
        me.count[e] = static_cast<int>(ids[e].size());
        me.boundary[e].assign(me.count[e], 0);
    }
    // Sub-entities of boundary facets are on the boundary.
    for (const Facet& f : mesh.facets) {
        if (!f.boundary()) continue;
        std::vector<int> fv(f.v.begin(), f.v.begin() + d);
        for (int e = 0; e < d; ++e) {
            for (const auto& loc : simplex_entities(d - 1, e)) {
                std::vector<int> key;
                for (int v : loc) key.push_back(fv[v]);
                me.boundary[e][ids[e].at(key)] = 1;
            }
        }
    }
    return me;
}

DofLayout make_layout(const MeshEntities& me, std::shared_ptr<const ReferenceSpace> space, bool skeleton) {
    require(space->dim == me.dim, "make_layout: dimension mismatch");
    DofLayout L;
    L.space = space;
    L.skeleton = skeleton;
    const int d = me.dim;
    const int top = skeleton ? d - 1 : d;
    std::array<int, 4> offset{0, 0, 0, 0};
    int total = 0;
    for (int e = 0; e <= top; ++e) {
        offset[e] = total;
        total += me.count[e] * space->dofs_per_entity[e];
    }
    L.ndofs = total;
    L.on_boundary.assign(total, 0);
    const int ncells = static_cast<int>(me.cell_entities[0].size());
    L.cell_dofs.resize(ncells);
    for (int c = 0; c < ncells; ++c) {
        auto& dofs = L.cell_dofs[c];
        for (int e = 0; e <= top; ++e) {
            const int k = space->dofs_per_entity[e];
            for (int g : me.cell_entities[e][c]) {
                for (int j = 0; j < k; ++j) {
                    int id = offset[e] + g * k + j;
                    dofs.push_back(id);
                    if (e < d && me.boundary[e][g]) L.on_boundary[id] = 1;
                }
            }
        }
    }
    return L;
}

}  // namespace dpg
