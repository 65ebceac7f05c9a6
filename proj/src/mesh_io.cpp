#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpg/mesh.hpp"

namespace dpg {

void write_mesh(std::ostream& os, const SimplicialMesh& m) {
    os << "dpgmesh " << m.dim << ' ' << m.num_vertices() << ' ' << m.num_cells() << '\n';
    os << std::setprecision(17);
    for (const auto& v : m.vertices) {
        for (int i = 0; i < m.dim; ++i) os << (i ? " " : "") << v(i);
        os << '\n';
    }
    for (const auto& c : m.cells) {
        for (int i = 0; i <= m.dim; ++i) os << (i ? " " : "") << c[i];
        os << '\n';
    }
    for (const auto& [f, tag] : m.boundary_tags) {
        os << "tag";
        for (int i = 0; i < m.dim; ++i) os << ' ' << m.facets[f].v[i];
        os << ' ' << tag << '\n';
    }
}

SimplicialMesh read_mesh(std::istream& is) {
    std::string word;
    int dim = 0, nv = 0, nc = 0;
    if (!(is >> word >> dim >> nv >> nc) || word != "dpgmesh") fail("read_mesh: missing 'dpgmesh' header");
    require(dim == 2 || dim == 3, "read_mesh: dimension must be 2 or 3");
    require(nv >= 0 && nc >= 0, "read_mesh: negative counts");
    std::vector<Vec3> verts(nv, Vec3::Zero());
    for (auto& v : verts)
        for (int i = 0; i < dim; ++i)
            if (!(is >> v(i))) fail("read_mesh: truncated vertex list");
    std::vector<std::array<int, 4>> cells(nc, {-1, -1, -1, -1});
    for (auto& c : cells)
        for (int i = 0; i <= dim; ++i)
            if (!(is >> c[i])) fail("read_mesh: truncated cell list");
    SimplicialMesh m = make_mesh(dim, std::move(verts), std::move(cells));
    std::map<std::array<int, 3>, int> lookup;
    for (int f = 0; f < m.num_facets(); ++f) lookup[m.facets[f].v] = f;
    while (is >> word) {
        if (word != "tag") fail("read_mesh: unexpected token '" + word + "'");
        std::array<int, 3> key{-1, -1, -1};
        int tag = 0;
        for (int i = 0; i < dim; ++i) is >> key[i];
        if (!(is >> tag)) fail("read_mesh: truncated tag line");
        std::sort(key.begin(), key.begin() + dim);
        auto it = lookup.find(key);
        if (it == lookup.end() || !m.facets[it->second].boundary())
            fail("read_mesh: tag refers to a facet that is not on the boundary");
        m.boundary_tags[it->second] = tag;
    }
    return m;
}

void write_mesh_file(const std::string& path, const SimplicialMesh& m) {
    std::ofstream os(path);
    if (!os) fail("cannot open '" + path + "' for writing");
    write_mesh(os, m);
}

SimplicialMesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open '" + path + "'");
    return read_mesh(is);
}

}  // namespace dpg
