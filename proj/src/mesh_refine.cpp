#include <algorithm>
#include <cmath>
#include <map>

#include "dpg/mesh.hpp"

namespace dpg {

namespace {

using Edge = std::pair<int, int>;

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct MidpointTable {
    std::vector<Vec3>& verts;
    std::map<Edge, int> mid;
    int get(int a, int b) {
        Edge e = make_edge(a, b);
        auto it = mid.find(e);
        if (it != mid.end()) return it->second;
        int id = static_cast<int>(verts.size());
        verts.push_back(0.5 * (verts[a] + verts[b]));
        mid.emplace(e, id);
        return id;
    }
};

std::array<int, 4> sorted_cell(std::array<int, 4> c, int dim) {
    for (int i = dim + 1; i < 4; ++i) c[i] = -1;
    std::sort(c.begin(), c.begin() + dim + 1);
    return c;
}

bool facet_contains(const SimplicialMesh& m, const Facet& f, const Vec3& p) {
    const Vec3& a = m.vertices[f.v[0]];
    if (m.dim == 2) {
        Vec3 t = m.vertices[f.v[1]] - a, r = p - a;
        double l2 = t.squaredNorm();
        return std::abs(t.x() * r.y() - t.y() * r.x()) <= 1e-10 * l2 && t.dot(r) >= -1e-10 * l2 &&
               t.dot(r) <= (1 + 1e-10) * l2;
    }
    Vec3 t1 = m.vertices[f.v[1]] - a, t2 = m.vertices[f.v[2]] - a, r = p - a;
    Vec3 nu = t1.cross(t2);
    if (std::abs(nu.dot(r)) > 1e-10 * std::pow(nu.norm(), 1.5)) return false;
    Eigen::Matrix2d g;
    g << t1.dot(t1), t1.dot(t2), t1.dot(t2), t2.dot(t2);
    Eigen::Vector2d b = g.ldlt().solve(Eigen::Vector2d(t1.dot(r), t2.dot(r)));
    return b(0) >= -1e-10 && b(1) >= -1e-10 && b(0) + b(1) <= 1 + 1e-10;
}

// Child boundary facets inherit the tag of the parent boundary facet containing them.
void inherit_tags(const SimplicialMesh& old, SimplicialMesh& fresh) {
    fresh.boundary_tags.clear();
    for (int f = 0; f < fresh.num_facets(); ++f) {
        const Facet& fc = fresh.facets[f];
        if (!fc.boundary()) continue;
        Vec3 centroid = Vec3::Zero();
        for (int i = 0; i < fresh.dim; ++i) centroid += fresh.vertices[fc.v[i]];
        centroid /= fresh.dim;
        int tag = 1;
        int p = fresh.parent[fc.cell[0]];
        if (p >= 0) {
            for (int lf = 0; lf <= old.dim; ++lf) {
                int of = old.cell_facets[p][lf];
                auto it = old.boundary_tags.find(of);
                if (it == old.boundary_tags.end()) continue;
                if (facet_contains(old, old.facets[of], centroid)) {
                    tag = it->second;
                    break;
                }
            }
        }
        fresh.boundary_tags[f] = tag;
    }
}

SimplicialMesh finish(const SimplicialMesh& old, std::vector<Vec3> verts, std::vector<std::array<int, 4>> cells,
                      std::vector<int> parent) {
    SimplicialMesh m;
    m.dim = old.dim;
    m.vertices = std::move(verts);
    m.cells = std::move(cells);
    m.parent = std::move(parent);
    facet_topology(m);
    inherit_tags(old, m);
    return m;
}

}  // namespace

SimplicialMesh refine_uniform(const SimplicialMesh& mesh) {
    const int d = mesh.dim;
    std::vector<Vec3> verts = mesh.vertices;
    MidpointTable mids{verts, {}};
    std::vector<std::array<int, 4>> cells;
    std::vector<int> parent;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto& v = mesh.cells[c];
        auto push = [&](std::array<int, 4> child) {
            cells.push_back(sorted_cell(child, d));
            parent.push_back(c);
        };
        if (d == 2) {
            int m01 = mids.get(v[0], v[1]), m02 = mids.get(v[0], v[2]), m12 = mids.get(v[1], v[2]);
            push({v[0], m01, m02, -1});
            push({m01, v[1], m12, -1});
            push({m02, m12, v[2], -1});
            push({m01, m12, m02, -1});
            continue;
        }
        int m[4][4];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) m[i][j] = m[j][i] = mids.get(v[i], v[j]);
        push({v[0], m[0][1], m[0][2], m[0][3]});
        push({m[0][1], v[1], m[1][2], m[1][3]});
        push({m[0][2], m[1][2], v[2], m[2][3]});
        push({m[0][3], m[1][3], m[2][3], v[3]});
        // Interior octahedron: split along its shortest diagonal (i,j)-(k,l).
        const int diag[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
        int best = 0;
        double best_len = 0.0;
        for (int t = 0; t < 3; ++t) {
            const int* q = diag[t];
            double len = (verts[m[q[0]][q[1]]] - verts[m[q[2]][q[3]]]).squaredNorm();
            if (t == 0 || len < best_len * (1 - 1e-12)) {
                best = t;
                best_len = len;
            }
        }
        const int i = diag[best][0], j = diag[best][1], k = diag[best][2], l = diag[best][3];
        int a = m[i][j], b = m[k][l];
        int ring[4] = {m[i][k], m[i][l], m[j][l], m[j][k]};
        for (int r = 0; r < 4; ++r) push({a, b, ring[r], ring[(r + 1) % 4]});
    }
    return finish(mesh, std::move(verts), std::move(cells), std::move(parent));
}

SimplicialMesh refine_marked(const SimplicialMesh& mesh, const std::set<int>& marked) {
    for (int c : marked) require(c >= 0 && c < mesh.num_cells(), "refine_marked: cell id out of range");
    if (marked.empty()) return mesh;
    const int d = mesh.dim;
    std::vector<Vec3> verts = mesh.vertices;
    MidpointTable mids{verts, {}};
    std::vector<std::array<int, 4>> cells = mesh.cells;
    std::vector<int> ancestor(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) ancestor[c] = static_cast<int>(c);

    // Longest edge with ties broken by the smallest vertex pair.
    auto longest = [&](const std::array<int, 4>& c) {
        Edge best{-1, -1};
        double best_len = -1.0;
        for (int i = 0; i <= d; ++i)
            for (int j = i + 1; j <= d; ++j) {
                double len = (verts[c[i]] - verts[c[j]]).squaredNorm();
                Edge e = make_edge(c[i], c[j]);
                bool longer = len > best_len * (1 + 1e-12);
                bool tie = !longer && len >= best_len * (1 - 1e-12) && e < best;
                if (longer || tie) {
                    best = e;
                    best_len = std::max(len, best_len);
                }
            }
        return best;
    };
    auto has_marked = [&](const std::array<int, 4>& c, const std::set<Edge>& edges) {
        for (int i = 0; i <= d; ++i)
            for (int j = i + 1; j <= d; ++j)
                if (edges.count(make_edge(c[i], c[j]))) return true;
        return false;
    };

    // 2D cells bisect their stored edge (newest vertex bisection), 3D cells their longest edge.
    std::vector<Edge> redge(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
        const bool stored = d == 2 && mesh.refinement_edge.size() == cells.size();
        redge[c] = stored ? make_edge(mesh.refinement_edge[c][0], mesh.refinement_edge[c][1]) : longest(cells[c]);
    }

    std::set<Edge> edges;
    for (int c : marked) edges.insert(redge[c]);
    while (true) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t ci = 0; ci < cells.size(); ++ci)
                if (has_marked(cells[ci], edges) && edges.insert(redge[ci]).second) changed = true;
        }
        std::vector<std::array<int, 4>> next;
        std::vector<int> next_anc;
        std::vector<Edge> next_edge;
        bool any = false;
        for (size_t ci = 0; ci < cells.size(); ++ci) {
            const auto& c = cells[ci];
            if (!has_marked(c, edges)) {
                next.push_back(c);
                next_anc.push_back(ancestor[ci]);
                next_edge.push_back(redge[ci]);
                continue;
            }
            any = true;
            const Edge e = redge[ci];
            const int mid = mids.get(e.first, e.second);
            std::array<int, 4> c1 = c, c2 = c;
            int other = -1;
            for (int i = 0; i <= d; ++i) {
                if (c[i] == e.second) c1[i] = mid;
                if (c[i] == e.first) c2[i] = mid;
                if (c[i] != e.first && c[i] != e.second) other = c[i];
            }
            for (const auto& child : {c1, c2}) {
                const auto sc = sorted_cell(child, d);
                next.push_back(sc);
                next_anc.push_back(ancestor[ci]);
                next_edge.push_back(d == 2 ? make_edge(child == c1 ? e.first : e.second, other) : longest(sc));
            }
        }
        cells = std::move(next);
        ancestor = std::move(next_anc);
        redge = std::move(next_edge);
        if (!any) break;
        std::set<Edge> present;
        for (const auto& c : cells)
            for (int i = 0; i <= d; ++i)
                for (int j = i + 1; j <= d; ++j) {
                    Edge e = make_edge(c[i], c[j]);
                    if (edges.count(e)) present.insert(e);
                }
        edges = std::move(present);
        if (edges.empty()) break;
    }
    SimplicialMesh out = finish(mesh, std::move(verts), std::move(cells), std::move(ancestor));
    if (d == 2)
        for (const Edge& e : redge) out.refinement_edge.push_back({e.first, e.second});
    return out;
}

}  // namespace dpg
