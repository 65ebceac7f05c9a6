#include "dpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dpg {

Domain parse_domain(const std::string& name) {
    if (name == "unit-square") return Domain::UnitSquare;
    if (name == "unit-cube") return Domain::UnitCube;
    if (name == "l-shape") return Domain::LShape;
    fail("unknown domain '" + name + "'");
}

std::string domain_name(Domain d) {
    switch (d) {
        case Domain::UnitSquare: return "unit-square";
        case Domain::UnitCube: return "unit-cube";
        case Domain::LShape: return "l-shape";
    }
    return "?";
}

namespace {

struct KeyHash {
    size_t operator()(const std::array<int, 3>& k) const {
        size_t h = static_cast<size_t>(k[0]) * 1000003u;
        h ^= static_cast<size_t>(k[1]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= static_cast<size_t>(k[2]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }
};

Vec3 facet_normal(const SimplicialMesh& m, const std::array<int, 3>& v) {
    if (m.dim == 2) {
        Vec3 t = m.vertices[v[1]] - m.vertices[v[0]];
        return Vec3(t.y(), -t.x(), 0.0);
    }
    return (m.vertices[v[1]] - m.vertices[v[0]]).cross(m.vertices[v[2]] - m.vertices[v[0]]);
}

}  // namespace

void facet_topology(SimplicialMesh& mesh) {
    const int d = mesh.dim;
    mesh.facets.clear();
    mesh.cell_facets.assign(mesh.cells.size(), {-1, -1, -1, -1});
    std::unordered_map<std::array<int, 3>, int, KeyHash> index;
    index.reserve(mesh.cells.size() * (d + 1));
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto& cv = mesh.cells[c];
        for (int lf = 0; lf <= d; ++lf) {
            std::array<int, 3> key{-1, -1, -1};
            int k = 0;
            for (int i = 0; i <= d; ++i)
                if (i != lf) key[k++] = cv[i];
            auto it = index.find(key);
            if (it == index.end()) {
                Facet f;
                f.v = key;
                f.cell[0] = c;
                f.local[0] = lf;
                index.emplace(key, mesh.num_facets());
                mesh.cell_facets[c][lf] = mesh.num_facets();
                mesh.facets.push_back(f);
            } else {
                Facet& f = mesh.facets[it->second];
                if (f.cell[1] >= 0) fail("facet_topology: non-manifold facet shared by more than two cells");
                f.cell[1] = c;
                f.local[1] = lf;
                mesh.cell_facets[c][lf] = it->second;
            }
        }
    }
    for (auto& f : mesh.facets) {
        Vec3 nu = facet_normal(mesh, f.v);
        Vec3 centroid = Vec3::Zero();
        for (int i = 0; i < d; ++i) centroid += mesh.vertices[f.v[i]];
        centroid /= d;
        for (int s = 0; s < 2; ++s) {
            if (f.cell[s] < 0) continue;
            const Vec3& opp = mesh.vertices[mesh.cells[f.cell[s]][f.local[s]]];
            f.sign[s] = nu.dot(centroid - opp) > 0 ? 1 : -1;
        }
    }
}

SimplicialMesh make_mesh(int dim, std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells,
                         int default_tag) {
    require(dim == 2 || dim == 3, "make_mesh: dimension must be 2 or 3");
    SimplicialMesh m;
    m.dim = dim;
    m.vertices = std::move(vertices);
    m.cells = std::move(cells);
    for (auto& c : m.cells) {
        for (int i = dim + 1; i < 4; ++i) c[i] = -1;
        std::sort(c.begin(), c.begin() + dim + 1);
        for (int i = 0; i <= dim; ++i)
            require(c[i] >= 0 && c[i] < m.num_vertices(), "make_mesh: vertex id out of range");
    }
    m.parent.assign(m.cells.size(), -1);
    facet_topology(m);
    for (int f = 0; f < m.num_facets(); ++f)
        if (m.facets[f].boundary()) m.boundary_tags[f] = default_tag;
    for (int c = 0; c < m.num_cells(); ++c)
        if (cell_volume(m, c) <= 0.0) fail("make_mesh: degenerate cell " + std::to_string(c));
    return m;
}

double signed_volume(const SimplicialMesh& m, int c) {
    const auto& v = m.cells[c];
    const Vec3& x0 = m.vertices[v[0]];
    if (m.dim == 2) {
        Vec3 a = m.vertices[v[1]] - x0, b = m.vertices[v[2]] - x0;
        return 0.5 * (a.x() * b.y() - a.y() * b.x());
    }
    Vec3 a = m.vertices[v[1]] - x0, b = m.vertices[v[2]] - x0, e = m.vertices[v[3]] - x0;
    return a.dot(b.cross(e)) / 6.0;
}

double cell_volume(const SimplicialMesh& m, int c) { return std::abs(signed_volume(m, c)); }

double cell_diameter(const SimplicialMesh& m, int c) {
    double h = 0.0;
    for (int i = 0; i <= m.dim; ++i)
        for (int j = i + 1; j <= m.dim; ++j)
            h = std::max(h, (m.vertices[m.cells[c][i]] - m.vertices[m.cells[c][j]]).norm());
    return h;
}

double facet_measure(const SimplicialMesh& m, int f) {
    const auto& v = m.facets[f].v;
    if (m.dim == 2) return (m.vertices[v[1]] - m.vertices[v[0]]).norm();
    return 0.5 * (m.vertices[v[1]] - m.vertices[v[0]]).cross(m.vertices[v[2]] - m.vertices[v[0]]).norm();
}

double max_diameter(const SimplicialMesh& m) {
    double h = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) h = std::max(h, cell_diameter(m, c));
    return h;
}

double shape_regularity(const SimplicialMesh& m) {
    double worst = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        double vol = cell_volume(m, c);
        double diam = cell_diameter(m, c);
        if (vol <= 1e-14 * std::pow(diam, m.dim)) fail("shape_regularity: degenerate cell " + std::to_string(c));
        double surface = 0.0;
        for (int lf = 0; lf <= m.dim; ++lf) {
            std::array<int, 3> v{};
            int k = 0;
            for (int i = 0; i <= m.dim; ++i)
                if (i != lf) v[k++] = m.cells[c][i];
            if (m.dim == 2)
                surface += (m.vertices[v[1]] - m.vertices[v[0]]).norm();
            else
                surface += 0.5 * (m.vertices[v[1]] - m.vertices[v[0]])
                                     .cross(m.vertices[v[2]] - m.vertices[v[0]])
                                     .norm();
        }
        double inradius = m.dim * vol / surface;
        worst = std::max(worst, diam / inradius);
    }
    return worst;
}

namespace {

bool point_on_facet(const SimplicialMesh& m, const Facet& f, const Vec3& p, double tol) {
    const Vec3& a = m.vertices[f.v[0]];
    if (m.dim == 2) {
        Vec3 t = m.vertices[f.v[1]] - a, r = p - a;
        double l2 = t.squaredNorm();
        double cr = t.x() * r.y() - t.y() * r.x();
        double s = t.dot(r);
        return std::abs(cr) <= tol * l2 && s >= -tol * l2 && s <= (1 + tol) * l2;
    }
    Vec3 t1 = m.vertices[f.v[1]] - a, t2 = m.vertices[f.v[2]] - a, r = p - a;
    Vec3 nu = t1.cross(t2);
    double area2 = nu.norm();
    if (std::abs(nu.dot(r)) > tol * area2 * std::sqrt(area2)) return false;
    Eigen::Matrix2d g;
    g << t1.dot(t1), t1.dot(t2), t1.dot(t2), t2.dot(t2);
    Eigen::Vector2d b = g.ldlt().solve(Eigen::Vector2d(t1.dot(r), t2.dot(r)));
    return b(0) >= -tol && b(1) >= -tol && b(0) + b(1) <= 1 + tol;
}

}  // namespace

std::string check_conformity(const SimplicialMesh& mesh) {
    SimplicialMesh m = mesh;
    try {
        facet_topology(m);
    } catch (const Error& e) {
        return e.what();
    }
    for (int c = 0; c < m.num_cells(); ++c) {
        double diam = cell_diameter(m, c);
        if (cell_volume(m, c) <= 1e-14 * std::pow(diam, m.dim)) return "degenerate cell " + std::to_string(c);
        for (int i = 0; i < m.dim; ++i)
            if (m.cells[c][i] >= m.cells[c][i + 1]) return "cell vertices not ascending in cell " + std::to_string(c);
    }
    // A hanging vertex sits on a facet that has only one incident cell.
    for (const auto& f : m.facets) {
        if (!f.boundary()) continue;
        Vec3 lo = m.vertices[f.v[0]], hi = lo;
        for (int i = 1; i < m.dim; ++i) {
            lo = lo.cwiseMin(m.vertices[f.v[i]]);
            hi = hi.cwiseMax(m.vertices[f.v[i]]);
        }
        double tolbox = 1e-12 * (hi - lo).norm();
        for (int v = 0; v < m.num_vertices(); ++v) {
            if (v == f.v[0] || v == f.v[1] || (m.dim == 3 && v == f.v[2])) continue;
            const Vec3& p = m.vertices[v];
            if ((p.array() < lo.array() - tolbox).any() || (p.array() > hi.array() + tolbox).any()) continue;
            if (point_on_facet(m, f, p, 1e-10)) return "hanging vertex " + std::to_string(v);
        }
    }
    return {};
}

SimplicialMesh build_structured(Domain domain, int n, int dim) {
    require(n >= 1, "build_structured: n must be at least 1");
    int natural = domain == Domain::UnitCube ? 3 : 2;
    if (dim != 0 && dim != natural)
        fail("build_structured: " + domain_name(domain) + " is not available in " + std::to_string(dim) + "D");
    std::vector<Vec3> verts;
    std::vector<std::array<int, 4>> cells;
    if (domain == Domain::UnitSquare || domain == Domain::LShape) {
        int m = domain == Domain::UnitSquare ? n : 2 * n;
        std::vector<int> id((m + 1) * (m + 1), -1);
        auto keep = [&](int i, int j) { return domain == Domain::UnitSquare || i < n || j < n; };
        auto vid = [&](int i, int j) {
            int& r = id[j * (m + 1) + i];
            if (r < 0) {
                r = static_cast<int>(verts.size());
                verts.emplace_back(double(i) / m, double(j) / m, 0.0);
            }
            return r;
        };
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                if (!keep(i, j)) continue;
                int a = vid(i, j), b = vid(i + 1, j), c = vid(i, j + 1), e = vid(i + 1, j + 1);
                cells.push_back({a, b, e, -1});
                cells.push_back({a, c, e, -1});
            }
        return make_mesh(2, std::move(verts), std::move(cells));
    }
    // Unit cube: 5 tetrahedra per grid cube. The even-parity corners of every cube
    // form the interior tetrahedron, so face diagonals agree between neighbours.
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) verts.emplace_back(double(i) / n, double(j) / n, double(k) / n);
    auto vid = [&](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                std::array<int, 4> even{};
                int ne = 0;
                for (int c = 0; c < 8; ++c) {
                    int a = c & 1, b = (c >> 1) & 1, e = (c >> 2) & 1;
                    if ((i + a + j + b + k + e) % 2 == 0) even[ne++] = vid(i + a, j + b, k + e);
                }
                cells.push_back(even);
                for (int c = 0; c < 8; ++c) {
                    int a = c & 1, b = (c >> 1) & 1, e = (c >> 2) & 1;
                    if ((i + a + j + b + k + e) % 2 == 0) continue;
                    cells.push_back({vid(i + a, j + b, k + e), vid(i + (1 - a), j + b, k + e),
                                     vid(i + a, j + (1 - b), k + e), vid(i + a, j + b, k + (1 - e))});
                }
            }
    return make_mesh(3, std::move(verts), std::move(cells));
}

}  // namespace dpg
