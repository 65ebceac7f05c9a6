#include "dpg/geometry.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dpg {

CellGeometry CellGeometry::from_vertices(const MatrixXd& verts) {
    CellGeometry g;
    g.dim = static_cast<int>(verts.cols());
    require(verts.rows() == g.dim + 1, "CellGeometry: need dim+1 vertices");
    g.verts = verts;
    g.J.resize(g.dim, g.dim);
    for (int k = 0; k < g.dim; ++k) g.J.col(k) = (verts.row(k + 1) - verts.row(0)).transpose();
    g.det = g.J.determinant();
    require(std::abs(g.det) > 0.0, "CellGeometry: degenerate cell");
    g.Jinv = g.J.inverse();
    return g;
}

CellGeometry CellGeometry::of(const SimplicialMesh& mesh, int cell) {
    const int d = mesh.dim;
    MatrixXd v(d + 1, d);
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = mesh.vertices[mesh.cells[cell][i]](j);
    return from_vertices(v);
}

MatrixXd CellGeometry::map(const MatrixXd& ref) const {
    MatrixXd x = ref * J.transpose();
    x.rowwise() += verts.row(0);
    return x;
}

MatrixXd CellGeometry::to_reference(const MatrixXd& phys) const {
    MatrixXd y = phys;
    y.rowwise() -= verts.row(0);
    return y * Jinv.transpose();
}

double CellGeometry::volume() const { return std::abs(det) / (dim == 2 ? 2.0 : 6.0); }

double CellGeometry::diameter() const {
    double h = 0.0;
    for (int i = 0; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j) h = std::max(h, (verts.row(i) - verts.row(j)).norm());
    return h;
}

VectorXd CellGeometry::outward_normal(int i) const {
    // Gradient of barycentric coordinate i points into the cell, towards vertex i.
    VectorXd grad(dim);
    if (i == 0) {
        grad = -Jinv.transpose() * VectorXd::Ones(dim);
    } else {
        grad = Jinv.row(i - 1).transpose();
    }
    return -grad / grad.norm();
}

void pullback(Family f, const CellGeometry& g, const RefTables& ref, std::vector<MatrixXd>& val,
              std::vector<MatrixXd>& der) {
    const int d = g.dim;
    val.clear();
    der.clear();
    auto lin = [&](const MatrixXd& M, const std::vector<MatrixXd>& in, double s) {
        std::vector<MatrixXd> out;
        for (int i = 0; i < M.rows(); ++i) {
            MatrixXd acc = MatrixXd::Zero(in[0].rows(), in[0].cols());
            for (int j = 0; j < M.cols(); ++j)
                if (M(i, j) != 0.0) acc += (s * M(i, j)) * in[j];
            out.push_back(acc);
        }
        return out;
    };
    switch (f) {
        case Family::H1:
            val = ref.val;
            der = lin(g.Jinv.transpose(), ref.der, 1.0);
            break;
        case Family::Hcurl:
        case Family::HcurlFull:
            val = lin(g.Jinv.transpose(), ref.val, 1.0);
            if (d == 3) {
                der = lin(g.J, ref.der, 1.0 / g.det);
            } else {
                der = {ref.der[0] / g.det};
            }
            break;
        case Family::Hdiv:
            val = lin(g.J, ref.val, 1.0 / g.det);
            der = {ref.der[0] / g.det};
            break;
        case Family::L2:
            val = {ref.val[0] / g.det};
            break;
        case Family::L2Vec:
            val = ref.val;
            break;
    }
}

MatrixXd facet_reference_points(int dim, int local_facet, const QuadratureRule& rule) {
    auto ent = simplex_entities(dim, dim - 1)[facet_entity_index(dim, local_facet)];
    return entity_points(reference_vertices(dim), ent, rule.points);
}

namespace {

// Reference tables are shared across cells; key = (space, order, facet or -1, dual).
std::shared_ptr<const RefTables> cached_ref(const ReferenceSpace& sp, int order, int facet, bool dual) {
    static std::mutex mtx;
    static std::map<std::tuple<const ReferenceSpace*, int, int, bool>, std::shared_ptr<const RefTables>> cache;
    auto key = std::make_tuple(&sp, order, facet, dual);
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    MatrixXd pts = facet < 0 ? quadrature_rule(sp.dim, order).points
                             : facet_reference_points(sp.dim, facet, quadrature_rule(sp.dim - 1, order));
    auto t = std::make_shared<const RefTables>(dual ? sp.eval_dual(pts) : sp.eval(pts));
    std::lock_guard<std::mutex> lock(mtx);
    cache.emplace(key, t);
    return t;
}

}  // namespace

PhysTables cell_tables(const ReferenceSpace& sp, const CellGeometry& g, int order, bool dual) {
    require(sp.dim == g.dim, "cell_tables: dimension mismatch");
    const QuadratureRule& rule = quadrature_rule(g.dim, order);
    auto ref = cached_ref(sp, order, -1, dual);
    PhysTables t;
    t.npts = rule.size();
    t.n = ref->n;
    t.x = g.map(rule.points);
    t.w = rule.weights * std::abs(g.det);
    pullback(sp.family, g, *ref, t.val, t.der);
    return t;
}

PhysTables facet_tables(const ReferenceSpace& sp, const CellGeometry& g, int local_facet, int order, bool dual) {
    require(sp.dim == g.dim, "facet_tables: dimension mismatch");
    const int d = g.dim;
    const QuadratureRule& rule = quadrature_rule(d - 1, order);
    auto ref = cached_ref(sp, order, local_facet, dual);
    PhysTables t;
    t.npts = rule.size();
    t.n = ref->n;
    t.x = g.map(facet_reference_points(d, local_facet, rule));
    auto ent = simplex_entities(d, d - 1)[facet_entity_index(d, local_facet)];
    double scale;
    if (d == 2) {
        scale = (g.verts.row(ent[1]) - g.verts.row(ent[0])).norm();
    } else {
        Vec3 a = Vec3::Zero(), b = Vec3::Zero();
        a.head(3) = (g.verts.row(ent[1]) - g.verts.row(ent[0])).transpose();
        b.head(3) = (g.verts.row(ent[2]) - g.verts.row(ent[0])).transpose();
        scale = a.cross(b).norm();
    }
    t.w = rule.weights * scale;
    t.normal = g.outward_normal(local_facet);
    pullback(sp.family, g, *ref, t.val, t.der);
    return t;
}

}  // namespace dpg
