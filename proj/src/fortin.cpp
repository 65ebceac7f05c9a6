#include <random>

#include "dpg/verify.hpp"

namespace dpg {

std::string fortin_name(FortinKind k) {
    switch (k) {
        case FortinKind::Grad: return "grad";
        case FortinKind::Curl: return "curl";
        case FortinKind::Div: return "div";
    }
    return "?";
}

namespace {

struct Face {
    MatrixXd x;   // physical points
    MatrixXd st;  // face parameters
    VectorXd w;
    Vec3 n;
    double jac = 0.0;  // |t1 x t2|
};

struct Tab {
    std::vector<MatrixXd> val, der;
};

/// Quadrature data and fixed test functions of one cell.
struct Data {
    CellGeometry g;
    MatrixXd vx;
    VectorXd vw;
    std::array<Face, 4> faces;
    double boundary_area = 0.0;
    std::vector<MatrixXd> volq;                // volume moment test functions
    std::array<MatrixXd, 4> fphi;              // per-face orthonormal scalar basis
    MatrixXd Uc;                               // div: P^c inside the stacked face basis
    std::array<std::vector<MatrixXd>, 4> fF;   // curl: vector test functions on each face
    VectorXd one;                              // grad: big-space coefficients of 1
    VectorXd raw_one;                          // grad: raw moments of 1
};

const Data& data_of(const FortinSystem& fs) { return *std::static_pointer_cast<const Data>(fs.probe); }

Tab tab(const ReferenceSpace& sp, const CellGeometry& g, const MatrixXd& x) {
    RefTables rt = sp.eval(g.to_reference(x));
    Tab t;
    if (sp.family == Family::L2 || sp.family == Family::L2Vec) {
        t.val = rt.val;  // moment test functions only need the span
        return t;
    }
    pullback(sp.family, g, rt, t.val, t.der);
    return t;
}

Family input_family(FortinKind k) {
    switch (k) {
        case FortinKind::Grad: return Family::H1;
        case FortinKind::Curl: return Family::HcurlFull;
        default: return Family::Hdiv;
    }
}

MatrixXd wdot(const MatrixXd& a, const VectorXd& w, const MatrixXd& b) { return a.transpose() * w.asDiagonal() * b; }

MatrixXd normal_part(const std::vector<MatrixXd>& v, const Vec3& n) { return n(0) * v[0] + n(1) * v[1] + n(2) * v[2]; }

std::vector<MatrixXd> ncross(const std::vector<MatrixXd>& e, const Vec3& n) {
    return {n(1) * e[2] - n(2) * e[1], n(2) * e[0] - n(0) * e[2], n(0) * e[1] - n(1) * e[0]};
}

MatrixXd vstack(const std::vector<MatrixXd>& blocks) {
    int rows = 0;
    const int cols = blocks.empty() ? 0 : static_cast<int>(blocks[0].cols());
    for (const auto& b : blocks) rows += static_cast<int>(b.rows());
    MatrixXd out(rows, cols);
    int r = 0;
    for (const auto& b : blocks) {
        out.middleRows(r, b.rows()) = b;
        r += static_cast<int>(b.rows());
    }
    return out;
}

/// Orthonormal basis of the null space of C (rows scaled to unit norm first).
MatrixXd null_space(MatrixXd C, int n) {
    if (C.rows() == 0) return MatrixXd::Identity(n, n);
    for (int i = 0; i < C.rows(); ++i) {
        const double s = C.row(i).norm();
        if (s > 0.0) C.row(i) /= s;
    }
    Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s(rank) > 1e-9 * s(0)) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

/// Column-space split of T: (orthonormal range, orthonormal complement).
std::pair<MatrixXd, MatrixXd> range_split(const MatrixXd& T) {
    Eigen::JacobiSVD<MatrixXd> svd(T, Eigen::ComputeFullU);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s(rank) > 1e-10 * s(0)) ++rank;
    return {svd.matrixU().leftCols(rank), svd.matrixU().rightCols(T.rows() - rank)};
}

Data make_data(const CellGeometry& g, int order) {
    Data d;
    d.g = g;
    QuadratureRule r3 = quadrature_rule(3, order);
    d.vx = g.map(r3.points);
    d.vw = r3.weights * std::abs(g.det);
    QuadratureRule r2 = quadrature_rule(2, order);
    for (int i = 0; i < 4; ++i) {
        std::vector<int> vs;
        for (int k = 0; k < 4; ++k)
            if (k != i) vs.push_back(k);
        Vec3 a = g.verts.row(vs[0]).transpose(), b = g.verts.row(vs[1]).transpose(),
             c = g.verts.row(vs[2]).transpose();
        Face& f = d.faces[i];
        f.st = r2.points;
        f.x.resize(r2.size(), 3);
        for (int q = 0; q < r2.size(); ++q) f.x.row(q) = (a + r2.points(q, 0) * (b - a) + r2.points(q, 1) * (c - a)).transpose();
        f.jac = (b - a).cross(c - a).norm();
        f.w = r2.weights * f.jac;
        f.n = g.outward_normal(i);
        d.boundary_area += f.w.sum();
    }
    return d;
}

void set_face_basis(Data& d, int k) {
    auto sp = ReferenceSpace::get(Family::L2, k, 2);
    for (int i = 0; i < 4; ++i) d.fphi[i] = sp->eval(d.faces[i].st).val[0] / std::sqrt(d.faces[i].jac);
}

/// Stacked face moments of scalar traces: rows = face basis functions of all faces.
MatrixXd face_moments(const Data& d, const std::function<MatrixXd(int face)>& trace) {
    std::vector<MatrixXd> blocks;
    for (int i = 0; i < 4; ++i) blocks.push_back(wdot(d.fphi[i], d.faces[i].w, trace(i)));
    return vstack(blocks);
}

/// P^c_{k}(dK) in the stacked face basis: traces of P_k(K).
MatrixXd conforming_traces(const Data& d, int k) {
    auto sp = ReferenceSpace::get(Family::H1, k, 3);
    return face_moments(d, [&](int i) { return tab(*sp, d.g, d.faces[i].x).val[0]; });
}

MatrixXd raw_apply(FortinKind kind, const Data& d, const RealEvaluator& f) {
    std::vector<MatrixXd> vv = f(d.vx);
    const int m = static_cast<int>(vv[0].cols());
    MatrixXd vol = MatrixXd::Zero(d.volq[0].cols(), m);
    for (size_t c = 0; c < d.volq.size(); ++c) vol += wdot(d.volq[c], d.vw, vv[c]);
    MatrixXd bnd;
    switch (kind) {
        case FortinKind::Grad:
            bnd = face_moments(d, [&](int i) { return f(d.faces[i].x)[0]; });
            break;
        case FortinKind::Div:
            bnd = d.Uc.transpose() * face_moments(d, [&](int i) { return normal_part(f(d.faces[i].x), d.faces[i].n); });
            break;
        case FortinKind::Curl: {
            bnd = MatrixXd::Zero(d.fF[0][0].cols(), m);
            for (int i = 0; i < 4; ++i) {
                auto nx = ncross(f(d.faces[i].x), d.faces[i].n);
                for (int c = 0; c < 3; ++c) bnd += wdot(d.fF[i][c], d.faces[i].w, nx[c]);
            }
            break;
        }
    }
    return vstack({vol, bnd});
}

MatrixXd edge_rows(const Data& d, const ReferenceSpace& big, int npts, bool tangential) {
    VectorXd t, w;
    gauss_legendre01(npts, t, w);
    std::vector<MatrixXd> rows;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            Vec3 va = d.g.verts.row(a).transpose(), vb = d.g.verts.row(b).transpose();
            MatrixXd x(npts, 3);
            for (int q = 0; q < npts; ++q) x.row(q) = (va + t(q) * (vb - va)).transpose();
            Tab tb = tab(big, d.g, x);
            rows.push_back(tangential ? normal_part(tb.val, vb - va) : tb.val[0]);
        }
    return vstack(rows);
}

RealEvaluator space_eval(std::shared_ptr<const ReferenceSpace> sp, const CellGeometry& g, const MatrixXd& coef,
                         bool derivative) {
    return [sp, g, coef, derivative](const MatrixXd& x) {
        Tab t = tab(*sp, g, x);
        std::vector<MatrixXd> out;
        for (const auto& v : derivative ? t.der : t.val) out.push_back(v * coef);
        return out;
    };
}

MatrixXd random_coefficients(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    MatrixXd c(n, count);
    for (int j = 0; j < count; ++j)
        for (int i = 0; i < n; ++i) c(i, j) = nd(rng);
    return c;
}

/// Per-column relative L2 distance between two tabulated vector fields.
double rel_l2(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b, const VectorXd& w) {
    double worst = 0.0;
    for (int j = 0; j < a[0].cols(); ++j) {
        double num = 0.0, den = 0.0;
        for (size_t c = 0; c < a.size(); ++c) {
            num += (a[c].col(j) - b[c].col(j)).array().square().matrix().dot(w);
            den += a[c].col(j).array().square().matrix().dot(w);
        }
        worst = std::max(worst, den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));
    }
    return worst;
}

std::vector<MatrixXd> times(const std::vector<MatrixXd>& t, const MatrixXd& c) {
    std::vector<MatrixXd> out;
    for (const auto& v : t) out.push_back(v * c);
    return out;
}

}  // namespace

FortinSystem fortin_build(FortinKind kind, int p, const MatrixXd& verts_in) {
    require(p >= 1, "fortin_build: p >= 1 required");
    const MatrixXd verts = verts_in.size() ? verts_in : reference_vertices(3);
    require(verts.rows() == 4 && verts.cols() == 3, "fortin_build: a tetrahedron is required");
    FortinSystem fs;
    fs.kind = kind;
    fs.p = p;
    fs.geom = CellGeometry::from_vertices(verts);
    require(std::abs(fs.geom.det) > 0.0, "fortin_build: degenerate tetrahedron");
    const Family fam = kind == FortinKind::Grad ? Family::H1 : kind == FortinKind::Curl ? Family::Hcurl : Family::Hdiv;
    fs.big = ReferenceSpace::get(fam, p + 3, 3);
    const int nbig = fs.big->n;

    auto d = std::make_shared<Data>(make_data(fs.geom, 2 * (p + 6) + 2));
    const RealEvaluator big_val = space_eval(fs.big, fs.geom, MatrixXd::Identity(nbig, nbig), false);
    const Tab big_vol = tab(*fs.big, fs.geom, d->vx);

    switch (kind) {
        case FortinKind::Grad: {
            d->volq = tab(*ReferenceSpace::get(Family::L2, p - 1, 3), fs.geom, d->vx).val;
            set_face_basis(*d, p);
            fs.constraints = edge_rows(*d, *fs.big, p + 4, false);
            MatrixXd G = wdot(big_vol.val[0], d->vw, big_vol.val[0]);
            d->one = G.llt().solve(wdot(big_vol.val[0], d->vw, VectorXd::Ones(d->vx.rows())));
            break;
        }
        case FortinKind::Div: {
            d->volq = tab(*ReferenceSpace::get(Family::L2Vec, p + 1, 3), fs.geom, d->vx).val;
            set_face_basis(*d, p + 2);
            auto [Uc, Up] = range_split(conforming_traces(*d, p + 2));
            d->Uc = Uc;
            fs.perp_dim = static_cast<int>(Up.cols());
            fs.constraints =
                Up.transpose() * face_moments(*d, [&](int i) { return normal_part(big_val(d->faces[i].x), d->faces[i].n); });
            break;
        }
        case FortinKind::Curl: {
            d->volq = tab(*ReferenceSpace::get(Family::L2Vec, p, 3), fs.geom, d->vx).val;
            auto Fsp = ReferenceSpace::get(Family::L2Vec, p + 1, 3);
            for (int i = 0; i < 4; ++i) d->fF[i] = tab(*Fsp, fs.geom, d->faces[i].x).val;
            set_face_basis(*d, p + 2);
            // P^c_{p+2} + piecewise constants, and its complement
            MatrixXd T = conforming_traces(*d, p + 2);
            MatrixXd K0 = face_moments(*d, [&](int i) {
                MatrixXd ind = MatrixXd::Zero(d->faces[i].x.rows(), 4);
                ind.col(i).setOnes();
                return ind;
            });
            MatrixXd TK(T.rows(), T.cols() + 4);
            TK << T, K0;
            MatrixXd Up = range_split(TK).second;
            fs.perp_dim = static_cast<int>(Up.cols());
            MatrixXd edges = edge_rows(*d, *fs.big, p + 4, true);
            MatrixXd flux = Up.transpose() * face_moments(*d, [&](int i) {
                return normal_part(tab(*fs.big, fs.geom, d->faces[i].x).der, d->faces[i].n);
            });
            // one moment of the tangential part against x
            MatrixXd xm = MatrixXd::Zero(1, nbig);
            for (int i = 0; i < 4; ++i) {
                const Face& f = d->faces[i];
                auto v = big_val(f.x);
                for (int q = 0; q < f.x.rows(); ++q) {
                    Vec3 x = f.x.row(q).transpose();
                    Vec3 xt = x - x.dot(f.n) * f.n;
                    for (int c = 0; c < 3; ++c) xm.row(0) += f.w(q) * xt(c) * v[c].row(q);
                }
            }
            fs.constraints = vstack({edges, flux, xm});
            break;
        }
    }

    fs.bspace = null_space(fs.constraints, nbig);
    fs.raw = raw_apply(kind, *d, big_val);
    if (kind == FortinKind::Grad) d->raw_one = fs.raw * d->one;

    Eigen::JacobiSVD<MatrixXd> svd(fs.raw, Eigen::ComputeFullU);
    const VectorXd& s = svd.singularValues();
    int r = 0;
    while (r < s.size() && s(r) > 1e-10 * s(0)) ++r;
    fs.reduce = s.head(r).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(r).transpose();
    fs.M = fs.reduce * fs.raw * fs.bspace;
    fs.lu.compute(fs.M);
    fs.lu.setThreshold(1e-10);
    fs.rank = static_cast<int>(fs.lu.rank());
    fs.probe = d;
    require(fs.M.rows() == fs.M.cols() && fs.rank == fs.M.rows(),
            "fortin_build(" + fortin_name(kind) + ", p=" + std::to_string(p) + "): moment system " +
                std::to_string(fs.M.rows()) + "x" + std::to_string(fs.M.cols()) + " has numerical rank " +
                std::to_string(fs.rank));
    return fs;
}

MatrixXd fortin_apply(const FortinSystem& fs, const RealEvaluator& f) {
    const Data& d = data_of(fs);
    MatrixXd r = raw_apply(fs.kind, d, f);
    Eigen::RowVectorXd mean;
    if (fs.kind == FortinKind::Grad) {
        mean = Eigen::RowVectorXd::Zero(r.cols());
        for (const Face& fc : d.faces) mean += fc.w.transpose() * f(fc.x)[0];
        mean /= d.boundary_area;
        r -= d.raw_one * mean;
    }
    MatrixXd out = fs.bspace * fs.lu.solve(fs.reduce * r);
    if (fs.kind == FortinKind::Grad) out += d.one * mean;
    return out;
}

double fortin_moment_residual(const FortinSystem& fs, const RealEvaluator& f) {
    const Data& d = data_of(fs);
    MatrixXd rf = raw_apply(fs.kind, d, f);
    MatrixXd rp = fs.raw * fortin_apply(fs, f);
    double worst = 0.0;
    for (int j = 0; j < rf.cols(); ++j) {
        const double scale = std::max({rf.col(j).cwiseAbs().maxCoeff(), rp.col(j).cwiseAbs().maxCoeff(), 1e-300});
        worst = std::max(worst, (rp.col(j) - rf.col(j)).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

double bspace_constraint_residual(const FortinSystem& fs) {
    if (fs.constraints.rows() == 0) return 0.0;
    double worst = 0.0;
    for (int i = 0; i < fs.constraints.rows(); ++i) {
        const double s = fs.constraints.row(i).norm();
        if (s > 0.0) worst = std::max(worst, (fs.constraints.row(i) * fs.bspace).cwiseAbs().maxCoeff() / s);
    }
    return worst;
}

RealEvaluator fortin_samples(const FortinSystem& fs, int deg, int count, std::uint64_t seed) {
    auto sp = ReferenceSpace::get(input_family(fs.kind), deg, 3);
    return space_eval(sp, fs.geom, random_coefficients(sp->n, count, seed), false);
}

CommutingResidual fortin_commuting(const FortinSystem& g, const FortinSystem& c, const FortinSystem& d, int deg,
                                   int count, std::uint64_t seed) {
    require(g.kind == FortinKind::Grad && c.kind == FortinKind::Curl && d.kind == FortinKind::Div,
            "fortin_commuting: expects grad, curl and div systems");
    const Data& dd = data_of(g);
    const CellGeometry& geo = g.geom;
    const MatrixXd& x = dd.vx;
    const VectorXd& w = dd.vw;
    const Tab tg = tab(*g.big, geo, x), tc = tab(*c.big, geo, x), td = tab(*d.big, geo, x);
    CommutingResidual res;

    auto h1 = ReferenceSpace::get(Family::H1, deg, 3);
    MatrixXd cv = random_coefficients(h1->n, count, seed);
    MatrixXd pg = fortin_apply(g, space_eval(h1, geo, cv, false));
    MatrixXd pcg = fortin_apply(c, space_eval(h1, geo, cv, true));
    res.grad = rel_l2(times(tg.der, pg), times(tc.val, pcg), w);

    auto hc = ReferenceSpace::get(Family::HcurlFull, deg, 3);
    MatrixXd ce = random_coefficients(hc->n, count, seed + 1);
    MatrixXd pc = fortin_apply(c, space_eval(hc, geo, ce, false));
    MatrixXd pdc = fortin_apply(d, space_eval(hc, geo, ce, true));
    res.curl = rel_l2(times(tc.der, pc), times(td.val, pdc), w);

    auto hd = ReferenceSpace::get(Family::Hdiv, deg, 3);
    MatrixXd cs = random_coefficients(hd->n, count, seed + 2);
    MatrixXd pd = fortin_apply(d, space_eval(hd, geo, cs, false));
    // L2 projection of div sigma onto P_{p+2}
    auto pk = ReferenceSpace::get(Family::H1, d.p + 2, 3);
    MatrixXd q = tab(*pk, geo, x).val[0];
    MatrixXd divs = tab(*hd, geo, x).der[0] * cs;
    MatrixXd proj = q * (wdot(q, w, q)).llt().solve(wdot(q, w, divs));
    res.div = rel_l2({td.der[0] * pd}, {proj}, w);

    // consecutive maps of the projected sequence
    auto norm_of = [&](const std::vector<MatrixXd>& a) {
        double m = 0.0;
        for (int j = 0; j < a[0].cols(); ++j) {
            double s = 0.0;
            for (const auto& v : a) s += v.col(j).array().square().matrix().dot(w);
            m = std::max(m, std::sqrt(s));
        }
        return m;
    };
    const double cg = norm_of(times(tc.der, pcg)) / std::max(norm_of(times(tc.val, pcg)), 1e-300);
    const double dc = norm_of({td.der[0] * pdc}) / std::max(norm_of(times(td.val, pdc)), 1e-300);
    res.chain = cg + dc;
    return res;
}

FortinBound fortin_bound(const FortinSystem& fs, int deg) {
    const Data& d = data_of(fs);
    auto in = ReferenceSpace::get(input_family(fs.kind), deg, 3);
    const Tab ti = tab(*in, fs.geom, d.vx), tb = tab(*fs.big, fs.geom, d.vx);
    MatrixXd P = fortin_apply(fs, space_eval(in, fs.geom, MatrixXd::Identity(in->n, in->n), false));
    auto gram = [&](const Tab& t, double l2w) {
        MatrixXd G = MatrixXd::Zero(t.val[0].cols(), t.val[0].cols());
        for (const auto& v : t.val) G += l2w * wdot(v, d.vw, v);
        for (const auto& v : t.der) G += wdot(v, d.vw, v);
        return G;
    };
    const double h = fs.geom.diameter();
    FortinBound b;
    for (int k = 0; k < 2; ++k) {
        const double l2w = k == 0 ? 1.0 / (h * h) : 1.0;
        MatrixXd Gin = gram(ti, l2w);
        MatrixXd Gout = P.transpose() * gram(tb, l2w) * P;
        VectorXd ev = pencil_eigenvalues(Gout.cast<cplx>(), Gin.cast<cplx>());
        (k == 0 ? b.weighted : b.full) = std::sqrt(std::max(ev(ev.size() - 1), 0.0));
    }
    return b;
}

}  // namespace dpg
