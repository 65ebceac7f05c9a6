#include "dpg/basis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <map>
#include <mutex>

namespace dpg {

std::string family_name(Family f) {
    switch (f) {
        case Family::H1: return "H1";
        case Family::Hcurl: return "Hcurl";
        case Family::HcurlFull: return "HcurlFull";
        case Family::Hdiv: return "Hdiv";
        case Family::L2: return "L2";
        case Family::L2Vec: return "L2Vec";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::H1, Family::Hcurl, Family::HcurlFull, Family::Hdiv, Family::L2, Family::L2Vec})
        if (family_name(f) == name) return f;
    fail("unknown family: " + name);
}

int family_ncomp(Family f, int dim) { return (f == Family::H1 || f == Family::L2) ? 1 : dim; }

int family_nderiv(Family f, int dim) {
    switch (f) {
        case Family::H1: return dim;
        case Family::Hcurl:
        case Family::HcurlFull: return dim == 3 ? 3 : 1;
        case Family::Hdiv: return 1;
        default: return 0;
    }
}

bool has_trace(Family f) { return f != Family::L2 && f != Family::L2Vec; }

namespace {

int binom(int n, int k) {
    if (k < 0 || n < k) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}

int dimP(int p, int d) { return p < 0 ? 0 : binom(p + d, d); }

// Multi-indices of total degree <= p (or == p when exact), in graded lexicographic order.
std::vector<std::array<int, 3>> multi_indices(int p, int d, bool exact) {
    std::vector<std::array<int, 3>> out;
    for (int s = exact ? p : 0; s <= p; ++s) {
        if (d == 1) {
            out.push_back({s, 0, 0});
        } else if (d == 2) {
            for (int a = s; a >= 0; --a) out.push_back({a, s - a, 0});
        } else {
            for (int a = s; a >= 0; --a)
                for (int b = s - a; b >= 0; --b) out.push_back({a, b, s - a - b});
        }
    }
    return out;
}

// Legendre values and derivatives on [-1,1]; rows = points, cols = degree.
void legendre_table(const VectorXd& t, int deg, MatrixXd& L, MatrixXd& dL) {
    const int n = static_cast<int>(t.size());
    L.setZero(n, deg + 1);
    dL.setZero(n, deg + 1);
    L.col(0).setOnes();
    if (deg >= 1) {
        L.col(1) = t;
        dL.col(1).setOnes();
    }
    for (int k = 2; k <= deg; ++k) {
        for (int i = 0; i < n; ++i) {
            L(i, k) = ((2.0 * k - 1.0) * t(i) * L(i, k - 1) - (k - 1.0) * L(i, k - 2)) / k;
            dL(i, k) = dL(i, k - 2) + (2.0 * k - 1.0) * L(i, k - 1);
        }
    }
}

MatrixXd null_space(const MatrixXd& C, int ncols, double rtol, int* rank_out = nullptr) {
    if (C.rows() == 0) {
        if (rank_out) *rank_out = 0;
        return MatrixXd::Identity(ncols, ncols);
    }
    Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    double smax = s.size() ? s(0) : 0.0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rtol * smax) ++rank;
    if (rank_out) *rank_out = rank;
    return svd.matrixV().rightCols(ncols - rank);
}

// Orthonormalize columns of `vals` (rows c*npts+q) under quadrature weights `w`.
MatrixXd weighted_orthonormalize(MatrixXd vals, const VectorXd& w, int ntr) {
    const int nq = static_cast<int>(w.size());
    MatrixXd W = vals;
    for (int c = 0; c < ntr; ++c)
        for (int q = 0; q < nq; ++q) W.row(c * nq + q) *= w(q);
    MatrixXd gram = vals.transpose() * W;
    Eigen::LLT<MatrixXd> llt(gram);
    require(llt.info() == Eigen::Success, "weighted_orthonormalize: singular Gram");
    MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(gram.rows(), gram.cols()));
    return vals * Linv.transpose();
}

}  // namespace

int expected_dim(Family f, int p, int dim) {
    switch (f) {
        case Family::H1:
        case Family::L2: return dimP(p, dim);
        case Family::L2Vec:
        case Family::HcurlFull: return dim * dimP(p, dim);
        case Family::Hcurl: return dim == 3 ? p * (p + 2) * (p + 3) / 2 : p * (p + 2);
        case Family::Hdiv: return dim == 3 ? p * (p + 1) * (p + 3) / 2 : p * (p + 2);
    }
    return 0;
}

RefTables RefTables::times(const MatrixXd& coeff) const {
    RefTables r;
    r.npts = npts;
    r.n = static_cast<int>(coeff.cols());
    for (const auto& v : val) r.val.push_back(v * coeff);
    for (const auto& d : der) r.der.push_back(d * coeff);
    return r;
}

MatrixXd reference_vertices(int dim) {
    MatrixXd v = MatrixXd::Zero(dim + 1, dim);
    for (int i = 0; i < dim; ++i) v(i + 1, i) = 1.0;
    return v;
}

std::vector<std::vector<int>> simplex_entities(int dim, int e) {
    std::vector<std::vector<int>> out;
    const int nv = dim + 1;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(cur.size()) == e + 1) {
            out.push_back(cur);
            return;
        }
        for (int v = start; v < nv; ++v) {
            cur.push_back(v);
            rec(v + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

MatrixXd entity_points(const MatrixXd& verts, const std::vector<int>& ent, const MatrixXd& params) {
    const int np = static_cast<int>(params.rows());
    MatrixXd pts(np, verts.cols());
    for (int q = 0; q < np; ++q) {
        pts.row(q) = verts.row(ent[0]);
        for (int k = 1; k < static_cast<int>(ent.size()); ++k)
            pts.row(q) += params(q, k - 1) * (verts.row(ent[k]) - verts.row(ent[0]));
    }
    return pts;
}

MatrixXc trace_components(Family f, int dim, const std::vector<MatrixXc>& vals, const MatrixXd& verts,
                          const std::vector<int>& ent) {
    const int e = static_cast<int>(ent.size()) - 1;
    const int nq = static_cast<int>(vals[0].rows());
    const int m = static_cast<int>(vals[0].cols());
    std::vector<VectorXd> t;
    for (int k = 1; k <= e; ++k) t.push_back((verts.row(ent[k]) - verts.row(ent[0])).transpose());
    switch (f) {
        case Family::H1: return vals[0];
        case Family::Hcurl:
        case Family::HcurlFull: {
            MatrixXc out = MatrixXc::Zero(e * nq, m);
            for (int k = 0; k < e; ++k)
                for (int c = 0; c < dim; ++c) out.middleRows(k * nq, nq) += t[k](c) * vals[c];
            return out;
        }
        case Family::Hdiv: {
            require(e == dim - 1, "trace_components: normal trace only on facets");
            VectorXd nu(dim);
            if (dim == 3) {
                Vec3 a = t[0], b = t[1];
                nu = a.cross(b);
            } else {
                nu << t[0](1), -t[0](0);
            }
            MatrixXc out = MatrixXc::Zero(nq, m);
            for (int c = 0; c < dim; ++c) out += nu(c) * vals[c];
            return out;
        }
        default: fail("trace_components: " + family_name(f) + " has no trace");
    }
}

std::shared_ptr<const ReferenceSpace> ReferenceSpace::get(Family family, int p, int dim) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const ReferenceSpace>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(static_cast<int>(family), p, dim);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto sp = std::make_shared<const ReferenceSpace>(family, p, dim);
    cache.emplace(key, sp);
    return sp;
}

ReferenceSpace::ReferenceSpace(Family fam, int p, int d)
    : family(fam), degree(p), dim(d), ncomp(family_ncomp(fam, d)), nderiv(family_nderiv(fam, d)) {
    require(d == 2 || d == 3, "ReferenceSpace: dim must be 2 or 3");
    require(p >= 0, "ReferenceSpace: negative degree");
    if (fam == Family::Hcurl || fam == Family::Hdiv) require(p >= 1, "ReferenceSpace: " + family_name(fam) + " needs p >= 1");
    n = expected_dim(fam, p, d);

    // Generating set.
    auto add_leg = [&](int deg, int comp) {
        for (auto a : multi_indices(deg, d, false)) gens_.push_back({0, a, comp});
    };
    switch (fam) {
        case Family::H1:
        case Family::L2: add_leg(p, 0); break;
        case Family::L2Vec:
        case Family::HcurlFull:
            for (int c = 0; c < d; ++c) add_leg(p, c);
            break;
        case Family::Hdiv:
            for (int c = 0; c < d; ++c) add_leg(p - 1, c);
            for (auto a : multi_indices(p - 1, d, true)) gens_.push_back({1, a, 0});
            break;
        case Family::Hcurl:
            for (int c = 0; c < d; ++c) add_leg(p - 1, c);
            if (d == 3) {
                for (int c = 0; c < 3; ++c)
                    for (auto a : multi_indices(p - 1, d, true)) gens_.push_back({2, a, c});
            } else {
                for (auto a : multi_indices(p - 1, d, true)) gens_.push_back({3, a, 0});
            }
            break;
    }

    QuadratureRule rule = quadrature_rule(d, 2 * p + 2);
    const int nq = rule.size();
    std::vector<MatrixXd> gv, gj;
    eval_generators(rule.points, gv, gj);
    const int ng = static_cast<int>(gens_.size());
    MatrixXd S(ncomp * nq, ng);
    for (int c = 0; c < ncomp; ++c)
        for (int q = 0; q < nq; ++q) S.row(c * nq + q) = std::sqrt(rule.weights(q)) * gv[c].row(q);
    Eigen::BDCSVD<MatrixXd> svd(S, Eigen::ComputeThinV);
    const VectorXd& s = svd.singularValues();
    require(n <= s.size() && s(n - 1) > 1e-13 * s(0),
            "ReferenceSpace: generators of " + family_name(fam) + " rank-deficient");
    if (s.size() > n) require(s(n) < 1e-8 * s(0), "ReferenceSpace: generator rank exceeds dimension for " + family_name(fam));
    coeff_ = svd.matrixV().leftCols(n) * s.head(n).cwiseInverse().asDiagonal();
    MatrixXd Sc = S * coeff_;
    Eigen::LLT<MatrixXd> llt(Sc.transpose() * Sc);
    MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(n, n));
    coeff_ = coeff_ * Linv.transpose();

    build_dofs();
}

void ReferenceSpace::eval_generators(const MatrixXd& pts, std::vector<MatrixXd>& val,
                                     std::vector<MatrixXd>& jac) const {
    const int np = static_cast<int>(pts.rows());
    const int ng = static_cast<int>(gens_.size());
    const int maxdeg = std::max(degree, 0) + 1;
    val.assign(ncomp, MatrixXd::Zero(np, ng));
    jac.assign(ncomp * dim, MatrixXd::Zero(np, ng));
    std::vector<MatrixXd> L(dim), dL(dim), Y(dim);
    VectorXd centroid = VectorXd::Constant(dim, 1.0 / (dim + 1));
    for (int j = 0; j < dim; ++j) {
        legendre_table(2.0 * pts.col(j).array() - 1.0, maxdeg, L[j], dL[j]);
        Y[j].resize(np, maxdeg + 1);
        VectorXd y = pts.col(j).array() - centroid(j);
        Y[j].col(0).setOnes();
        for (int k = 1; k <= maxdeg; ++k) Y[j].col(k) = Y[j].col(k - 1).cwiseProduct(y);
    }
    auto ypow = [&](int j, int k, int q) { return k < 0 ? 0.0 : Y[j](q, k); };
    for (int g = 0; g < ng; ++g) {
        const Generator& G = gens_[g];
        for (int q = 0; q < np; ++q) {
            if (G.kind == 0) {
                double v = 1.0;
                for (int j = 0; j < dim; ++j) v *= L[j](q, G.a[j]);
                val[G.comp](q, g) = v;
                for (int j = 0; j < dim; ++j) {
                    double dv = 2.0 * dL[j](q, G.a[j]);
                    for (int i = 0; i < dim; ++i)
                        if (i != j) dv *= L[i](q, G.a[i]);
                    jac[G.comp * dim + j](q, g) = dv;
                }
                continue;
            }
            // homogeneous monomial m = y^a and its gradient
            double m = 1.0;
            for (int j = 0; j < dim; ++j) m *= ypow(j, G.a[j], q);
            double dm[3] = {0, 0, 0};
            for (int j = 0; j < dim; ++j) {
                if (G.a[j] == 0) continue;
                double t = G.a[j] * ypow(j, G.a[j] - 1, q);
                for (int i = 0; i < dim; ++i)
                    if (i != j) t *= ypow(i, G.a[i], q);
                dm[j] = t;
            }
            double y[3] = {0, 0, 0};
            for (int j = 0; j < dim; ++j) y[j] = Y[j](q, 1);
            if (G.kind == 1) {
                for (int c = 0; c < dim; ++c) {
                    val[c](q, g) = y[c] * m;
                    for (int j = 0; j < dim; ++j) jac[c * dim + j](q, g) = (c == j ? m : 0.0) + y[c] * dm[j];
                }
            } else if (G.kind == 2) {
                // (y x e_k)_c = eps(c,a,k) y_a
                const int k = G.comp;
                auto eps = [](int i, int j, int l) { return (i - j) * (j - l) * (l - i) / 2; };
                for (int c = 0; c < 3; ++c) {
                    double v = 0.0;
                    for (int a = 0; a < 3; ++a) v += eps(c, a, k) * y[a];
                    val[c](q, g) = v * m;
                    for (int j = 0; j < 3; ++j) jac[c * 3 + j](q, g) = eps(c, j, k) * m + v * dm[j];
                }
            } else {
                val[0](q, g) = -y[1] * m;
                val[1](q, g) = y[0] * m;
                jac[0 * 2 + 0](q, g) = -y[1] * dm[0];
                jac[0 * 2 + 1](q, g) = -m - y[1] * dm[1];
                jac[1 * 2 + 0](q, g) = m + y[0] * dm[0];
                jac[1 * 2 + 1](q, g) = y[0] * dm[1];
            }
        }
    }
}

RefTables ReferenceSpace::eval(const MatrixXd& pts) const {
    require(pts.cols() == dim, "ReferenceSpace::eval: point dimension mismatch");
    std::vector<MatrixXd> gv, gj;
    eval_generators(pts, gv, gj);
    RefTables t;
    t.npts = static_cast<int>(pts.rows());
    t.n = n;
    for (int c = 0; c < ncomp; ++c) t.val.push_back(gv[c] * coeff_);
    auto J = [&](int c, int j) { return gj[c * dim + j]; };
    switch (family) {
        case Family::H1:
            for (int j = 0; j < dim; ++j) t.der.push_back(J(0, j) * coeff_);
            break;
        case Family::Hcurl:
        case Family::HcurlFull:
            if (dim == 3) {
                t.der.push_back((J(2, 1) - J(1, 2)) * coeff_);
                t.der.push_back((J(0, 2) - J(2, 0)) * coeff_);
                t.der.push_back((J(1, 0) - J(0, 1)) * coeff_);
            } else {
                t.der.push_back((J(1, 0) - J(0, 1)) * coeff_);
            }
            break;
        case Family::Hdiv: {
            MatrixXd dv = J(0, 0);
            for (int c = 1; c < dim; ++c) dv += J(c, c);
            t.der.push_back(dv * coeff_);
            break;
        }
        default: break;
    }
    return t;
}

RefTables ReferenceSpace::eval_dual(const MatrixXd& pts) const { return eval(pts).times(dual_); }

int ReferenceSpace::entity_count(int e) const { return binom(dim + 1, e + 1); }

int ReferenceSpace::entity_offset(int e, int idx) const {
    int off = 0;
    for (int k = 0; k < e; ++k) off += entity_count(k) * dofs_per_entity[k];
    return off + idx * dofs_per_entity[e];
}

MatrixXc ReferenceSpace::boundary_dofs(const MatrixXd& verts, const BatchEvaluator& f) const {
    std::vector<MatrixXc> rows;
    int m = -1;
    for (int e = 0; e < dim; ++e) {
        if (dofs_per_entity[e] == 0) continue;
        for (const auto& ent : simplex_entities(dim, e)) {
            if (e == 0) {
                MatrixXd pt = verts.row(ent[0]);
                auto vals = f(pt);
                rows.push_back(vals[0]);
                m = static_cast<int>(vals[0].cols());
                continue;
            }
            const EntityBasis& eb = bubbles_[e];
            MatrixXd pts = entity_points(verts, ent, eb.rule.points);
            auto vals = f(pts);
            m = static_cast<int>(vals[0].cols());
            MatrixXc tr = trace_components(family, dim, vals, verts, ent);
            const int nq = eb.rule.size();
            for (int c = 0; c < eb.ntr; ++c)
                for (int q = 0; q < nq; ++q) tr.row(c * nq + q) *= eb.rule.weights(q);
            rows.push_back(eb.basis.transpose().cast<cplx>() * tr);
        }
    }
    if (rows.empty()) return MatrixXc(0, std::max(m, 0));
    int total = 0;
    for (auto& r : rows) total += static_cast<int>(r.rows());
    MatrixXc out(total, m);
    int off = 0;
    for (auto& r : rows) {
        out.middleRows(off, r.rows()) = r;
        off += static_cast<int>(r.rows());
    }
    return out;
}

void ReferenceSpace::build_dofs() {
    dual_ = MatrixXd::Identity(n, n);
    if (!has_trace(family)) {
        dofs_per_entity = {0, 0, 0, 0};
        dofs_per_entity[dim] = n;
        nboundary = 0;
        return;
    }
    const MatrixXd rv = reference_vertices(dim);
    const int p = degree;
    auto psi = [&](const MatrixXd& pts) {
        RefTables t = eval(pts);
        std::vector<MatrixXc> out;
        for (auto& v : t.val) out.push_back(v.cast<cplx>());
        return out;
    };
    const int first = family == Family::H1 ? 0 : (family == Family::Hdiv ? dim - 1 : 1);
    if (family == Family::H1) dofs_per_entity[0] = 1;
    for (int e = std::max(first, 1); e < dim; ++e) {
        EntityBasis eb;
        eb.rule = quadrature_rule(e, 2 * p + 2);
        eb.ntr = (family == Family::Hcurl || family == Family::HcurlFull) ? e : 1;
        std::vector<int> ent(e + 1);
        for (int k = 0; k <= e; ++k) ent[k] = k;
        const int nq = eb.rule.size();
        MatrixXd T = trace_components(family, dim, psi(entity_points(rv, ent, eb.rule.points)), rv, ent).real();
        MatrixXd Tw = T;
        for (int c = 0; c < eb.ntr; ++c)
            for (int q = 0; q < nq; ++q) Tw.row(c * nq + q) *= std::sqrt(eb.rule.weights(q));
        Eigen::JacobiSVD<MatrixXd> svd(Tw, Eigen::ComputeThinV);
        const VectorXd& s = svd.singularValues();
        int r = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > 1e-10 * s(0)) ++r;
        MatrixXd a = svd.matrixV().leftCols(r) * s.head(r).cwiseInverse().asDiagonal();
        MatrixXd g = weighted_orthonormalize(T * a, eb.rule.weights, eb.ntr);
        if (e == dim - 1) facet_trace_ = EntityBasis{eb.rule, eb.ntr, g};

        // Constraints: the trace vanishes on the entity's boundary.
        MatrixXd C(0, n);
        auto append = [&](const MatrixXd& rows) {
            MatrixXd tmp(C.rows() + rows.rows(), n);
            tmp << C, rows;
            C = tmp;
        };
        if (family == Family::H1) {
            VectorXd gx, gw;
            gauss_legendre01(p + 1, gx, gw);
            for (const auto& sub : simplex_entities(e, e - 1)) {
                std::vector<int> sent;
                for (int v : sub) sent.push_back(ent[v]);
                MatrixXd params = sent.size() == 1 ? MatrixXd(1, 0) : MatrixXd(gx);
                append(psi(entity_points(rv, sent, params))[0].real());
            }
        } else if ((family == Family::Hcurl || family == Family::HcurlFull) && e == 2) {
            VectorXd gx, gw;
            gauss_legendre01(p + 2, gx, gw);
            for (const auto& sub : simplex_entities(2, 1)) {
                std::vector<int> sent{ent[sub[0]], ent[sub[1]]};
                append(trace_components(family, dim, psi(entity_points(rv, sent, MatrixXd(gx))), rv, sent).real());
            }
        }
        // g = T a K, so constraints on g-coordinates are C a K (they only see the trace).
        MatrixXd K = (T * a).colPivHouseholderQr().solve(g);
        MatrixXd N = null_space(C * a * K, r, 1e-10);
        MatrixXd bub = g * N;
        eb.basis = N.cols() > 0 ? weighted_orthonormalize(bub, eb.rule.weights, eb.ntr) : MatrixXd(g.rows(), 0);
        dofs_per_entity[e] = static_cast<int>(eb.basis.cols());
        bubbles_[e] = eb;
    }
    MatrixXd Db = boundary_dofs(rv, psi).real();
    nboundary = static_cast<int>(Db.rows());
    int rank = 0;
    MatrixXd Z = null_space(Db, n, 1e-10, &rank);
    require(rank == nboundary, "ReferenceSpace: boundary dofs of " + family_name(family) + " not independent");
    dofs_per_entity[dim] = n - nboundary;
    MatrixXd D(n, n);
    D << Db, Z.transpose();
    dual_ = D.fullPivLu().inverse();
}

MatrixXd facet_trace_matrix(Family f, int p, int dim, int local_facet) {
    require(has_trace(f), "facet_trace_matrix: " + family_name(f) + " has no trace");
    auto sp = ReferenceSpace::get(f, p, dim);
    const auto& ts = sp->facet_trace_space();
    const MatrixXd rv = reference_vertices(dim);
    auto ent = simplex_entities(dim, dim - 1)[facet_entity_index(dim, local_facet)];
    RefTables t = sp->eval(entity_points(rv, ent, ts.rule.points));
    std::vector<MatrixXc> vals;
    for (auto& v : t.val) vals.push_back(v.cast<cplx>());
    MatrixXd tr = trace_components(f, dim, vals, rv, ent).real();
    const int nq = ts.rule.size();
    for (int c = 0; c < ts.ntr; ++c)
        for (int q = 0; q < nq; ++q) tr.row(c * nq + q) *= ts.rule.weights(q);
    return ts.basis.transpose() * tr;
}

ExactSequenceResidual exact_sequence_check(int p, int dim) {
    require(p >= 1, "exact_sequence_check: p >= 1");
    QuadratureRule rule = quadrature_rule(dim, 2 * p + 2);
    const int nq = rule.size();
    // L2 residual of projecting the columns of F (rows c*nq+q) onto the span of target.
    auto residual = [&](const std::vector<MatrixXd>& F, const RefTables& target) {
        const int nc = static_cast<int>(F.size());
        MatrixXd f(nc * nq, F[0].cols()), g(nc * nq, target.n);
        for (int c = 0; c < nc; ++c) {
            f.middleRows(c * nq, nq) = F[c];
            g.middleRows(c * nq, nq) = target.val[c];
        }
        VectorXd sw = rule.weights.cwiseSqrt();
        for (int c = 0; c < nc; ++c) {
            f.middleRows(c * nq, nq) = sw.asDiagonal() * f.middleRows(c * nq, nq);
            g.middleRows(c * nq, nq) = sw.asDiagonal() * g.middleRows(c * nq, nq);
        }
        MatrixXd proj = g * (g.transpose() * g).ldlt().solve(g.transpose() * f);
        // Images of divergence-free members are near zero, so scale by the largest image.
        double fmax = f.colwise().norm().maxCoeff();
        if (fmax == 0.0) return 0.0;
        return (f - proj).colwise().norm().maxCoeff() / fmax;
    };
    ExactSequenceResidual r;
    auto h1 = ReferenceSpace::get(Family::H1, p, dim)->eval(rule.points);
    auto nc = ReferenceSpace::get(Family::Hcurl, p, dim)->eval(rule.points);
    auto rt = ReferenceSpace::get(Family::Hdiv, p, dim)->eval(rule.points);
    auto l2 = ReferenceSpace::get(Family::L2, p - 1, dim)->eval(rule.points);
    r.grad = residual(h1.der, nc);
    if (dim == 3) {
        r.curl = residual(nc.der, rt);
    } else {
        r.curl = residual(nc.der, l2);
        r.rot = residual({h1.der[1], -h1.der[0]}, rt);
    }
    r.div = residual(rt.der, l2);
    return r;
}

}  // namespace dpg
