#include "dpg/error.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dpg/parallel.hpp"

namespace dpg {

const SlotError& ErrorReport::slot(const std::string& name) const {
    for (const auto& s : slots)
        if (s.slot == name) return s;
    fail("no error recorded for slot " + name);
}

std::pair<Family, int> extension_space(const Formulation& f, int slot) {
    const TrialSlot& ts = f.trial[slot];
    Family fam = ts.family == Family::HcurlFull ? Family::Hcurl : ts.family;
    return {fam, f.p + f.delta};
}

namespace {

std::string norm_name(Family f) {
    switch (f) {
        case Family::H1: return "H1";
        case Family::Hcurl:
        case Family::HcurlFull: return "Hcurl";
        case Family::Hdiv: return "Hdiv";
        default: return "L2";
    }
}

// Physical dual-basis values of the first `ncols` functions at physical points.
BatchEvaluator basis_evaluator(const ReferenceSpace& sp, const CellGeometry& g, int ncols) {
    return [&sp, g, ncols](const MatrixXd& pts) {
        RefTables ref = sp.eval_dual(g.to_reference(pts));
        std::vector<MatrixXd> val, der;
        pullback(sp.family, g, ref, val, der);
        std::vector<MatrixXc> out;
        for (auto& v : val) out.push_back(v.leftCols(ncols).cast<cplx>());
        return out;
    };
}

BatchEvaluator field_evaluator(const Field& f, double sign) {
    return [f, sign](const MatrixXd& pts) {
        std::vector<MatrixXc> out;
        for (int q = 0; q < pts.rows(); ++q) {
            Vec3 x = Vec3::Zero();
            x.head(pts.cols()) = pts.row(q).transpose();
            VectorXc v = sign * f(x);
            if (out.empty()) out.assign(v.size(), MatrixXc::Zero(pts.rows(), 1));
            for (int k = 0; k < v.size(); ++k) out[k](q, 0) = v(k);
        }
        return out;
    };
}

// Schur complement of the natural Gram onto the boundary dofs of the extension space.
MatrixXc boundary_schur(const ReferenceSpace& ext, const CellGeometry& g, int order) {
    MatrixXc M = natural_gram(ext, g, order);
    const int nb = ext.nboundary, ni = ext.n - nb;
    MatrixXc S = M.topLeftCorner(nb, nb);
    if (ni > 0) {
        Eigen::LLT<MatrixXc> llt(M.bottomRightCorner(ni, ni));
        S -= M.topRightCorner(nb, ni) * llt.solve(M.bottomLeftCorner(ni, nb));
    }
    return 0.5 * (S + S.adjoint());
}

}  // namespace

MatrixXc natural_gram(const ReferenceSpace& sp, const CellGeometry& g, int order) {
    PhysTables t = cell_tables(sp, g, order, true);
    MatrixXd M = MatrixXd::Zero(t.n, t.n);
    for (const auto& v : t.val) M += v.transpose() * t.w.asDiagonal() * v;
    for (const auto& d : t.der) M += d.transpose() * t.w.asDiagonal() * d;
    return (0.5 * (M + M.transpose())).cast<cplx>();
}

MatrixXc x_gram(const Discretization& disc, int cell) {
    const Formulation& f = *disc.form;
    CellGeometry g = CellGeometry::of(*disc.mesh, cell);
    auto off = disc.trial_offsets();
    const int n = disc.ntrial_local();
    MatrixXc X = MatrixXc::Zero(n, n);
    for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
        auto sp = f.trial_space(s);
        const int nl = disc.layout.slots[s].nlocal();
        if (f.trial[s].kind == SlotKind::Field) {
            X.block(off[s], off[s], nl, nl) = natural_gram(*sp, g, disc.order);
        } else {
            auto [fam, q] = extension_space(f, s);
            auto ext = ReferenceSpace::get(fam, q, f.dim);
            MatrixXc R = ext->boundary_dofs(g.verts, basis_evaluator(*sp, g, nl));
            MatrixXc S = boundary_schur(*ext, g, disc.order);
            MatrixXc Xi = R.adjoint() * S * R;
            X.block(off[s], off[s], nl, nl) = 0.5 * (Xi + Xi.adjoint());
        }
    }
    return X;
}

ErrorReport measure_error(const Discretization& disc, const VectorXc& x, const ManufacturedCase& mc) {
    require(mc.has_exact, "measure_error: case " + mc.name + " has no exact solution");
    const Formulation& f = *disc.form;
    const int ns = static_cast<int>(f.trial.size());
    const int nc = disc.mesh->num_cells();
    std::vector<std::vector<std::array<double, 2>>> per(nc, std::vector<std::array<double, 2>>(ns, {0.0, 0.0}));
    parallel_for(nc, [&](int c) {
        CellGeometry g = CellGeometry::of(*disc.mesh, c);
        for (int s = 0; s < ns; ++s) {
            const TrialSlot& ts = f.trial[s];
            auto sp = f.trial_space(s);
            const auto& L = disc.layout.slots[s];
            VectorXc coeff(L.nlocal());
            for (int i = 0; i < L.nlocal(); ++i) coeff(i) = x(disc.layout.offset[s] + L.cell_dofs[c][i]);
            if (ts.kind == SlotKind::Field) {
                PhysTables t = cell_tables(*sp, g, disc.order, true);
                double e0 = 0.0, e1 = 0.0;
                for (int q = 0; q < t.npts; ++q) {
                    Vec3 p = Vec3::Zero();
                    p.head(f.dim) = t.x.row(q).transpose();
                    VectorXc ex = ts.exact_sign * mc.field(ts.exact)(p);
                    for (size_t k = 0; k < t.val.size(); ++k)
                        e0 += t.w(q) * std::norm((t.val[k].row(q).cast<cplx>() * coeff).value() - ex(k));
                    if (!ts.exact_d.empty()) {
                        VectorXc exd = ts.exact_sign * mc.field(ts.exact_d)(p);
                        for (size_t k = 0; k < t.der.size(); ++k)
                            e1 += t.w(q) * std::norm((t.der[k].row(q).cast<cplx>() * coeff).value() - exd(k));
                    }
                }
                per[c][s] = {e0, e0 + e1};
            } else {
                auto [fam, q] = extension_space(f, s);
                auto ext = ReferenceSpace::get(fam, q, f.dim);
                MatrixXc S = boundary_schur(*ext, g, disc.order);
                MatrixXc dh = ext->boundary_dofs(g.verts, basis_evaluator(*sp, g, L.nlocal()));
                MatrixXc de = ext->boundary_dofs(g.verts, field_evaluator(mc.field(ts.exact), ts.exact_sign));
                VectorXc d = dh * coeff - de.col(0);
                per[c][s] = {0.0, std::max(0.0, d.dot(S * d).real())};
            }
        }
    });
    ErrorReport rep;
    double tot = 0.0;
    for (int s = 0; s < ns; ++s) {
        double e0 = 0.0, e1 = 0.0;
        for (int c = 0; c < nc; ++c) {
            e0 += per[c][s][0];
            e1 += per[c][s][1];
        }
        SlotError se;
        se.slot = f.trial[s].name;
        se.surrogate = f.trial[s].kind == SlotKind::Interface;
        se.norm = se.surrogate ? "min-extension (surrogate)" : norm_name(f.trial[s].family);
        se.l2 = std::sqrt(e0);
        se.full = std::sqrt(e1);
        tot += e1;
        rep.slots.push_back(se);
    }
    rep.total = std::sqrt(tot);
    return rep;
}

double continuity_bound(const Discretization& disc, const std::vector<ElementSystem>& systems) {
    std::vector<double> lam(systems.size(), 0.0);
    parallel_for(static_cast<int>(systems.size()), [&](int k) {
        MatrixXc X = x_gram(disc, systems[k].cell);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc> ges(systems[k].A, X, Eigen::EigenvaluesOnly);
        lam[k] = ges.eigenvalues().maxCoeff();
    });
    double m = 0.0;
    for (double l : lam) m = std::max(m, l);
    return std::sqrt(m);
}

double exact_residual_norm(const Discretization& disc, const ManufacturedCase& mc) {
    const int nc = disc.mesh->num_cells();
    std::vector<double> part(nc, 0.0);
    parallel_for(nc, [&](int c) {
        ElementSystem es = element_system(disc, c, &mc);
        VectorXc r = es.l - exact_action(disc, c, mc);
        VectorXc e = Eigen::LLT<MatrixXc>(es.G).solve(r);
        part[c] = std::max(0.0, r.dot(e).real());
    });
    double s = 0.0;
    for (double v : part) s += v;
    return std::sqrt(s);
}

}  // namespace dpg
