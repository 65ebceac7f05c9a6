#include "dpg/system.hpp"

#include <Eigen/Cholesky>

namespace dpg {

namespace {

/// Complex tables of one slot: per component, points x columns.
struct CTables {
    std::vector<MatrixXc> val, der;
    int n = 0;
};

CTables from_phys(const PhysTables& t, int ncols) {
    CTables c;
    c.n = ncols;
    for (const auto& v : t.val) c.val.push_back(v.leftCols(ncols).cast<cplx>());
    for (const auto& d : t.der) c.der.push_back(d.leftCols(ncols).cast<cplx>());
    return c;
}

// One-column tables from fields at the given physical points.
CTables from_fields(const MatrixXd& x, const Field* val, const Field* der, double sign) {
    CTables c;
    c.n = 1;
    const int np = static_cast<int>(x.rows());
    auto fill = [&](const Field& f, std::vector<MatrixXc>& out) {
        for (int q = 0; q < np; ++q) {
            Vec3 p = Vec3::Zero();
            p.head(x.cols()) = x.row(q).transpose();
            VectorXc v = sign * f(p);
            if (out.empty()) out.assign(v.size(), MatrixXc::Zero(np, 1));
            for (int k = 0; k < v.size(); ++k) out[k](q, 0) = v(k);
        }
    };
    if (val) fill(*val, c.val);
    if (der) fill(*der, c.der);
    return c;
}

// Expression components (points x total columns) over slots packed at offsets.
std::vector<MatrixXc> eval_expr(const Expr& e, const std::vector<const CTables*>& slots, const std::vector<int>& off,
                                int ntot, int npts) {
    std::vector<MatrixXc> out;
    for (const Term& t : e) {
        const CTables* s = slots[t.slot];
        require(s != nullptr, "eval_expr: slot tables missing");
        const auto& src = t.op == Op::Value ? s->val : s->der;
        require(static_cast<int>(src.size()) == t.coef.cols(), "eval_expr: operator size mismatch");
        if (out.empty()) out.assign(t.coef.rows(), MatrixXc::Zero(npts, ntot));
        require(static_cast<int>(out.size()) == t.coef.rows(), "eval_expr: expression size mismatch");
        for (int r = 0; r < t.coef.rows(); ++r)
            for (int c = 0; c < t.coef.cols(); ++c)
                if (t.coef(r, c) != 0.0) out[r].middleCols(off[t.slot], s->n) += t.coef(r, c) * src[c];
    }
    return out;
}

std::vector<MatrixXc> eval_trace(TraceOp op, const CTables& t, const VectorXd& n) {
    switch (op) {
        case TraceOp::Value: return t.val;
        case TraceOp::NormalDot: {
            MatrixXc s = n(0) * t.val[0];
            for (int c = 1; c < static_cast<int>(t.val.size()); ++c) s += n(c) * t.val[c];
            return {s};
        }
        case TraceOp::NCross: {
            require(t.val.size() == 3 && n.size() == 3, "n x v needs 3D vectors");
            return {n(1) * t.val[2] - n(2) * t.val[1], n(2) * t.val[0] - n(0) * t.val[2],
                    n(0) * t.val[1] - n(1) * t.val[0]};
        }
    }
    return {};
}

// sum_r R[r]^H diag(w) L[r]
MatrixXc weighted_inner(const std::vector<MatrixXc>& R, const std::vector<MatrixXc>& L, const VectorXd& w) {
    require(R.size() == L.size(), "pairing: component count mismatch");
    MatrixXc out = MatrixXc::Zero(R[0].cols(), L[0].cols());
    for (size_t r = 0; r < R.size(); ++r) out.noalias() += R[r].adjoint() * (w.cast<cplx>().asDiagonal() * L[r]);
    return out;
}

/// Everything one cell needs: geometry and tables for test and trial slots.
struct CellData {
    CellGeometry geom;
    PhysTables vol_ref;                         // points and weights of the volume rule
    std::vector<CTables> test_vol, trial_vol;   // per slot
    std::vector<std::vector<CTables>> test_fac, trial_fac;  // [facet][slot]
    std::vector<PhysTables> fac_ref;            // points, weights and normal per facet
};

CellData cell_data(const Discretization& disc, int cell, bool with_trial) {
    const Formulation& f = *disc.form;
    CellData cd;
    cd.geom = CellGeometry::of(*disc.mesh, cell);
    const int d = f.dim;
    for (int s = 0; s < static_cast<int>(f.test.size()); ++s) {
        auto sp = f.test_space(s);
        PhysTables t = cell_tables(*sp, cd.geom, disc.order, false);
        if (s == 0) cd.vol_ref = t;
        cd.test_vol.push_back(from_phys(t, sp->n));
    }
    const bool need_facets = with_trial ? !f.bhat.empty() : false;
    if (with_trial) {
        for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
            auto sp = f.trial_space(s);
            if (f.trial[s].kind == SlotKind::Field) {
                cd.trial_vol.push_back(from_phys(cell_tables(*sp, cd.geom, disc.order, true), sp->n));
            } else {
                cd.trial_vol.push_back(CTables{});
            }
        }
    }
    if (need_facets) {
        cd.test_fac.resize(d + 1);
        cd.trial_fac.resize(d + 1);
        for (int i = 0; i <= d; ++i) {
            for (int s = 0; s < static_cast<int>(f.test.size()); ++s) {
                auto sp = f.test_space(s);
                PhysTables t = facet_tables(*sp, cd.geom, i, disc.order, false);
                if (s == 0) cd.fac_ref.push_back(t);
                cd.test_fac[i].push_back(from_phys(t, sp->n));
            }
            for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
                auto sp = f.trial_space(s);
                if (f.trial[s].kind == SlotKind::Interface) {
                    cd.trial_fac[i].push_back(from_phys(facet_tables(*sp, cd.geom, i, disc.order, true), sp->nboundary));
                } else {
                    cd.trial_fac[i].push_back(CTables{});
                }
            }
        }
    }
    return cd;
}

std::vector<const CTables*> ptrs(const std::vector<CTables>& v) {
    std::vector<const CTables*> p;
    for (const auto& t : v) p.push_back(t.n > 0 || !t.val.empty() ? &t : nullptr);
    return p;
}

MatrixXc gram_from(const Discretization& disc, const CellData& cd) {
    const Formulation& f = *disc.form;
    const int nq = cd.vol_ref.npts;
    auto tp = ptrs(cd.test_vol);
    MatrixXc G = MatrixXc::Zero(disc.ntest, disc.ntest);
    for (const Pairing& pr : f.ygram) {
        auto L = eval_expr(pr.left, tp, disc.test_offset, disc.ntest, nq);
        auto R = eval_expr(pr.right, tp, disc.test_offset, disc.ntest, nq);
        G += weighted_inner(R, L, cd.vol_ref.w);
    }
    return 0.5 * (G + G.adjoint());
}

// B for arbitrary trial tables (basis functions or exact fields).
MatrixXc b_from(const Discretization& disc, const CellData& cd, const std::vector<CTables>& trial_vol,
                const std::vector<std::vector<CTables>>& trial_fac, const std::vector<int>& toff, int ntr) {
    const Formulation& f = *disc.form;
    const int nq = cd.vol_ref.npts;
    auto tp = ptrs(cd.test_vol);
    auto xp = ptrs(trial_vol);
    MatrixXc B = MatrixXc::Zero(disc.ntest, ntr);
    for (const Pairing& pr : f.b0) {
        auto L = eval_expr(pr.left, xp, toff, ntr, nq);
        auto R = eval_expr(pr.right, tp, disc.test_offset, disc.ntest, nq);
        B += weighted_inner(R, L, cd.vol_ref.w);
    }
    for (size_t i = 0; i < trial_fac.size(); ++i) {
        const PhysTables& fr = cd.fac_ref[i];
        for (const BoundaryPairing& bp : f.bhat) {
            const CTables& xt = trial_fac[i][bp.trial_slot];
            const CTables& yt = cd.test_fac[i][bp.test_slot];
            auto L = eval_trace(bp.trial_op, xt, fr.normal);
            auto R = eval_trace(bp.test_op, yt, fr.normal);
            B.block(disc.test_offset[bp.test_slot], toff[bp.trial_slot], yt.n, xt.n) +=
                bp.coef * weighted_inner(R, L, fr.w);
        }
    }
    return B;
}

VectorXc load_from(const Discretization& disc, const CellData& cd, const ManufacturedCase& mc) {
    const int nq = cd.vol_ref.npts;
    auto tp = ptrs(cd.test_vol);
    VectorXc l = VectorXc::Zero(disc.ntest);
    for (const LoadTerm& lt : disc.form->loads(mc)) {
        CTables ft = from_fields(cd.vol_ref.x, &lt.f, nullptr, 1.0);
        auto R = eval_expr(lt.test, tp, disc.test_offset, disc.ntest, nq);
        l += weighted_inner(R, ft.val, cd.vol_ref.w).col(0);
    }
    return l;
}

}  // namespace

Discretization::Discretization(const Formulation& f, const SimplicialMesh& m) : form(&f), mesh(&m) {
    require(f.dim == m.dim, "formulation and mesh dimensions differ");
    ents = build_entities(m);
    layout = make_trial_layout(f, ents);
    constrained = bc_constraints(f, layout);
    for (int s = 0; s < static_cast<int>(f.test.size()); ++s) {
        test_offset.push_back(ntest);
        ntest += f.test_space(s)->n;
    }
    order = 2 * (f.p + f.delta) + 2;
}

std::vector<int> Discretization::cell_dofs(int cell) const {
    std::vector<int> out;
    for (size_t s = 0; s < layout.slots.size(); ++s)
        for (int g : layout.slots[s].cell_dofs[cell]) out.push_back(layout.offset[s] + g);
    return out;
}

std::vector<int> Discretization::trial_offsets() const {
    std::vector<int> off;
    int n = 0;
    for (const auto& L : layout.slots) {
        off.push_back(n);
        n += L.nlocal();
    }
    return off;
}

int Discretization::ntrial_local() const {
    int n = 0;
    for (const auto& L : layout.slots) n += L.nlocal();
    return n;
}

ElementSystem element_system(const Discretization& disc, int cell, const ManufacturedCase* mc) {
    CellData cd = cell_data(disc, cell, true);
    ElementSystem es;
    es.cell = cell;
    es.dofs = disc.cell_dofs(cell);
    es.G = gram_from(disc, cd);
    es.B = b_from(disc, cd, cd.trial_vol, cd.trial_fac, disc.trial_offsets(), disc.ntrial_local());
    es.l = mc ? load_from(disc, cd, *mc) : VectorXc::Zero(disc.ntest);
    return es;
}

void condense(ElementSystem& es) {
    Eigen::LLT<MatrixXc> llt(es.G);
    require(llt.info() == Eigen::Success, "condense: test Gram is not positive definite (cell " +
                                              std::to_string(es.cell) + ")");
    // With G = L L^H: A = (L^{-1} B)^H (L^{-1} B).
    MatrixXc W = llt.matrixL().solve(es.B);
    VectorXc w = llt.matrixL().solve(es.l);
    es.A = W.adjoint() * W;
    es.A = 0.5 * (es.A + es.A.adjoint()).eval();
    es.f = W.adjoint() * w;
}

MatrixXc y_gram(const Discretization& disc, int cell) { return gram_from(disc, cell_data(disc, cell, false)); }

VectorXc exact_action(const Discretization& disc, int cell, const ManufacturedCase& mc) {
    const Formulation& f = *disc.form;
    CellData cd = cell_data(disc, cell, true);
    std::vector<CTables> vol;
    std::vector<std::vector<CTables>> fac(cd.fac_ref.size());
    std::vector<int> off;
    for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
        const TrialSlot& ts = f.trial[s];
        off.push_back(0);
        const Field* v = &mc.field(ts.exact);
        const Field* dv = ts.exact_d.empty() ? nullptr : &mc.field(ts.exact_d);
        vol.push_back(ts.kind == SlotKind::Field ? from_fields(cd.vol_ref.x, v, dv, ts.exact_sign) : CTables{});
        for (size_t i = 0; i < cd.fac_ref.size(); ++i)
            fac[i].push_back(ts.kind == SlotKind::Interface ? from_fields(cd.fac_ref[i].x, v, nullptr, ts.exact_sign)
                                                            : CTables{});
    }
    // All slots share column 0, so contributions add up to b(x_exact, y).
    return b_from(disc, cd, vol, fac, off, 1).col(0);
}

std::vector<VectorXc> eval_local(const ReferenceSpace& sp, const CellGeometry& g, const VectorXc& coeff,
                                 const MatrixXd& pts, bool derivative) {
    RefTables ref = sp.eval_dual(g.to_reference(pts));
    std::vector<MatrixXd> val, der;
    pullback(sp.family, g, ref, val, der);
    const auto& src = derivative ? der : val;
    std::vector<VectorXc> out;
    for (const auto& m : src) out.push_back(m.leftCols(coeff.size()).cast<cplx>() * coeff);
    return out;
}

}  // namespace dpg
