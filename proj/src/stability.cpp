#include <algorithm>
#include <cmath>

#include "dpg/verify.hpp"

namespace dpg {

BrokenSystem broken_system(const Discretization& disc, const ManufacturedCase* mc) {
    const int nc = disc.mesh->num_cells();
    const int nt = disc.ntest;
    BrokenSystem bs;
    bs.G = MatrixXc::Zero(nc * nt, nc * nt);
    bs.B = MatrixXc::Zero(nc * nt, disc.ndofs());
    bs.l = VectorXc::Zero(nc * nt);
    for (int c = 0; c < nc; ++c) {
        ElementSystem es = element_system(disc, c, mc);
        const int r = c * nt;
        bs.row_offset.push_back(r);
        bs.G.block(r, r, nt, nt) = es.G;
        bs.l.segment(r, nt) = es.l;
        for (size_t j = 0; j < es.dofs.size(); ++j) bs.B.block(r, es.dofs[j], nt, 1) += es.B.col(j);
    }
    const Formulation& f = *disc.form;
    std::vector<char> fixed(disc.ndofs(), 0);
    for (int g : disc.constrained) fixed[g] = 1;
    for (size_t s = 0; s < f.trial.size(); ++s) {
        const int off = disc.layout.offset[s];
        const bool iface = f.trial[s].kind == SlotKind::Interface;
        for (int k = 0; k < disc.layout.slots[s].ndofs; ++k) {
            const int g = off + k;
            if (iface) bs.iface_all.push_back(g);
            if (fixed[g]) continue;
            bs.free.push_back(g);
            (iface ? bs.iface_free : bs.field_free).push_back(g);
        }
    }
    return bs;
}

MatrixXc conforming_test_basis(const Discretization& disc, const BrokenSystem& bs) {
    const Formulation& f = *disc.form;
    std::vector<DofLayout> lay = conforming_test_layouts(f, disc.ents);
    std::vector<int> col_of;
    std::vector<int> slot_col(lay.size() + 1, 0);
    std::vector<std::vector<int>> cols(lay.size());
    int ncol = 0;
    for (size_t s = 0; s < lay.size(); ++s) {
        cols[s].assign(lay[s].ndofs, -1);
        for (int g = 0; g < lay[s].ndofs; ++g) {
            if (f.test[s].conforming_zero_bc && lay[s].on_boundary[g]) continue;
            cols[s][g] = ncol++;
        }
    }
    MatrixXc P = MatrixXc::Zero(bs.G.rows(), ncol);
    for (int c = 0; c < disc.mesh->num_cells(); ++c)
        for (size_t s = 0; s < lay.size(); ++s) {
            const MatrixXd& D = lay[s].space->dual();
            const int r0 = bs.row_offset[c] + disc.test_offset[s];
            for (int k = 0; k < lay[s].nlocal(); ++k) {
                const int col = cols[s][lay[s].cell_dofs[c][k]];
                if (col < 0) continue;
                P.block(r0, col, D.rows(), 1) += D.col(k).cast<cplx>();
            }
        }
    return P;
}

MatrixXc global_x_gram(const Discretization& disc) {
    MatrixXc X = MatrixXc::Zero(disc.ndofs(), disc.ndofs());
    for (int c = 0; c < disc.mesh->num_cells(); ++c) {
        MatrixXc Xk = x_gram(disc, c);
        std::vector<int> d = disc.cell_dofs(c);
        for (size_t i = 0; i < d.size(); ++i)
            for (size_t j = 0; j < d.size(); ++j) X(d[i], d[j]) += Xk(i, j);
    }
    return X;
}

MatrixXc select(const MatrixXc& A, const std::vector<int>& rows, const std::vector<int>& cols) {
    MatrixXc out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out(i, j) = A(rows[i], cols[j]);
    return out;
}

VectorXd pencil_eigenvalues(const MatrixXc& M, const MatrixXc& X) {
    if (M.rows() == 0) return VectorXd();
    Eigen::LLT<MatrixXc> llt(X);
    require(llt.info() == Eigen::Success, "pencil_eigenvalues: norm Gram is not positive definite");
    MatrixXc T = llt.matrixL().solve(M);
    T = llt.matrixL().solve(MatrixXc(T.adjoint()));
    T = (0.5 * (T + T.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(T, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

namespace {

std::vector<int> iota_rows(int n) {
    std::vector<int> r(n);
    for (int i = 0; i < n; ++i) r[i] = i;
    return r;
}

double sqrt_clamped(double v) { return std::sqrt(std::max(v, 0.0)); }

/// W = L^{-1} B cellwise, so that B^H G^{-1} B = W^H W.
MatrixXc whiten(const BrokenSystem& bs, int nt, const MatrixXc& B) {
    MatrixXc W(B.rows(), B.cols());
    for (size_t c = 0; c < bs.row_offset.size(); ++c) {
        const int r = bs.row_offset[c];
        Eigen::LLT<MatrixXc> llt(bs.G.block(r, r, nt, nt));
        require(llt.info() == Eigen::Success, "test Gram is not positive definite");
        W.middleRows(r, nt) = llt.matrixL().solve(B.middleRows(r, nt));
    }
    return W;
}

}  // namespace

double c1_formula(double c0, double chat, double b0_norm) {
    if (c0 <= 0.0 || chat <= 0.0) return 0.0;
    const double t = b0_norm / c0 + 1.0;
    return 1.0 / std::sqrt(1.0 / (c0 * c0) + t * t / (chat * chat));
}

SurveyReport survey(const Formulation& form, const SimplicialMesh& mesh, const std::string& mesh_name) {
    Discretization disc(form, mesh);
    BrokenSystem bs = broken_system(disc, nullptr);
    MatrixXc X = global_x_gram(disc);
    const auto rows = iota_rows(static_cast<int>(bs.G.rows()));
    SurveyReport r;
    r.formulation = form.id;
    r.mesh = mesh_name;
    r.p = form.p;

    MatrixXc W = whiten(bs, disc.ntest, bs.B);
    MatrixXc Wf = select(W, rows, bs.free);
    MatrixXc Af = Wf.adjoint() * Wf;
    VectorXd ev = pencil_eigenvalues(Af, select(X, bs.free, bs.free));
    r.infsup = sqrt_clamped(ev(0));
    r.b_norm = sqrt_clamped(ev(ev.size() - 1));

    MatrixXc X0 = select(X, bs.field_free, bs.field_free);
    MatrixXc W0 = select(W, rows, bs.field_free);
    if (!bs.field_free.empty()) {
        VectorXd e0 = pencil_eigenvalues(W0.adjoint() * W0, X0);
        r.b0_norm = sqrt_clamped(e0(e0.size() - 1));

        // unbroken surrogate: sup over the conforming test subspace
        MatrixXc P = conforming_test_basis(disc, bs);
        MatrixXc PB = P.adjoint() * select(bs.B, rows, bs.field_free);
        MatrixXc Q = P.adjoint() * bs.G * P;
        Eigen::LLT<MatrixXc> lq(Q);
        require(lq.info() == Eigen::Success, "conforming test Gram is not positive definite");
        MatrixXc V = lq.matrixL().solve(PB);
        VectorXd ec = pencil_eigenvalues(V.adjoint() * V, X0);
        r.c0 = sqrt_clamped(ec(0));
    }
    if (!bs.iface_free.empty()) {
        MatrixXc Wh = select(W, rows, bs.iface_free);
        VectorXd eh = pencil_eigenvalues(Wh.adjoint() * Wh, select(X, bs.iface_free, bs.iface_free));
        r.chat = sqrt_clamped(eh(0));
        r.c1_formula = c1_formula(r.c0, r.chat, r.b0_norm);
    } else {
        // without interface unknowns the broken and unbroken problems share b0
        r.c1_formula = r.c0;
    }
    return r;
}

std::vector<SurveyReport> infsup_survey(const std::vector<std::string>& ids, const SimplicialMesh& mesh,
                                        const std::string& mesh_name, int p, SpaceMode mode) {
    std::vector<SurveyReport> out;
    for (const auto& id : ids) {
        ManufacturedCase mc = manufactured_case(default_case(id));
        Formulation f = make_formulation(id, p, default_delta(mode), mode, &mc.coef, mesh.dim);
        out.push_back(survey(f, mesh, mesh_name));
    }
    return out;
}

BrokenStability broken_stability_bound(const Formulation& form, const SimplicialMesh& mesh,
                                       const std::string& mesh_name) {
    BrokenStability b;
    b.report = survey(form, mesh, mesh_name);
    b.c1_discrete = b.report.infsup;
    b.c1_formula = b.report.c1_formula;
    b.pass = b.c1_discrete >= b.c1_formula - 1e-10;
    return b;
}

Annihilation annihilation_check(const Formulation& form, const SimplicialMesh& mesh) {
    Discretization disc(form, mesh);
    BrokenSystem bs = broken_system(disc, nullptr);
    MatrixXc P = conforming_test_basis(disc, bs);
    const auto rows = iota_rows(static_cast<int>(bs.G.rows()));
    MatrixXc Bh = select(bs.B, rows, bs.iface_all);
    const MatrixXd absB = Bh.cwiseAbs();

    auto relative = [&](const MatrixXc& Pc) {
        const double num = (Pc.adjoint() * Bh).cwiseAbs().maxCoeff();
        const double den = (Pc.cwiseAbs().transpose() * absB).maxCoeff();
        return den > 0.0 ? num / den : 0.0;
    };
    Annihilation a;
    a.conforming = relative(P);

    // cut each multi-cell conforming function to its first cell
    const int nt = disc.ntest;
    for (int j = 0; j < P.cols(); ++j) {
        int first = -1, cells = 0;
        for (size_t c = 0; c < bs.row_offset.size(); ++c)
            if (P.col(j).segment(bs.row_offset[c], nt).cwiseAbs().maxCoeff() > 0.0) {
                if (first < 0) first = static_cast<int>(c);
                ++cells;
            }
        if (cells < 2) continue;
        MatrixXc cut = MatrixXc::Zero(P.rows(), 1);
        cut.block(bs.row_offset[first], 0, nt, 1) = P.col(j).segment(bs.row_offset[first], nt);
        a.witness = std::max(a.witness, relative(cut));
    }
    return a;
}

}  // namespace dpg
