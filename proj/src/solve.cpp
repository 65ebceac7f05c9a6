#include "dpg/solve.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>

#include "dpg/parallel.hpp"

namespace dpg {

std::vector<ElementSystem> element_systems(const Discretization& disc, const ManufacturedCase* mc) {
    std::vector<ElementSystem> out(disc.mesh->num_cells());
    parallel_for(disc.mesh->num_cells(), [&](int c) {
        out[c] = element_system(disc, c, mc);
        condense(out[c]);
    });
    return out;
}

AssembledSystem assemble(const Discretization& disc, const std::vector<ElementSystem>& systems) {
    const int n = disc.ndofs();
    AssembledSystem S;
    std::vector<Eigen::Triplet<cplx>> trip;
    S.f = VectorXc::Zero(n);
    for (const ElementSystem& es : systems) {
        const int m = static_cast<int>(es.dofs.size());
        for (int j = 0; j < m; ++j) {
            S.f(es.dofs[j]) += es.f(j);
            for (int i = 0; i < m; ++i)
                if (es.A(i, j) != 0.0) trip.emplace_back(es.dofs[i], es.dofs[j], es.A(i, j));
        }
    }
    S.A.resize(n, n);
    S.A.setFromTriplets(trip.begin(), trip.end());
    std::vector<int> map(n, -1);
    std::vector<char> fixed(n, 0);
    for (int c : disc.constrained) fixed[c] = 1;
    for (int i = 0; i < n; ++i)
        if (!fixed[i]) {
            map[i] = static_cast<int>(S.free.size());
            S.free.push_back(i);
        }
    const int nf = static_cast<int>(S.free.size());
    std::vector<Eigen::Triplet<cplx>> red;
    for (int k = 0; k < S.A.outerSize(); ++k)
        for (SparseC::InnerIterator it(S.A, k); it; ++it)
            if (map[it.row()] >= 0 && map[it.col()] >= 0) red.emplace_back(map[it.row()], map[it.col()], it.value());
    S.A_free.resize(nf, nf);
    S.A_free.setFromTriplets(red.begin(), red.end());
    S.f_free.resize(nf);
    for (int i = 0; i < nf; ++i) S.f_free(i) = S.f(S.free[i]);
    return S;
}

Solution solve(const AssembledSystem& sys, int ndofs) {
    Solution sol;
    sol.x = VectorXc::Zero(ndofs);
    const int nf = static_cast<int>(sys.free.size());
    if (nf == 0) return sol;
    VectorXc y;
    Eigen::SimplicialLDLT<SparseC> ldlt(sys.A_free);
    double dmin = 0.0, dmax = 0.0;
    if (ldlt.info() == Eigen::Success) {
        VectorXd d = ldlt.vectorD().real().cwiseAbs();
        dmin = d.minCoeff();
        dmax = d.maxCoeff();
    }
    sol.min_pivot = dmin;
    if (ldlt.info() == Eigen::Success && dmin > 1e-14 * dmax) {
        y = ldlt.solve(sys.f_free);
        sol.solver = "ldlt";
    } else {
        Eigen::SparseLU<SparseC> lu;
        lu.compute(sys.A_free);
        if (lu.info() != Eigen::Success)
            fail("solve: reduced system is singular (smallest LDL pivot " + std::to_string(dmin) +
                 "); for Maxwell this may indicate a resonant wavenumber");
        y = lu.solve(sys.f_free);
        sol.solver = "lu";
    }
    const double fn = sys.f_free.norm();
    sol.relative_residual = fn > 0 ? (sys.A_free * y - sys.f_free).norm() / fn : (sys.A_free * y).norm();
    if (!(sol.relative_residual < 1e-8))
        fail("solve: reduced system is near singular (relative residual " + std::to_string(sol.relative_residual) +
             ", smallest LDL pivot " + std::to_string(dmin) + ")");
    for (int i = 0; i < nf; ++i) sol.x(sys.free[i]) = y(i);
    return sol;
}

namespace {

VectorXc local(const ElementSystem& es, const VectorXc& x) {
    VectorXc xl(es.dofs.size());
    for (size_t i = 0; i < es.dofs.size(); ++i) xl(i) = x(es.dofs[i]);
    return xl;
}

}  // namespace

EstimatorField estimate(const std::vector<ElementSystem>& systems, const VectorXc& x) {
    EstimatorField est;
    est.eta_K.assign(systems.size(), 0.0);
    parallel_for(static_cast<int>(systems.size()), [&](int k) {
        const ElementSystem& es = systems[k];
        VectorXc r = es.l - es.B * local(es, x);
        Eigen::LLT<MatrixXc> llt(es.G);
        VectorXc eps = llt.solve(r);
        est.eta_K[k] = std::sqrt(std::max(0.0, r.dot(eps).real()));
    });
    double s = 0.0;
    for (double e : est.eta_K) s += e * e;
    est.eta = std::sqrt(s);
    return est;
}

double orthogonality_residual(const std::vector<ElementSystem>& systems, const AssembledSystem& sys,
                              const VectorXc& x) {
    VectorXc g = VectorXc::Zero(x.size());
    for (const ElementSystem& es : systems) {
        VectorXc r = es.l - es.B * local(es, x);
        VectorXc v = es.B.adjoint() * Eigen::LLT<MatrixXc>(es.G).solve(r);
        for (size_t i = 0; i < es.dofs.size(); ++i) g(es.dofs[i]) += v(i);
    }
    double num = 0.0;
    for (int i : sys.free) num = std::max(num, std::abs(g(i)));
    double den = sys.f_free.size() ? sys.f_free.cwiseAbs().maxCoeff() : 0.0;
    return den > 0 ? num / den : num;
}

DpgRun run_dpg(const Discretization& disc, const ManufacturedCase* mc) {
    DpgRun r;
    r.systems = element_systems(disc, mc);
    r.system = assemble(disc, r.systems);
    r.solution = solve(r.system, disc.ndofs());
    r.estimator = estimate(r.systems, r.solution.x);
    return r;
}

}  // namespace dpg
