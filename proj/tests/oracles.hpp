#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dpg/solve.hpp"
#include "dpg/system.hpp"

namespace oracle {

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Integral of x^a y^b z^c over the reference simplex {x_i >= 0, sum x_i <= 1}.
inline double simplex_monomial(int dim, int a, int b, int c = 0) {
    return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + dim);
}

/// Numerical rank by SVD with a relative tolerance.
inline int rank(const Eigen::MatrixXd& M, double tol = 1e-10) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++r;
    return r;
}

/// Petrov-Galerkin solve with explicitly formed optimal test functions T = G^{-1} B
/// on the global broken test space: (T^H B) x = T^H l over the free dofs.
inline dpg::VectorXc explicit_pg_solution(const dpg::Discretization& disc, const dpg::ManufacturedCase& mc) {
    using namespace dpg;
    const int nc = disc.mesh->num_cells();
    const int nt = disc.ntest;
    const int nd = disc.ndofs();
    MatrixXc G = MatrixXc::Zero(nc * nt, nc * nt);
    MatrixXc B = MatrixXc::Zero(nc * nt, nd);
    VectorXc l = VectorXc::Zero(nc * nt);
    for (int k = 0; k < nc; ++k) {
        const ElementSystem es = element_system(disc, k, &mc);
        G.block(k * nt, k * nt, nt, nt) = es.G;
        for (size_t j = 0; j < es.dofs.size(); ++j) B.block(k * nt, es.dofs[j], nt, 1) += es.B.col(j);
        l.segment(k * nt, nt) = es.l;
    }
    const MatrixXc T = G.fullPivLu().solve(B);
    std::vector<int> free;
    for (int i = 0, c = 0; i < nd; ++i) {
        if (c < static_cast<int>(disc.constrained.size()) && disc.constrained[c] == i) {
            ++c;
            continue;
        }
        free.push_back(i);
    }
    const int nf = static_cast<int>(free.size());
    MatrixXc Tf(T.rows(), nf), Bf(B.rows(), nf);
    for (int j = 0; j < nf; ++j) Tf.col(j) = T.col(free[j]), Bf.col(j) = B.col(free[j]);
    const VectorXc xf = (Tf.adjoint() * Bf).fullPivLu().solve(Tf.adjoint() * l);
    VectorXc x = VectorXc::Zero(nd);
    for (int j = 0; j < nf; ++j) x(free[j]) = xf(j);
    return x;
}

}  // namespace oracle
