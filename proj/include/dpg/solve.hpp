#pragma once

#include <Eigen/Sparse>

#include "dpg/system.hpp"

namespace dpg {

using SparseC = Eigen::SparseMatrix<cplx>;

/// Global condensed system over all trial dofs plus the free-dof reduction.
struct AssembledSystem {
    SparseC A;             ///< ndofs x ndofs, Hermitian
    VectorXc f;
    std::vector<int> free;  ///< ascending free global ids
    SparseC A_free;
    VectorXc f_free;
};

/// Element systems for all cells (parallel map), condensed.
std::vector<ElementSystem> element_systems(const Discretization& disc, const ManufacturedCase* mc);

/// Sums element contributions in ascending cell order and removes constrained dofs.
AssembledSystem assemble(const Discretization& disc, const std::vector<ElementSystem>& systems);

struct Solution {
    VectorXc x;                     ///< all global trial dofs; constrained entries are zero
    double relative_residual = 0.0;
    double min_pivot = 0.0;         ///< smallest |D| of the LDL^H factorization
    std::string solver;
};

/// Direct sparse solve of the reduced system. Throws with the smallest pivot on breakdown.
Solution solve(const AssembledSystem& sys, int ndofs);

struct EstimatorField {
    std::vector<double> eta_K;
    double eta = 0.0;
};

/// eta_K^2 = r^H G^{-1} r with r = l - B x restricted to the cell.
EstimatorField estimate(const std::vector<ElementSystem>& systems, const VectorXc& x);

/// Relative size of sum_K B_K^H G_K^{-1} r_K on the free dofs.
double orthogonality_residual(const std::vector<ElementSystem>& systems, const AssembledSystem& sys,
                              const VectorXc& x);

/// Convenience: discretize, assemble, solve and estimate in one go.
struct DpgRun {
    Solution solution;
    EstimatorField estimator;
    std::vector<ElementSystem> systems;
    AssembledSystem system;
};
DpgRun run_dpg(const Discretization& disc, const ManufacturedCase* mc);

}  // namespace dpg
