#pragma once

#include <vector>

#include "dpg/forms.hpp"
#include "dpg/geometry.hpp"
#include "dpg/space.hpp"

namespace dpg {

/// A formulation bound to a mesh: entity numbering, trial layout, constraints and
/// quadrature orders.
struct Discretization {
    const Formulation* form = nullptr;
    const SimplicialMesh* mesh = nullptr;
    MeshEntities ents;
    TrialLayout layout;
    std::vector<int> constrained;  ///< ascending global ids fixed to zero
    std::vector<int> test_offset;  ///< local offset of each test slot
    int ntest = 0;
    int order = 0;  ///< quadrature order for volume and facet integrals

    Discretization(const Formulation& f, const SimplicialMesh& m);

    int ndofs() const { return layout.ndofs; }
    /// Global trial ids of a cell in local column order (slots in catalog order).
    std::vector<int> cell_dofs(int cell) const;
    /// Local column offsets of each trial slot.
    std::vector<int> trial_offsets() const;
    int ntrial_local() const;
};

/// Per-cell DPG matrices. Columns of B follow Discretization::cell_dofs.
struct ElementSystem {
    int cell = -1;
    MatrixXc G;  ///< test Gram
    MatrixXc B;  ///< test x trial
    VectorXc l;  ///< test load
    MatrixXc A;  ///< B^H G^{-1} B
    VectorXc f;  ///< B^H G^{-1} l
    std::vector<int> dofs;
};

/// Computes G, B and l (l = 0 without a case). Does not condense.
ElementSystem element_system(const Discretization& disc, int cell, const ManufacturedCase* mc);

/// A = B^H G^{-1} B and f = B^H G^{-1} l by Cholesky solves, A symmetrized.
void condense(ElementSystem& es);

/// Element matrices of the Y inner product only.
MatrixXc y_gram(const Discretization& disc, int cell);

/// b((x, x_hat), y_i) with the exact fields and traces of a manufactured case in
/// place of the trial vector.
VectorXc exact_action(const Discretization& disc, int cell, const ManufacturedCase& mc);

/// Values of a local trial slot combination at physical points: components x points.
std::vector<VectorXc> eval_local(const ReferenceSpace& sp, const CellGeometry& g, const VectorXc& coeff,
                                 const MatrixXd& pts, bool derivative = false);

}  // namespace dpg
