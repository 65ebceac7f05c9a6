#pragma once

#include "dpg/solve.hpp"

namespace dpg {

struct SlotError {
    std::string slot;
    std::string norm;   ///< "H1", "Hcurl", "Hdiv", "L2" or "min-extension (surrogate)"
    double l2 = 0.0;    ///< L2 part (fields only)
    double full = 0.0;  ///< natural norm or surrogate
    bool surrogate = false;
};

struct ErrorReport {
    std::vector<SlotError> slots;
    double total = 0.0;  ///< sqrt of the sum of squared full errors

    const SlotError& slot(const std::string& name) const;
};

/// Family and degree of the volume space used to extend an interface slot.
std::pair<Family, int> extension_space(const Formulation& f, int slot);

/// Natural-norm Gram of a space's dual basis on a cell.
MatrixXc natural_gram(const ReferenceSpace& sp, const CellGeometry& g, int order);

/// Local X-norm Gram over the cell's trial columns: natural norms for fields and the
/// discrete minimum-extension norm for interface slots.
MatrixXc x_gram(const Discretization& disc, int cell);

/// Field errors by quadrature and interface errors by the minimum-extension surrogate.
ErrorReport measure_error(const Discretization& disc, const VectorXc& x, const ManufacturedCase& mc);

/// Largest generalized singular value of B against the X and Y norms, taken cellwise.
double continuity_bound(const Discretization& disc, const std::vector<ElementSystem>& systems);

/// Y'-norm of l - b(x_exact, .) built from the exact fields and traces.
double exact_residual_norm(const Discretization& disc, const ManufacturedCase& mc);

}  // namespace dpg
