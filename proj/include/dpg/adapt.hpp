#pragma once

#include <limits>
#include <set>

#include "dpg/error.hpp"

namespace dpg {

/// Minimal Dörfler set: cells by descending eta_K (ascending id on ties) until the
/// marked sum of squares exceeds theta^2 eta^2. Cells with eta_K = 0 are never marked.
std::set<int> mark(const EstimatorField& est, double theta);

struct HistoryRecord {
    int iteration = 0;
    int dofs = 0;
    double eta = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();  ///< total error, NaN without exact solution
    int cells = 0;
    std::vector<SlotError> slot_errors;
};

struct AdaptiveHistory {
    std::vector<HistoryRecord> records;
};

struct AdaptiveStop {
    int max_iterations = 10;
    int max_dofs = std::numeric_limits<int>::max();
};

struct AdaptiveResult {
    AdaptiveHistory history;
    SimplicialMesh mesh;  ///< mesh of the last solve
    Solution solution;
    EstimatorField estimator;
};

/// solve -> estimate -> mark -> refine until the stop rule fires. Errors are measured
/// when the case has an exact solution.
AdaptiveResult adaptive_solve(const Formulation& form, const SimplicialMesh& mesh0, const ManufacturedCase& mc,
                              double theta, AdaptiveStop stop);

/// The same records for a sequence of uniform refinements.
AdaptiveHistory uniform_history(const Formulation& form, const SimplicialMesh& mesh0, const ManufacturedCase& mc,
                                int levels);

/// Log-log interpolation of eta over dofs; NaN outside the sampled range.
double eta_at_dofs(const AdaptiveHistory& h, double dofs);

}  // namespace dpg
