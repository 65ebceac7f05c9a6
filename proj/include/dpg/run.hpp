#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dpg/adapt.hpp"
#include "dpg/config.hpp"
#include "dpg/report.hpp"

namespace dpg {

/// Least-squares slope of log(e) against log(h); NaN with fewer than two finite
/// positive samples.
double fitted_rate(const std::vector<double>& h, const std::vector<double>& e);

/// Mesh a config starts from: the case domain (or override) with n0 subdivisions.
SimplicialMesh initial_mesh(const StudyConfig& cfg, const ManufacturedCase& mc);
Formulation config_formulation(const StudyConfig& cfg, const ManufacturedCase& mc);
ManufacturedCase config_case(const StudyConfig& cfg);

/// Uniform refinement study: level, h, dofs, cells, per-slot errors, error, eta, rates.
Table run_study(const StudyConfig& cfg);
/// Adaptive history: iteration, dofs, eta, error (NaN without exact solution), cells.
Table run_adaptive(const StudyConfig& cfg);
Table history_table(const AdaptiveHistory& h);

struct VerifyRecord {
    std::string suite;
    std::string case_name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};
/// Runs one named suite ("all" runs every suite in a fixed order).
std::vector<VerifyRecord> run_verify(const StudyConfig& cfg);
Table verify_table(const std::vector<VerifyRecord>& recs);

/// JSON description of the formulation, its slots and the initial discretization.
std::string describe(const StudyConfig& cfg);

/// Executes the configured mode, writes the report to cfg.out and returns the exit
/// status (nonzero when a verify check fails).
int run_config(const StudyConfig& cfg);

/// (dof id, real, imag) and (cell id, eta_K) dumps.
Table solution_table(const VectorXc& x);
Table estimator_table(const EstimatorField& est);

}  // namespace dpg
