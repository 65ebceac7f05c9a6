#pragma once

#include <cstdint>

#include "dpg/error.hpp"

namespace dpg {

// ---- global broken matrices (small meshes only) ----

/// Dense broken system: rows are per-cell test coefficients stacked in cell order,
/// columns are global trial dofs.
struct BrokenSystem {
    MatrixXc G;  ///< block diagonal test Gram
    MatrixXc B;
    VectorXc l;
    std::vector<int> row_offset;  ///< first row of each cell
    std::vector<int> free;        ///< free global trial ids, ascending
    std::vector<int> field_free;  ///< free ids of field slots
    std::vector<int> iface_free;  ///< free ids of interface slots
    std::vector<int> iface_all;   ///< all interface ids, constrained included
};
BrokenSystem broken_system(const Discretization& disc, const ManufacturedCase* mc);

/// Globally conforming test functions (with the conforming subspace's boundary
/// conditions) as columns of broken test coefficients.
MatrixXc conforming_test_basis(const Discretization& disc, const BrokenSystem& bs);

/// Assembled X-norm Gram over all global trial dofs.
MatrixXc global_x_gram(const Discretization& disc);

/// Eigenvalues (ascending) of the pencil (M, X), X Hermitian positive definite.
VectorXd pencil_eigenvalues(const MatrixXc& M, const MatrixXc& X);

MatrixXc select(const MatrixXc& A, const std::vector<int>& rows, const std::vector<int>& cols);

// ---- inf-sup survey and broken stability ----

struct SurveyReport {
    std::string formulation;
    std::string mesh;
    int p = 1;
    double infsup = 0.0;      ///< discrete inf-sup of the broken form
    double c0 = 0.0;          ///< b0 over the conforming test subspace
    double chat = 0.0;        ///< b_hat over the broken test space
    double b0_norm = 0.0;     ///< continuity of b0 over the broken test space
    double c1_formula = 0.0;  ///< lower bound built from c0, chat, |b0|
    double b_norm = 0.0;      ///< continuity of b over the broken test space
};

SurveyReport survey(const Formulation& form, const SimplicialMesh& mesh, const std::string& mesh_name);
std::vector<SurveyReport> infsup_survey(const std::vector<std::string>& ids, const SimplicialMesh& mesh,
                                        const std::string& mesh_name, int p, SpaceMode mode);

/// 1/c1^2 = 1/c0^2 + (1/chat^2)(|b0|/c0 + 1)^2.
double c1_formula(double c0, double chat, double b0_norm);

struct BrokenStability {
    SurveyReport report;
    double c1_discrete = 0.0;
    double c1_formula = 0.0;
    bool pass = false;
};
BrokenStability broken_stability_bound(const Formulation& form, const SimplicialMesh& mesh,
                                       const std::string& mesh_name);

struct Annihilation {
    double conforming = 0.0;  ///< max relative |b_hat(x_hat, y)| over conforming y
    double witness = 0.0;     ///< same for one conforming function cut to a single cell
};
Annihilation annihilation_check(const Formulation& form, const SimplicialMesh& mesh);

// ---- duality of interface norms on the reference tetrahedron ----

enum class PairingKind { GradDiv, DivGrad, CurlTCurlD, CurlDCurlT };
std::string pairing_name(PairingKind k);
const std::vector<PairingKind>& all_pairings();

struct DualityResult {
    double quotient = 0.0;
    double dual = 0.0;
    double gap = 0.0;  ///< |quotient/dual - 1|
};

/// Trace of the degree-`sample_degree` polynomial with coefficients `sample` (in the
/// orthonormal basis of the pairing's source space); norms computed at degree q.
DualityResult duality_gap(PairingKind k, int q, int sample_degree, const VectorXd& sample);

/// Fixed random sample coefficients for the pairing's source space.
VectorXd duality_sample(PairingKind k, int sample_degree, std::uint64_t seed);

// ---- Fortin operators ----

enum class FortinKind { Grad, Curl, Div };
std::string fortin_name(FortinKind k);

/// Fortin operator into P_{p+3}, N_{p+3} or R_{p+3} on one tetrahedron: a B-space cut
/// out of the big space by constraint functionals and a square moment system on it.
struct FortinSystem {
    FortinKind kind = FortinKind::Grad;
    int p = 1;
    CellGeometry geom;
    std::shared_ptr<const ReferenceSpace> big;  ///< big space; coefficients refer to its orthonormal basis
    MatrixXd constraints;                       ///< rows: functionals defining the B-space
    MatrixXd bspace;                            ///< big-space coefficients of a B-space basis
    MatrixXd raw;                               ///< moment functionals on the big space (rows)
    MatrixXd reduce;                            ///< maps raw moment values to an independent set
    MatrixXd M;                                 ///< reduced moments of the B-space basis
    int rank = 0;                               ///< numerical rank of M
    int perp_dim = 0;  ///< dim of the flux complement (curl: P^{0,perp}, div: P^perp)
    Eigen::FullPivLU<MatrixXd> lu;
    std::shared_ptr<const void> probe;  ///< quadrature data of the cell

    int bdim() const { return static_cast<int>(bspace.cols()); }
    int mdim() const { return static_cast<int>(M.rows()); }
};

/// Builds the operator on the tetrahedron with the given vertex rows (default: the
/// reference tetrahedron). Throws with the numerical rank when M is not invertible.
FortinSystem fortin_build(FortinKind kind, int p, const MatrixXd& verts = MatrixXd());

/// Physical-point evaluator of m real functions: components x (npts x m).
using RealEvaluator = std::function<std::vector<MatrixXd>(const MatrixXd& points)>;

/// Big-space coefficients (columns) of the Fortin images of m functions.
MatrixXd fortin_apply(const FortinSystem& fs, const RealEvaluator& f);

/// Max relative residual of the defining moment identities over the m functions.
double fortin_moment_residual(const FortinSystem& fs, const RealEvaluator& f);

/// Max |constraint functionals| over the B-space basis relative to the constraint scale.
double bspace_constraint_residual(const FortinSystem& fs);

struct CommutingResidual {
    double grad = 0.0;   ///< |grad Pi^grad v - Pi^curl grad v| / |grad Pi^grad v|
    double curl = 0.0;   ///< |curl Pi^curl E - Pi^div curl E| / |curl Pi^curl E|
    double div = 0.0;    ///< |div Pi^div s - Pi_{p+2} div s| / |div Pi^div s|
    double chain = 0.0;  ///< |curl Pi^curl grad v| + |div Pi^div curl E| (relative)
};
/// Random samples of degree `deg`: `count` scalar, H(curl) and H(div) polynomials.
CommutingResidual fortin_commuting(const FortinSystem& g, const FortinSystem& c, const FortinSystem& d, int deg,
                                   int count, std::uint64_t seed);

/// Random polynomial samples of degree `deg` in the input family of a Fortin kind
/// (H1, full P^3 with curl, R with div), as an evaluator on the system's cell.
RealEvaluator fortin_samples(const FortinSystem& fs, int deg, int count, std::uint64_t seed);

struct FortinBound {
    double weighted = 0.0;  ///< operator norm with the L2 part scaled by 1/h
    double full = 0.0;      ///< operator norm in the plain graph norm
};
/// Operator norms measured over the input family at degree `deg`.
FortinBound fortin_bound(const FortinSystem& fs, int deg);

}  // namespace dpg
