#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dpg/common.hpp"
#include "dpg/quadrature.hpp"

namespace dpg {

/// Polynomial families of the exact sequence. HcurlFull is P_p^d with tangential
/// continuity; L2Vec is broken P_p^d.
enum class Family { H1, Hcurl, HcurlFull, Hdiv, L2, L2Vec };

std::string family_name(Family f);
Family parse_family(const std::string& name);

int family_ncomp(Family f, int dim);
/// Components of the exterior derivative: grad (dim), curl (3 or 1), div (1), none for L2.
int family_nderiv(Family f, int dim);
/// Dimension of the polynomial space from the closed-form count.
int expected_dim(Family f, int p, int dim);
bool has_trace(Family f);

/// Function values and exterior derivatives at a point set; each matrix is npts x n.
struct RefTables {
    int npts = 0;
    int n = 0;
    std::vector<MatrixXd> val;
    std::vector<MatrixXd> der;

    RefTables times(const MatrixXd& coeff) const;
};

/// Evaluates m functions at reference points: returns ncomp matrices npts x m.
using BatchEvaluator = std::function<std::vector<MatrixXc>(const MatrixXd& points)>;

/// A polynomial space on the reference simplex with an L2-orthonormal basis (psi)
/// and a dual basis (phi = psi * dual) for entity moment degrees of freedom.
///
/// Degrees of freedom are ordered vertices, edges, faces, interior; entities follow
/// lexicographic order of their local vertex lists. Entity moments are taken against
/// a canonical basis of trace bubbles in the entity's own parametrization, so two
/// cells sharing an entity agree on it whenever both list its vertices in ascending
/// global order.
class ReferenceSpace {
public:
    static std::shared_ptr<const ReferenceSpace> get(Family family, int p, int dim);

    Family family;
    int degree;
    int dim;
    int ncomp;
    int nderiv;
    int n;
    std::array<int, 4> dofs_per_entity{0, 0, 0, 0};  ///< by entity dimension
    int nboundary = 0;                               ///< dofs not attached to the interior

    /// Orthonormal basis tables at reference points.
    RefTables eval(const MatrixXd& points) const;
    /// Dual (entity-moment) basis tables.
    RefTables eval_dual(const MatrixXd& points) const;
    const MatrixXd& dual() const { return dual_; }

    /// Number of entities of dimension e on the reference simplex.
    int entity_count(int e) const;
    /// First local dof of entity `idx` of dimension `e`.
    int entity_offset(int e, int idx) const;

    /// Canonical trace bubbles of an entity dimension, tabulated on `rule`.
    struct EntityBasis {
        QuadratureRule rule;
        int ntr = 0;     ///< trace components
        MatrixXd basis;  ///< (ntr*npts) x nb, row c*npts + q
    };
    const EntityBasis& entity_bubbles(int e) const { return bubbles_[e]; }
    /// Orthonormal basis of the full facet trace space, on the canonical facet.
    const EntityBasis& facet_trace_space() const { return facet_trace_; }

    /// Boundary dof values of arbitrary functions on a simplex with the given vertex
    /// coordinates (rows); the evaluator receives points in the same frame.
    MatrixXc boundary_dofs(const MatrixXd& verts, const BatchEvaluator& f) const;

    ReferenceSpace(Family family, int p, int dim);

private:
    struct Generator {
        int kind;  // 0 Legendre product, 1 y*m, 2 y x (e_c m), 3 rotated y*m
        std::array<int, 3> a;
        int comp;
    };
    std::vector<Generator> gens_;
    MatrixXd coeff_;  // ngen x n
    MatrixXd dual_;   // n x n
    std::array<EntityBasis, 4> bubbles_;
    EntityBasis facet_trace_;

    void eval_generators(const MatrixXd& pts, std::vector<MatrixXd>& val, std::vector<MatrixXd>& jac) const;
    void build_dofs();
};

/// Reference simplex vertex coordinates ((dim+1) x dim).
MatrixXd reference_vertices(int dim);

/// Local vertex lists of the entities of dimension e, in lexicographic order.
std::vector<std::vector<int>> simplex_entities(int dim, int e);

/// Entity index (within dimension dim-1) of the facet opposite local vertex i.
inline int facet_entity_index(int dim, int local_facet) { return dim - local_facet; }

/// Points x0 + sum_k t_k (x_k - x0) for parameter points on an entity.
MatrixXd entity_points(const MatrixXd& verts, const std::vector<int>& ent, const MatrixXd& params);

/// Trace components (rows c*npts+q) of values on an entity with the given vertices.
/// H1: value; Hcurl: tangential components along x_k - x_0; Hdiv: normal component
/// against the unnormalized facet normal.
MatrixXc trace_components(Family f, int dim, const std::vector<MatrixXc>& vals, const MatrixXd& verts,
                          const std::vector<int>& ent);

/// Facet trace matrix: coefficients of the orthonormal basis traces on local facet
/// `local_facet` in the canonical facet trace basis (rows), columns = basis functions.
MatrixXd facet_trace_matrix(Family f, int p, int dim, int local_facet);

struct ExactSequenceResidual {
    double grad = 0.0;  ///< grad P_p into the H(curl) space
    double curl = 0.0;  ///< curl N_p into R_p (3D) or into P_{p-1} (2D)
    double div = 0.0;   ///< div R_p into P_{p-1}
    double rot = 0.0;   ///< 2D only: rot P_p into R_p
};
ExactSequenceResidual exact_sequence_check(int p, int dim);

}  // namespace dpg
