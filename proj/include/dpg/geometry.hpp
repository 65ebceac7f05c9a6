#pragma once

#include <memory>

#include "dpg/basis.hpp"
#include "dpg/mesh.hpp"

namespace dpg {

/// Affine map x = x0 + J xhat of one simplex.
struct CellGeometry {
    int dim = 0;
    MatrixXd verts;  ///< (dim+1) x dim physical vertex coordinates
    MatrixXd J, Jinv;
    double det = 0.0;  ///< signed

    static CellGeometry from_vertices(const MatrixXd& verts);
    static CellGeometry of(const SimplicialMesh& mesh, int cell);

    MatrixXd map(const MatrixXd& ref) const;
    MatrixXd to_reference(const MatrixXd& phys) const;
    double volume() const;
    double diameter() const;
    /// Outward unit normal of local facet i (opposite vertex i).
    VectorXd outward_normal(int local_facet) const;
};

/// Values and exterior derivatives of physical basis functions at physical points.
struct PhysTables {
    int npts = 0;
    int n = 0;
    MatrixXd x;                   ///< npts x dim
    VectorXd w;                   ///< physical quadrature weights
    VectorXd normal;              ///< facet tables only
    std::vector<MatrixXd> val;    ///< per component, npts x n
    std::vector<MatrixXd> der;    ///< per derivative component
};

/// Pulls reference tables back to the cell: H1 composition, covariant H(curl),
/// contravariant H(div) with 1/det, L2 scalar with 1/det, L2 vector by composition.
void pullback(Family f, const CellGeometry& g, const RefTables& ref, std::vector<MatrixXd>& val,
              std::vector<MatrixXd>& der);

/// Volume tables at a reference rule; `dual` selects the entity-moment basis.
PhysTables cell_tables(const ReferenceSpace& sp, const CellGeometry& g, int order, bool dual);
/// Tables on local facet i at a facet rule of the given order.
PhysTables facet_tables(const ReferenceSpace& sp, const CellGeometry& g, int local_facet, int order, bool dual);
/// Rule points of a local facet expressed in reference cell coordinates.
MatrixXd facet_reference_points(int dim, int local_facet, const QuadratureRule& rule);

}  // namespace dpg
