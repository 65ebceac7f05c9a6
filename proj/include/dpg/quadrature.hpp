#pragma once

#include "dpg/common.hpp"

namespace dpg {

/// Quadrature on the reference simplex {x_i >= 0, sum x_i <= 1} of dimension 0..3.
struct QuadratureRule {
    int dim = 0;
    int order = 0;
    MatrixXd points;   ///< npts x dim reference coordinates
    VectorXd weights;  ///< positive, summing to 1/dim!

    int size() const { return static_cast<int>(weights.size()); }
};

/// Highest order accepted by quadrature_rule.
constexpr int kMaxQuadratureOrder = 40;

/// Collapsed-coordinate Gauss rule exact for total degree <= order.
QuadratureRule quadrature_rule(int dim, int order);

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre01(int n, VectorXd& x, VectorXd& w);

}  // namespace dpg
