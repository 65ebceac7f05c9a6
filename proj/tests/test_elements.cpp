#include <doctest.h>

#include <random>

#include "dpg/basis.hpp"
#include "dpg/geometry.hpp"
#include "dpg/quadrature.hpp"
#include "oracles.hpp"

using namespace dpg;

namespace {

double integrate_monomial(const QuadratureRule& r, int a, int b, int c) {
    double s = 0;
    for (int q = 0; q < r.size(); ++q) {
        double v = std::pow(r.points(q, 0), a) * std::pow(r.points(q, 1), b);
        if (r.dim == 3) v *= std::pow(r.points(q, 2), c);
        s += r.weights(q) * v;
    }
    return s;
}

std::vector<std::array<int, 3>> exponents(int dim, int p) {
    std::vector<std::array<int, 3>> e;
    for (int a = 0; a <= p; ++a)
        for (int b = 0; a + b <= p; ++b)
            if (dim == 2)
                e.push_back({a, b, 0});
            else
                for (int c = 0; a + b + c <= p; ++c) e.push_back({a, b, c});
    return e;
}

double mono(const Eigen::Vector3d& x, const std::array<int, 3>& e, int dim) {
    double v = std::pow(x(0), e[0]) * std::pow(x(1), e[1]);
    return dim == 3 ? v * std::pow(x(2), e[2]) : v;
}

// Rank of the generating set of a family (P_p, N_p = P_{p-1}^3 + x cross P_{p-1}^3,
// R_p = P_{p-1}^d + x P_{p-1}; 2D N_p is the rotated R_p) sampled at random points.
int generator_rank(Family f, int p, int dim) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    const int npts = 400;
    std::vector<Eigen::Vector3d> x(npts);
    for (auto& xi : x) xi = Eigen::Vector3d(u(rng), u(rng), dim == 3 ? u(rng) : 0.0);
    std::vector<Eigen::VectorXd> cols;  // stacked components
    const int nc = (f == Family::H1 || f == Family::L2) ? 1 : dim;
    auto add = [&](auto&& fn) {
        Eigen::VectorXd c(nc * npts);
        for (int q = 0; q < npts; ++q) {
            const Eigen::Vector3d v = fn(x[q]);
            for (int k = 0; k < nc; ++k) c(k * npts + q) = v(k);
        }
        cols.push_back(c);
    };
    switch (f) {
        case Family::H1:
        case Family::L2:
            for (auto e : exponents(dim, p)) add([&](const Eigen::Vector3d& y) { return Eigen::Vector3d(mono(y, e, dim), 0, 0); });
            break;
        case Family::HcurlFull:
        case Family::L2Vec:
            for (auto e : exponents(dim, p))
                for (int k = 0; k < dim; ++k)
                    add([&](const Eigen::Vector3d& y) { Eigen::Vector3d v = Eigen::Vector3d::Zero(); v(k) = mono(y, e, dim); return v; });
            break;
        case Family::Hdiv:
        case Family::Hcurl: {
            const bool rotate = f == Family::Hcurl && dim == 2;
            for (auto e : exponents(dim, p - 1))
                for (int k = 0; k < dim; ++k)
                    add([&](const Eigen::Vector3d& y) { Eigen::Vector3d v = Eigen::Vector3d::Zero(); v(k) = mono(y, e, dim); return v; });
            for (auto e : exponents(dim, p - 1)) {
                if (f == Family::Hdiv || rotate) {
                    add([&](const Eigen::Vector3d& y) {
                        Eigen::Vector3d v = y * mono(y, e, dim);
                        if (rotate) v = Eigen::Vector3d(-v(1), v(0), 0);
                        return v;
                    });
                } else {
                    for (int k = 0; k < 3; ++k)
                        add([&](const Eigen::Vector3d& y) {
                            Eigen::Vector3d ek = Eigen::Vector3d::Zero();
                            ek(k) = mono(y, e, dim);
                            return Eigen::Vector3d(y.cross(ek));
                        });
                }
            }
            break;
        }
    }
    Eigen::MatrixXd M(cols[0].size(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) M.col(j) = cols[j];
    return oracle::rank(M, 1e-9);
}

MatrixXd random_cell(int dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    while (true) {
        MatrixXd v(dim + 1, dim);
        for (int i = 0; i <= dim; ++i)
            for (int j = 0; j < dim; ++j) v(i, j) = u(rng);
        const CellGeometry g = CellGeometry::from_vertices(v);
        if (g.det > 0.05) return v;
    }
}

// Projection coefficients of a scalar function onto an orthonormal scalar basis.
VectorXd project_scalar(const ReferenceSpace& sp, const std::function<double(const Eigen::RowVectorXd&)>& fn) {
    const QuadratureRule r = quadrature_rule(sp.dim, 2 * sp.degree + 2);
    const RefTables t = sp.eval(r.points);
    VectorXd f(r.size());
    for (int q = 0; q < r.size(); ++q) f(q) = fn(r.points.row(q));
    return t.val[0].transpose() * r.weights.asDiagonal() * f;
}

}  // namespace

TEST_CASE("quadrature examples") {
    CHECK(integrate_monomial(quadrature_rule(2, 2), 2, 0, 0) == doctest::Approx(1.0 / 12).epsilon(1e-14));
    CHECK(quadrature_rule(3, 1).weights.sum() == doctest::Approx(1.0 / 6).epsilon(1e-14));
    CHECK(quadrature_rule(2, 0).weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS(quadrature_rule(2, kMaxQuadratureOrder + 1));
    CHECK_THROWS(quadrature_rule(3, -1));
}

TEST_CASE("quadrature is exact on monomials up to its order") {
    for (int dim : {2, 3}) {
        const int top = dim == 2 ? 20 : 14;
        for (int order : {1, 4, 7, top}) {
            const QuadratureRule r = quadrature_rule(dim, order);
            CHECK(r.weights.minCoeff() > 0);
            for (auto e : exponents(dim, order)) {
                const double exact = oracle::simplex_monomial(dim, e[0], e[1], e[2]);
                CHECK(std::abs(integrate_monomial(r, e[0], e[1], e[2]) - exact) <= 1e-13 * exact);
            }
        }
    }
}

TEST_CASE("basis dimension examples") {
    CHECK(ReferenceSpace::get(Family::H1, 2, 3)->n == 10);
    CHECK(ReferenceSpace::get(Family::Hcurl, 1, 3)->n == 6);
    CHECK(ReferenceSpace::get(Family::Hdiv, 1, 3)->n == 4);
}

TEST_CASE("basis dimensions match the rank of the generating sets") {
    for (int dim : {2, 3})
        for (Family f : {Family::H1, Family::Hcurl, Family::HcurlFull, Family::Hdiv, Family::L2, Family::L2Vec})
            for (int p = 1; p <= 6; ++p) {
                CAPTURE(family_name(f));
                CAPTURE(dim);
                CAPTURE(p);
                const int r = generator_rank(f, p, dim);
                CHECK(expected_dim(f, p, dim) == r);
                CHECK(ReferenceSpace::get(f, p, dim)->n == r);
            }
}

TEST_CASE("Gram matrices are positive definite on random cells") {
    std::mt19937 rng(5);
    for (int dim : {2, 3})
        for (Family f : {Family::H1, Family::Hcurl, Family::Hdiv, Family::L2})
            for (int p : {1, 3}) {
                const auto sp = ReferenceSpace::get(f, p, dim);
                const CellGeometry g = CellGeometry::from_vertices(random_cell(dim, rng));
                const PhysTables t = cell_tables(*sp, g, 2 * p, false);
                MatrixXd G = MatrixXd::Zero(sp->n, sp->n);
                for (const auto& v : t.val) G += v.transpose() * t.w.asDiagonal() * v;
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
                CHECK(es.eigenvalues().minCoeff() > 0);
                MESSAGE(family_name(f) << " p=" << p << " dim=" << dim << " cond "
                                       << es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
            }
}

TEST_CASE("exact sequence inclusions") {
    for (int dim : {2, 3})
        for (int p = 1; p <= 3; ++p) {
            const ExactSequenceResidual r = exact_sequence_check(p, dim);
            CHECK(r.grad < 1e-11);
            CHECK(r.curl < 1e-11);
            CHECK(r.div < 1e-11);
            CHECK(r.rot < 1e-11);
        }
}

TEST_CASE("pullbacks commute with exterior derivatives") {
    // Integration by parts against constants: int_K d(u) equals the boundary integral of
    // the matching trace, so the pulled-back derivative must be the derivative of the
    // pulled-back value.
    std::mt19937 rng(9);
    for (int dim : {2, 3})
        for (Family f : {Family::H1, Family::Hcurl, Family::Hdiv}) {
            const int p = 3;
            const auto sp = ReferenceSpace::get(f, p, dim);
            const CellGeometry g = CellGeometry::from_vertices(random_cell(dim, rng));
            const PhysTables t = cell_tables(*sp, g, 2 * p + 2, false);
            std::vector<VectorXd> vol;
            for (const auto& d : t.der) vol.push_back(d.transpose() * t.w);
            std::vector<VectorXd> bnd(vol.size(), VectorXd::Zero(sp->n));
            for (int i = 0; i <= dim; ++i) {
                const PhysTables ft = facet_tables(*sp, g, i, 2 * p + 2, false);
                const VectorXd& n = ft.normal;
                auto w = [&](int c) { return VectorXd(ft.val[c].transpose() * ft.w); };
                if (f == Family::H1) {
                    for (int k = 0; k < dim; ++k) bnd[k] += n(k) * w(0);
                } else if (f == Family::Hdiv) {
                    for (int k = 0; k < dim; ++k) bnd[0] += n(k) * w(k);
                } else if (dim == 2) {
                    bnd[0] += n(0) * w(1) - n(1) * w(0);
                } else {
                    bnd[0] += n(1) * w(2) - n(2) * w(1);
                    bnd[1] += n(2) * w(0) - n(0) * w(2);
                    bnd[2] += n(0) * w(1) - n(1) * w(0);
                }
            }
            double err = 0, scale = 0;
            for (size_t c = 0; c < vol.size(); ++c) {
                err = std::max(err, (vol[c] - bnd[c]).cwiseAbs().maxCoeff());
                scale = std::max(scale, vol[c].cwiseAbs().maxCoeff());
            }
            CAPTURE(family_name(f));
            CAPTURE(dim);
            CHECK(err < 1e-11 * std::max(1.0, scale));
        }
}

TEST_CASE("H(div) pullback preserves facet fluxes and scales the divergence by det") {
    std::mt19937 rng(21);
    const auto sp = ReferenceSpace::get(Family::Hdiv, 2, 3);
    const CellGeometry ref = CellGeometry::from_vertices(reference_vertices(3));
    const CellGeometry g = CellGeometry::from_vertices(random_cell(3, rng));
    auto flux = [&](const CellGeometry& geo, int i) {
        const PhysTables ft = facet_tables(*sp, geo, i, 6, false);
        VectorXd s = VectorXd::Zero(sp->n);
        for (int k = 0; k < 3; ++k) s += ft.normal(k) * ft.val[k].transpose() * ft.w;
        return s;
    };
    for (int i = 0; i < 4; ++i) CHECK((flux(g, i) - flux(ref, i)).cwiseAbs().maxCoeff() < 1e-12);
    const VectorXd div_ref = cell_tables(*sp, ref, 4, false).der[0].transpose() * cell_tables(*sp, ref, 4, false).w;
    const PhysTables tg = cell_tables(*sp, g, 4, false);
    const VectorXd div_phys = tg.der[0].transpose() * tg.w;
    CHECK((div_phys - div_ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant H1 function has zero gradient") {
    std::mt19937 rng(3);
    const auto sp = ReferenceSpace::get(Family::H1, 2, 3);
    const VectorXd c = project_scalar(*sp, [](const Eigen::RowVectorXd&) { return 1.0; });
    const PhysTables t = cell_tables(*sp, CellGeometry::from_vertices(random_cell(3, rng)), 4, false);
    CHECK(((t.val[0] * c).array() - 1.0).abs().maxCoeff() < 1e-13);
    for (const auto& d : t.der) CHECK((d * c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("facet trace matrices") {
    for (int i = 0; i < 4; ++i) CHECK(oracle::rank(facet_trace_matrix(Family::Hdiv, 1, 3, i)) == 1);
    for (int i = 0; i < 3; ++i) {
        const MatrixXd T = facet_trace_matrix(Family::H1, 2, 2, i);
        CHECK(oracle::rank(T) == 3);
        CHECK(oracle::rank(T) == T.rows());
    }
    // the barycentric coordinate of vertex i vanishes on the facet opposite vertex i
    const auto sp = ReferenceSpace::get(Family::H1, 2, 2);
    for (int i = 0; i < 3; ++i) {
        const VectorXd c = project_scalar(*sp, [i](const Eigen::RowVectorXd& x) {
            return i == 0 ? 1 - x(0) - x(1) : x(i - 1);
        });
        CHECK((facet_trace_matrix(Family::H1, 2, 2, i) * c).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((facet_trace_matrix(Family::H1, 2, 2, (i + 1) % 3) * c).norm() > 1e-3);
    }
    CHECK_THROWS(facet_trace_matrix(Family::L2, 1, 2, 0));
}
