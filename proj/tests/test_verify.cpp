#include <doctest.h>

#include <cmath>

#include "dpg/geometry.hpp"
#include "dpg/verify.hpp"

using namespace dpg;

namespace {

Formulation catalog(const std::string& id, int p = 1) {
    const ManufacturedCase mc = manufactured_case(default_case(id));
    return make_formulation(id, p, default_delta(SpaceMode::Guaranteed), SpaceMode::Guaranteed, &mc.coef);
}

// Evaluator of a single function given pointwise by its components.
RealEvaluator single(int ncomp, std::function<Eigen::Vector3d(const Eigen::Vector3d&)> fn) {
    return [ncomp, fn](const MatrixXd& pts) {
        std::vector<MatrixXd> out(ncomp, MatrixXd(pts.rows(), 1));
        for (int q = 0; q < pts.rows(); ++q) {
            const Eigen::Vector3d v = fn(pts.row(q).transpose());
            for (int c = 0; c < ncomp; ++c) out[c](q, 0) = v(c);
        }
        return out;
    };
}

struct Image {
    std::vector<VectorXd> val, der;
    VectorXd w;
};

// Values and derivatives of big-space coefficients at a quadrature rule on the reference cell.
Image image(const FortinSystem& fs, const VectorXd& coeff, int order = 16) {
    const QuadratureRule r = quadrature_rule(3, order);
    const RefTables t = fs.big->eval(r.points);
    Image im;
    for (const auto& v : t.val) im.val.push_back(v * coeff);
    for (const auto& d : t.der) im.der.push_back(d * coeff);
    im.w = r.weights;
    return im;
}

double l2(const std::vector<VectorXd>& a, const VectorXd& w) {
    double s = 0;
    for (const auto& c : a) s += c.cwiseAbs2().dot(w);
    return std::sqrt(s);
}

std::vector<VectorXd> diff(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
    std::vector<VectorXd> r;
    for (size_t i = 0; i < a.size(); ++i) r.push_back(a[i] - b[i]);
    return r;
}

}  // namespace

TEST_CASE("Fortin systems are square and unisolvent") {
    for (int p : {1, 2}) {
        for (FortinKind k : {FortinKind::Grad, FortinKind::Curl, FortinKind::Div}) {
            const FortinSystem fs = fortin_build(k, p);
            CAPTURE(fortin_name(k));
            CAPTURE(p);
            CHECK(fs.mdim() == fs.bdim());
            CHECK(fs.rank == fs.bdim());
            CHECK(bspace_constraint_residual(fs) < 1e-12);
            if (k == FortinKind::Curl) CHECK(fs.perp_dim == 6 * p + 11);
        }
    }
    CHECK(fortin_build(FortinKind::Grad, 1).bdim() == 13);
}

TEST_CASE("Fortin moment identities") {
    const FortinSystem g = fortin_build(FortinKind::Grad, 1);
    const FortinSystem d = fortin_build(FortinKind::Div, 1);
    CHECK(fortin_moment_residual(g, single(1, [](const Eigen::Vector3d& x) {
              return Eigen::Vector3d(x(0) * x(1) * x(2), 0, 0);
          })) < 1e-10);
    CHECK(fortin_moment_residual(d, single(3, [](const Eigen::Vector3d& x) {
              return Eigen::Vector3d(x(0) * x(0), 0, 0);
          })) < 1e-10);
    for (const FortinSystem* fs : {&g, &d}) CHECK(fortin_moment_residual(*fs, fortin_samples(*fs, 7, 20, 3)) < 1e-10);

    const VectorXd one = fortin_apply(g, single(1, [](const Eigen::Vector3d&) { return Eigen::Vector3d(1, 0, 0); }));
    const Image im = image(g, one);
    CHECK((im.val[0].array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("Fortin operators commute for the gradient and divergence") {
    const FortinSystem g = fortin_build(FortinKind::Grad, 1);
    const FortinSystem c = fortin_build(FortinKind::Curl, 1);
    const FortinSystem d = fortin_build(FortinKind::Div, 1);

    // v = x^2 y
    const VectorXd pg = fortin_apply(g, single(1, [](const Eigen::Vector3d& x) {
        return Eigen::Vector3d(x(0) * x(0) * x(1), 0, 0);
    }));
    const VectorXd pc = fortin_apply(c, single(3, [](const Eigen::Vector3d& x) {
        return Eigen::Vector3d(2 * x(0) * x(1), x(0) * x(0), 0);
    }));
    const Image ig = image(g, pg), ic = image(c, pc);
    CHECK(l2(diff(ig.der, ic.val), ig.w) < 1e-10 * l2(ig.der, ig.w));
    // curl of the projected gradient vanishes
    CHECK(l2(ic.der, ic.w) < 1e-10 * l2(ic.val, ic.w));

    // divergence-free input stays divergence-free
    const VectorXd pd = fortin_apply(d, single(3, [](const Eigen::Vector3d& x) {
        return Eigen::Vector3d(x(1), x(2), x(0));
    }));
    const Image id = image(d, pd);
    CHECK(l2(id.der, id.w) < 1e-10 * l2(id.val, id.w));

    for (int p : {1, 2}) {
        const FortinSystem gp = fortin_build(FortinKind::Grad, p);
        const FortinSystem cp = fortin_build(FortinKind::Curl, p);
        const FortinSystem dp = fortin_build(FortinKind::Div, p);
        const CommutingResidual r = fortin_commuting(gp, cp, dp, p + 6, 10, 5);
        CHECK(r.grad < 1e-9);
        CHECK(r.div < 1e-9);
        CHECK(r.chain < 1e-9);
    }
}

TEST_CASE("Fortin weighted bound is dilation invariant") {
    MatrixXd ref = reference_vertices(3);
    MatrixXd sheared = reference_vertices(3);
    sheared.col(0) += 0.7 * ref.col(1) + 0.3 * ref.col(2);
    MatrixXd aspect = ref;
    aspect.col(2) *= 10.0;
    for (FortinKind k : {FortinKind::Grad, FortinKind::Curl}) {
        for (const MatrixXd* shape : {&ref, &sheared}) {
            const double base = fortin_bound(fortin_build(k, 1, *shape), 3).weighted;
            CHECK(std::isfinite(base));
            CHECK(base > 0);
            const std::vector<double> lambdas = k == FortinKind::Grad ? std::vector<double>{1e-2, 1e-1, 10.0}
                                                                      : std::vector<double>{1e-2};
            for (double lam : lambdas) {
                const double w = fortin_bound(fortin_build(k, 1, *shape * lam), 3).weighted;
                CHECK(std::abs(w / base - 1) < 1e-8);
            }
        }
    }
    const FortinBound r = fortin_bound(fortin_build(FortinKind::Grad, 1, ref), 3);
    const FortinBound a = fortin_bound(fortin_build(FortinKind::Grad, 1, aspect), 3);
    CHECK(std::isfinite(r.full));
    CHECK(r.full > 0);
    MESSAGE("grad p=1 full-norm constant: reference " << r.full << ", aspect 10 " << a.full);
}

TEST_CASE("duality gaps shrink with the discretization degree") {
    const int p = 1;
    for (PairingKind k : all_pairings()) {
        const VectorXd s = duality_sample(k, p, 77);
        double prev = INFINITY;
        for (int q : {p + 2, p + 4, p + 6}) {
            const DualityResult r = duality_gap(k, q, p, s);
            CAPTURE(pairing_name(k));
            CAPTURE(q);
            CHECK(r.quotient > 0);
            CHECK(r.dual > 0);
            CHECK(r.gap <= prev);
            prev = r.gap;
        }
        CHECK(prev < 0.05);
        CHECK_THROWS(duality_gap(k, p + 1, p, s));
    }
}

TEST_CASE("constant normal trace and zero trace") {
    // sigma = (x - c) / r has unit normal component on every face (c incenter, r inradius)
    const double r = 0.5 / (1.5 + std::sqrt(3.0) / 2);
    const auto sp = ReferenceSpace::get(Family::Hdiv, 1, 3);
    const QuadratureRule rule = quadrature_rule(3, 4);
    const RefTables t = sp->eval(rule.points);
    VectorXd c = VectorXd::Zero(sp->n);
    for (int k = 0; k < 3; ++k) c += t.val[k].transpose() * rule.weights.asDiagonal() * ((rule.points.col(k).array() - r) / r).matrix();
    const DualityResult d = duality_gap(PairingKind::DivGrad, 7, 1, c);
    CHECK(d.quotient > 0);
    CHECK(d.gap < 0.05);

    const DualityResult z = duality_gap(PairingKind::GradDiv, 5, 1, VectorXd::Zero(ReferenceSpace::get(Family::H1, 1, 3)->n));
    CHECK(std::abs(z.quotient) < 1e-14);
    CHECK(std::abs(z.dual) < 1e-14);
}

TEST_CASE("interface annihilation") {
    const Annihilation a = annihilation_check(catalog("primal_poisson"), build_structured(Domain::UnitSquare, 1));
    CHECK(a.conforming < 1e-12);
    CHECK(a.witness > 1e-3);
    const Annihilation m = annihilation_check(catalog("maxwell_primal_E"), build_structured(Domain::UnitCube, 1));
    CHECK(m.conforming < 1e-12);
    CHECK(m.witness > 1e-3);
}

TEST_CASE("inf-sup survey") {
    const SurveyReport pp = survey(catalog("primal_poisson"), build_structured(Domain::UnitSquare, 1), "square2");
    CHECK(pp.c0 > 0);
    const std::vector<std::string> dcr{"primal_dcr", "ultraweak_dcr", "mixed_dcr", "dual_mixed_dcr", "strong_dcr"};
    for (const auto& r : infsup_survey(dcr, build_structured(Domain::UnitSquare, 1), "square2", 1, SpaceMode::Guaranteed)) {
        CAPTURE(r.formulation);
        CHECK(r.infsup > 0);
        CHECK(r.infsup <= r.b_norm * (1 + 1e-12));
        for (double c : {r.c0, r.chat, r.b0_norm, r.c1_formula, r.b_norm}) CHECK(c >= 0);
    }
    const SurveyReport me = survey(catalog("maxwell_primal_E"), build_structured(Domain::UnitCube, 1), "cube5");
    CHECK(me.infsup > 0);
}

TEST_CASE("broken stability bound") {
    for (int n : {1, 2}) {
        const BrokenStability b =
            broken_stability_bound(catalog("primal_poisson"), build_structured(Domain::UnitSquare, n), "square");
        const auto& r = b.report;
        const double inv = 1 / (r.c0 * r.c0) + std::pow((r.b0_norm / r.c0 + 1) / r.chat, 2);
        CHECK(b.c1_formula == doctest::Approx(1 / std::sqrt(inv)).epsilon(1e-12));
        CHECK(b.c1_discrete >= b.c1_formula - 1e-10);
        CHECK(b.c1_discrete <= r.b_norm);
        CHECK(b.pass);
    }
    // without interface variables the broken and conforming problems coincide
    const BrokenStability s = broken_stability_bound(catalog("strong_dcr"), build_structured(Domain::UnitSquare, 2), "square8");
    CHECK(s.c1_discrete == doctest::Approx(s.report.c0).epsilon(1e-10));
}
