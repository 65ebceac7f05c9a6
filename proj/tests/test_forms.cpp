#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dpg/error.hpp"
#include "dpg/system.hpp"
#include "oracles.hpp"

using namespace dpg;

namespace {

constexpr double kPi = std::numbers::pi;

Formulation catalog(const std::string& id, int p = 1, SpaceMode mode = SpaceMode::Guaranteed) {
    const ManufacturedCase mc = manufactured_case(default_case(id));
    return make_formulation(id, p, default_delta(mode), mode, &mc.coef);
}

SimplicialMesh reference_cell(int dim) {
    std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    std::array<int, 4> c{0, 1, 2, -1};
    if (dim == 3) v.push_back({0, 0, 1}), c[3] = 3;
    return make_mesh(dim, v, {c});
}

SimplicialMesh random_cell(int dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    while (true) {
        std::vector<Vec3> v;
        for (int i = 0; i <= dim; ++i) v.push_back({u(rng), u(rng), dim == 3 ? u(rng) : 0.0});
        std::array<int, 4> c{0, 1, 2, dim == 3 ? 3 : -1};
        SimplicialMesh m = make_mesh(dim, v, {c});
        if (cell_volume(m, 0) > 0.02) return m;
    }
}

VectorXc finite_difference_div(const Field& f, const Vec3& x, int dim, double h = 1e-5) {
    cplx s = 0;
    for (int k = 0; k < dim; ++k) {
        Vec3 e = Vec3::Zero();
        e(k) = h;
        s += (f(x + e)(k) - f(x - e)(k)) / (2 * h);
    }
    VectorXc r(1);
    r(0) = s;
    return r;
}

VectorXc finite_difference_curl(const Field& f, const Vec3& x, double h = 1e-5) {
    auto d = [&](int comp, int dir) {
        Vec3 e = Vec3::Zero();
        e(dir) = h;
        return (f(x + e)(comp) - f(x - e)(comp)) / (2 * h);
    };
    VectorXc r(3);
    r << d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1);
    return r;
}

}  // namespace

TEST_CASE("catalog dimension examples") {
    const Formulation pp = make_formulation("primal_poisson", 1, 3);
    CHECK(pp.trial_space(0)->n == 6);
    CHECK(pp.trial_space(1)->dofs_per_entity[1] == 2);
    CHECK(pp.test_space(0)->n == 15);

    const Formulation me = make_formulation("maxwell_primal_E", 1, 2, SpaceMode::Economy);
    CHECK(me.trial_space(0)->n == 6);
    const int q = 3;
    CHECK(me.test_space(0)->n == q * (q + 2) * (q + 3) / 2);

    for (int p : {1, 2, 3}) CHECK(make_formulation("strong_dcr", p, 3).num_interfaces() == 0);
}

TEST_CASE("make_formulation rejects invalid input") {
    CHECK_THROWS(make_formulation("no_such_form", 1, 3));
    CHECK_THROWS(make_formulation("primal_poisson", 0, 3));
    Coefficients bad = manufactured_case("maxwell_sine_3d").coef;
    bad.omega = 0;
    CHECK_THROWS(make_formulation("maxwell_primal_E", 1, 3, SpaceMode::Guaranteed, &bad));
}

TEST_CASE("H1 Gram of the constant on the reference triangle is its area") {
    const Formulation f = catalog("primal_poisson");
    const SimplicialMesh m = reference_cell(2);
    const Discretization disc(f, m);
    const auto sp = f.test_space(0);
    const QuadratureRule r = quadrature_rule(2, 2 * sp->degree);
    const RefTables t = sp->eval(r.points);
    const VectorXd c = t.val[0].transpose() * r.weights;  // projection of 1
    const MatrixXc G = y_gram(disc, 0);
    CHECK(std::abs((c.cast<cplx>().adjoint() * G * c.cast<cplx>())(0, 0) - 0.5) < 1e-13);
}

TEST_CASE("test Grams are Hermitian positive definite on random cells") {
    std::mt19937 rng(11);
    for (const auto& id : formulation_ids()) {
        const Formulation f = catalog(id);
        const SimplicialMesh m = random_cell(f.dim, rng);
        const Discretization disc(f, m);
        const MatrixXc G = y_gram(disc, 0);
        CAPTURE(id);
        CHECK((G - G.adjoint()).norm() <= 1e-13 * G.norm());
        CHECK(Eigen::LLT<MatrixXc>(G).info() == Eigen::Success);
        Eigen::SelfAdjointEigenSolver<MatrixXc> es(G);
        CHECK(es.eigenvalues().minCoeff() > 0);
    }
}

TEST_CASE("adjoint graph Gram without lower-order terms stays positive definite") {
    Coefficients c;
    c.alpha = MatrixXd::Identity(2, 2);
    c.beta = VectorXd::Zero(2);
    c.gamma = 0.0;
    const Formulation f = make_formulation("ultraweak_dcr", 1, 3, SpaceMode::Guaranteed, &c);
    const SimplicialMesh m = reference_cell(2);
    const Discretization disc(f, m);
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(y_gram(disc, 0));
    CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("manufactured cases") {
    const ManufacturedCase ps = manufactured_case("poisson_sine_2d");
    const Vec3 x(0.3, 0.7, 0);
    const double s = std::sin(kPi * x(0)) * std::sin(kPi * x(1));
    CHECK(std::abs(-ps.field("F2")(x)(0) - 2 * kPi * kPi * s) < 1e-12);
    CHECK(ps.has_exact);

    const ManufacturedCase mw = manufactured_case("maxwell_sine_3d");
    const Vec3 y(0.2, 0.45, 0.8);
    const VectorXc E = mw.field("E")(y);
    CHECK(std::abs(E(0) - std::sin(kPi * y(0)) * std::sin(kPi * y(1)) * std::sin(kPi * y(2))) < 1e-14);
    CHECK(std::abs(E(1)) == 0.0);
    CHECK(std::abs(E(2)) == 0.0);
    CHECK(mw.coef.eps == 1.0);
    CHECK(mw.coef.mu == 1.0);
    CHECK(mw.coef.omega == 1.0);

    const ManufacturedCase ls = manufactured_case("poisson_lshape_singular");
    CHECK_FALSE(ls.has_exact);
    CHECK(ls.field("F2")(x)(0) == cplx(-1.0));
    CHECK(ls.domain == Domain::LShape);

    CHECK_THROWS(manufactured_case("nope"));
}

TEST_CASE("exact fields reproduce the loads") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (const char* name : {"poisson_sine_2d", "dcr_sine_2d"}) {
        const ManufacturedCase mc = manufactured_case(name);
        for (int i = 0; i < 5; ++i) {
            const Vec3 x(u(rng), u(rng), 0);
            CHECK(std::abs(finite_difference_div(mc.field("sigma"), x, 2)(0) - mc.field("div_sigma")(x)(0)) < 1e-7);
            CHECK(std::abs(finite_difference_div(mc.field("grad_u"), x, 2)(0) + 2 * kPi * kPi * mc.field("u")(x)(0)) <
                  1e-6);
        }
    }
    const ManufacturedCase mw = manufactured_case("maxwell_sine_3d");
    const cplx I(0, 1);
    for (int i = 0; i < 5; ++i) {
        const Vec3 x(u(rng), u(rng), u(rng));
        const double w = mw.coef.omega, eps = mw.coef.eps, mu = mw.coef.mu;
        CHECK((finite_difference_curl(mw.field("E"), x) - mw.field("curl_E")(x)).norm() < 1e-7);
        CHECK((finite_difference_curl(mw.field("E"), x) - I * w * mu * mw.field("H")(x)).norm() < 1e-7);
        CHECK((I * w * eps * mw.field("E")(x) + finite_difference_curl(mw.field("H"), x) - mw.field("J")(x)).norm() <
              1e-6);
    }
}

TEST_CASE("essential boundary constraints") {
    const SimplicialMesh m2 = build_structured(Domain::UnitSquare, 1);
    {
        const Discretization d(catalog("primal_poisson"), m2);
        CHECK(d.layout.slots[0].ndofs == 9);
        CHECK(d.constrained.size() == 8);
        for (int g : d.constrained) CHECK(g < d.layout.offset[1]);
    }
    {
        const Discretization d(catalog("strong_dcr"), m2);
        const int u0 = d.layout.offset[1];
        int boundary = 0;
        for (char b : d.layout.slots[1].on_boundary) boundary += b;
        CHECK(static_cast<int>(d.constrained.size()) == boundary);
        for (int g : d.constrained) CHECK(g >= u0);
    }
    {
        const SimplicialMesh c = build_structured(Domain::UnitCube, 1);
        const Discretization d(catalog("maxwell_primal_E"), c);
        std::vector<int> expected;
        for (int i = 0; i < d.layout.slots[0].ndofs; ++i)
            if (d.layout.slots[0].on_boundary[i]) expected.push_back(d.layout.offset[0] + i);
        CHECK(d.constrained == expected);
    }
}

TEST_CASE("sign consistency: exact fields and traces leave a vanishing residual") {
    for (const auto& id : formulation_ids()) {
        CAPTURE(id);
        const ManufacturedCase mc = manufactured_case(default_case(id));
        const Formulation f = catalog(id);
        SimplicialMesh m = build_structured(mc.domain, 1);
        std::vector<double> res;
        const int levels = is_maxwell(id) ? 2 : 3;
        for (int l = 0; l < levels; ++l) {
            if (l > 0) m = refine_uniform(m);
            res.push_back(exact_residual_norm(Discretization(f, m), mc));
        }
        // the residual is at quadrature roundoff, or it decays at least at the expected rate
        double rate = INFINITY;
        for (const auto& s : f.trial) rate = std::min(rate, mc.expected_rate(s.name, f.p));
        const bool roundoff = res.back() < 1e-9;
        const bool decays = std::log2(res[res.size() - 2] / res.back()) >= rate - 0.2;
        CHECK((roundoff || decays));

        // flipping any interface sign breaks consistency
        const SimplicialMesh coarse = build_structured(mc.domain, 1);
        const double base = exact_residual_norm(Discretization(f, coarse), mc);
        for (int s = f.num_fields(); s < static_cast<int>(f.trial.size()); ++s) {
            Formulation g = f;
            g.trial[s].exact_sign = -g.trial[s].exact_sign;
            CHECK(exact_residual_norm(Discretization(g, coarse), mc) > 10 * base);
        }
    }
}

TEST_CASE("the trial argument enters linearly in complex formulations") {
    ManufacturedCase mc = manufactured_case("maxwell_sine_3d");
    const Formulation f = catalog("maxwell_ultraweak");
    const SimplicialMesh m = build_structured(Domain::UnitCube, 1);
    const Discretization d(f, m);
    const VectorXc b = exact_action(d, 0, mc);
    const cplx c(0.3, -0.7);
    for (auto& [k, fld] : mc.fields) {
        Field base = fld;
        fld = [base, c](const Vec3& x) { return VectorXc(c * base(x)); };
    }
    const VectorXc bc = exact_action(d, 0, mc);
    CHECK((bc - c * b).norm() < 1e-12 * b.norm());
    CHECK((bc - std::conj(c) * b).norm() > 1e-3 * b.norm());
}
