#include <doctest.h>

#include <numeric>
#include <random>

#include "dpg/adapt.hpp"

using namespace dpg;

namespace {

EstimatorField field(std::vector<double> e) {
    EstimatorField f;
    f.eta_K = std::move(e);
    double s = 0;
    for (double x : f.eta_K) s += x * x;
    f.eta = std::sqrt(s);
    return f;
}

double marked_sum(const EstimatorField& f, const std::set<int>& m) {
    double s = 0;
    for (int k : m) s += f.eta_K[k] * f.eta_K[k];
    return s;
}

Formulation poisson(const ManufacturedCase& mc, int p = 1) {
    return make_formulation("primal_poisson", p, default_delta(SpaceMode::Guaranteed), SpaceMode::Guaranteed, &mc.coef);
}

}  // namespace

TEST_CASE("marking examples") {
    const EstimatorField f = field({0.5, 0.0, 2.0, 1.0, 2.0});
    CHECK(mark(f, 1.0) == std::set<int>{0, 2, 3, 4});
    CHECK(mark(f, 1e-9) == std::set<int>{2});
    CHECK(mark(field({3.0, 4.0}), 0.8) == std::set<int>{0, 1});
    CHECK(mark(field({}), 0.5).empty());
    CHECK_THROWS(mark(f, 0.0));
    CHECK_THROWS(mark(f, 1.5));
    CHECK_THROWS(mark(f, -0.1));
}

TEST_CASE("marked sets are greedy, sufficient and minimal") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> e(1 + trial % 17);
        for (auto& x : e) x = std::floor(u(rng) * 8) / 4;  // repeated values exercise the tie-break
        const EstimatorField f = field(e);
        if (f.eta == 0) continue;
        const double theta = 0.1 + 0.9 * u(rng);
        const std::set<int> m = mark(f, theta);
        const double target = theta * theta * f.eta * f.eta;
        CHECK(marked_sum(f, m) >= target * (1 - 1e-14));
        // smallest member, the highest id among equal indicators
        int smallest = *m.begin();
        for (int k : m)
            if (f.eta_K[k] < f.eta_K[smallest] || (f.eta_K[k] == f.eta_K[smallest] && k > smallest)) smallest = k;
        std::set<int> less = m;
        less.erase(smallest);
        CHECK(marked_sum(f, less) <= target);
        // every unmarked cell is no larger than the smallest marked one
        for (int k = 0; k < static_cast<int>(e.size()); ++k)
            if (!m.count(k)) CHECK(e[k] <= f.eta_K[smallest]);
    }
}

TEST_CASE("adaptive loop on the L-shape") {
    const ManufacturedCase mc = manufactured_case("poisson_lshape_singular");
    const Formulation f = poisson(mc);
    const AdaptiveResult r = adaptive_solve(f, build_structured(Domain::LShape, 1), mc, 0.5, {10});
    const auto& h = r.history.records;
    REQUIRE(h.size() == 10);
    for (size_t i = 1; i < h.size(); ++i) {
        CHECK(h[i].eta < h[i - 1].eta);
        CHECK(h[i].dofs > h[i - 1].dofs);
        CHECK(h[i].cells > h[i - 1].cells);
        CHECK(std::isnan(h[i].error));
    }
    CHECK(check_conformity(r.mesh).empty());
    CHECK(r.estimator.eta == h.back().eta);
}

TEST_CASE("max dofs equal to the initial dofs stops after one iteration") {
    const ManufacturedCase mc = manufactured_case("poisson_lshape_singular");
    const Formulation f = poisson(mc);
    const SimplicialMesh m0 = build_structured(Domain::LShape, 1);
    const AdaptiveResult first = adaptive_solve(f, m0, mc, 0.5, {1});
    const AdaptiveResult r = adaptive_solve(f, m0, mc, 0.5, {10, first.history.records[0].dofs});
    CHECK(r.history.records.size() == 1);
}

TEST_CASE("smooth case: adaptive and uniform refinement are comparable") {
    const ManufacturedCase mc = manufactured_case("poisson_sine_2d");
    const Formulation f = poisson(mc);
    const SimplicialMesh m0 = build_structured(Domain::UnitSquare, 2);
    const AdaptiveResult a = adaptive_solve(f, m0, mc, 0.5, {8});
    const AdaptiveHistory u = uniform_history(f, m0, mc, 4);
    int compared = 0;
    for (const auto& rec : a.history.records) {
        const double ue = eta_at_dofs(u, rec.dofs);
        if (std::isnan(ue)) continue;
        ++compared;
        CHECK(rec.eta / ue < 2.0);
        CHECK(ue / rec.eta < 2.0);
        CHECK(std::isfinite(rec.error));
    }
    CHECK(compared >= 3);
}

TEST_CASE("adaptive beats uniform refinement on the L-shape") {
    const ManufacturedCase mc = manufactured_case("poisson_lshape_singular");
    const Formulation f = poisson(mc);
    const SimplicialMesh m0 = build_structured(Domain::LShape, 1);
    const AdaptiveHistory u = uniform_history(f, m0, mc, 5);
    for (double theta : {0.3, 0.5, 0.7}) {
        CAPTURE(theta);
        const AdaptiveResult a = adaptive_solve(f, m0, mc, theta, {10});
        const auto& last = a.history.records.back();
        const double ue = eta_at_dofs(u, last.dofs);
        REQUIRE(std::isfinite(ue));
        CHECK(last.eta < ue);
    }
}

TEST_CASE("eta interpolation over dofs") {
    AdaptiveHistory h;
    h.records = {{0, 100, 1.0}, {1, 400, 0.25}};
    CHECK(eta_at_dofs(h, 100) == doctest::Approx(1.0));
    CHECK(eta_at_dofs(h, 200) == doctest::Approx(0.5));
    CHECK(std::isnan(eta_at_dofs(h, 50)));
    CHECK(std::isnan(eta_at_dofs(h, 401)));
}
