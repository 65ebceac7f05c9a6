#include "dpg/forms.hpp"

#include <algorithm>

namespace dpg {

namespace {

const cplx I1(0.0, 1.0);

MatrixXc eye(int n, cplx c) { return c * MatrixXc::Identity(n, n); }

Term val(int slot, cplx c, int n) { return {slot, Op::Value, eye(n, c)}; }
Term der(int slot, cplx c, int n) { return {slot, Op::D, eye(n, c)}; }
Term mat(int slot, Op op, const MatrixXd& m) { return {slot, op, m.cast<cplx>()}; }

void add_pair(std::vector<Pairing>& v, Expr l, Expr r) { v.push_back({std::move(l), std::move(r)}); }

Coefficients default_coefficients(const std::string& id, int dim) {
    if (is_maxwell(id)) return manufactured_case("maxwell_sine_3d").coef;
    if (id == "primal_poisson") {
        Coefficients c;
        c.alpha = MatrixXd::Identity(dim, dim);
        c.beta = VectorXd::Zero(dim);
        return c;
    }
    if (dim == 2) return manufactured_case("dcr_sine_2d").coef;
    Coefficients c;
    c.alpha = MatrixXd::Identity(dim, dim);
    c.beta = VectorXd::Zero(dim);
    c.gamma = 1.0;
    return c;
}

void build_dcr(Formulation& f) {
    const int d = f.dim;
    const int p = f.p;
    const int q = f.p + f.delta;
    const MatrixXd alpha = f.coef.alpha;
    const MatrixXd a = alpha.inverse();
    const VectorXd beta = f.coef.beta;
    const double gamma = f.coef.gamma;
    require(alpha.rows() == d && beta.size() == d, "diffusion coefficients have the wrong dimension");
    const std::string& id = f.id;
    auto F = [](const ManufacturedCase& mc, const std::string& k) { return mc.field(k); };
    auto neg = [](Field g) { return Field([g](const Vec3& x) { return VectorXc(-g(x)); }); };

    if (id == "primal_poisson" || id == "primal_dcr") {
        f.trial = {{"u", Family::H1, p + 1, SlotKind::Field, true, "u", "grad_u"},
                   {"sigma_n", Family::Hdiv, p + 1, SlotKind::Interface, false, "sigma", "", -1.0}};
        f.test = {{"v", Family::H1, q, true}};
        add_pair(f.b0, {mat(0, Op::D, a), mat(0, Op::Value, a * beta)}, {der(0, 1.0, d)});
        if (gamma != 0.0) add_pair(f.b0, {val(0, gamma, 1)}, {val(0, 1.0, 1)});
        f.bhat = {{1, TraceOp::NormalDot, 0, TraceOp::Value, 1.0}};
        add_pair(f.ygram, {der(0, 1.0, d)}, {der(0, 1.0, d)});
        add_pair(f.ygram, {val(0, 1.0, 1)}, {val(0, 1.0, 1)});
        f.load_builder = [=](const ManufacturedCase& mc) {
            return std::vector<LoadTerm>{{neg(F(mc, "F2")), {val(0, 1.0, 1)}}};
        };
        return;
    }
    // Remaining forms test (first equation, second equation) with slots (tau, v).
    f.load_builder = [=](const ManufacturedCase& mc) {
        return std::vector<LoadTerm>{{F(mc, "F1"), {val(0, 1.0, d)}}, {F(mc, "F2"), {val(1, 1.0, 1)}}};
    };
    // A*(tau, v) = (alpha tau - grad v, div tau - beta.tau - gamma v)
    Expr adj1 = {mat(0, Op::Value, alpha), der(1, -1.0, d)};
    Expr adj2 = {der(0, 1.0, 1), mat(0, Op::Value, -beta.transpose()), val(1, -gamma, 1)};
    if (id == "ultraweak_dcr") {
        f.graph_norm = true;
        f.trial = {{"sigma", Family::L2Vec, p, SlotKind::Field, false, "sigma", ""},
                   {"u", Family::L2, p, SlotKind::Field, false, "u", ""},
                   {"u_hat", Family::H1, p + 1, SlotKind::Interface, true, "u", ""},
                   {"sigma_n", Family::Hdiv, p + 1, SlotKind::Interface, false, "sigma", ""}};
        f.test = {{"tau", Family::Hdiv, q, false}, {"v", Family::H1, q, true}};
        // (x, A* y): the test-side expressions get conjugated by the pairing.
        Expr a1 = adj1, a2 = adj2;
        add_pair(f.b0, {val(0, 1.0, d)}, a1);
        add_pair(f.b0, {val(1, 1.0, 1)}, a2);
        f.bhat = {{3, TraceOp::NormalDot, 1, TraceOp::Value, 1.0}, {2, TraceOp::Value, 0, TraceOp::NormalDot, -1.0}};
        add_pair(f.ygram, {val(0, 1.0, d)}, {val(0, 1.0, d)});
        add_pair(f.ygram, {val(1, 1.0, 1)}, {val(1, 1.0, 1)});
        add_pair(f.ygram, adj1, adj1);
        add_pair(f.ygram, adj2, adj2);
    } else if (id == "mixed_dcr") {
        f.trial = {{"sigma", Family::L2Vec, p, SlotKind::Field, false, "sigma", ""},
                   {"u", Family::H1, p + 1, SlotKind::Field, true, "u", "grad_u"},
                   {"sigma_n", Family::Hdiv, p + 1, SlotKind::Interface, false, "sigma", ""}};
        f.test = {{"tau", Family::L2Vec, q, false}, {"v", Family::H1, q, true}};
        add_pair(f.b0, {mat(0, Op::Value, alpha), der(1, -1.0, d), mat(1, Op::Value, -beta)}, {val(0, 1.0, d)});
        add_pair(f.b0, {val(0, -1.0, d)}, {der(1, 1.0, d)});
        if (gamma != 0.0) add_pair(f.b0, {val(1, -gamma, 1)}, {val(1, 1.0, 1)});
        f.bhat = {{2, TraceOp::NormalDot, 1, TraceOp::Value, 1.0}};
        add_pair(f.ygram, {val(0, 1.0, d)}, {val(0, 1.0, d)});
        add_pair(f.ygram, {der(1, 1.0, d)}, {der(1, 1.0, d)});
        add_pair(f.ygram, {val(1, 1.0, 1)}, {val(1, 1.0, 1)});
    } else if (id == "dual_mixed_dcr") {
        f.trial = {{"sigma", Family::Hdiv, p + 1, SlotKind::Field, false, "sigma", "div_sigma"},
                   {"u", Family::L2, p, SlotKind::Field, false, "u", ""},
                   {"u_hat", Family::H1, p + 1, SlotKind::Interface, true, "u", ""}};
        f.test = {{"tau", Family::Hdiv, q, false}, {"v", Family::L2, q, false}};
        add_pair(f.b0, {mat(0, Op::Value, alpha), mat(1, Op::Value, -beta)}, {val(0, 1.0, d)});
        add_pair(f.b0, {val(1, 1.0, 1)}, {der(0, 1.0, 1)});
        add_pair(f.b0, {der(0, 1.0, 1), val(1, -gamma, 1)}, {val(1, 1.0, 1)});
        f.bhat = {{2, TraceOp::Value, 0, TraceOp::NormalDot, -1.0}};
        add_pair(f.ygram, {val(0, 1.0, d)}, {val(0, 1.0, d)});
        add_pair(f.ygram, {der(0, 1.0, 1)}, {der(0, 1.0, 1)});
        add_pair(f.ygram, {val(1, 1.0, 1)}, {val(1, 1.0, 1)});
    } else if (id == "strong_dcr") {
        f.trial = {{"sigma", Family::Hdiv, p + 1, SlotKind::Field, false, "sigma", "div_sigma"},
                   {"u", Family::H1, p + 1, SlotKind::Field, true, "u", "grad_u"}};
        f.test = {{"tau", Family::L2Vec, q, false}, {"v", Family::L2, q, false}};
        add_pair(f.b0, {mat(0, Op::Value, alpha), der(1, -1.0, d), mat(1, Op::Value, -beta)}, {val(0, 1.0, d)});
        add_pair(f.b0, {der(0, 1.0, 1), val(1, -gamma, 1)}, {val(1, 1.0, 1)});
        add_pair(f.ygram, {val(0, 1.0, d)}, {val(0, 1.0, d)});
        add_pair(f.ygram, {val(1, 1.0, 1)}, {val(1, 1.0, 1)});
    } else {
        fail("unknown formulation: " + id);
    }
}

void build_maxwell(Formulation& f) {
    require(f.dim == 3, "Maxwell formulations are 3D only");
    f.complex_valued = true;
    const int p = f.p;
    const int q = f.p + f.delta;
    const double eps = f.coef.eps, mu = f.coef.mu, om = f.coef.omega;
    require(eps > 0 && mu > 0 && om > 0, "Maxwell coefficients must be positive");
    const bool econ = f.mode == SpaceMode::Economy;
    const Family FH = econ ? Family::Hcurl : Family::HcurlFull;
    const int hdeg = p;
    const int bdeg = econ ? p - 1 : p;
    const Family FI = econ ? Family::Hcurl : Family::HcurlFull;
    const int ideg = econ ? p : p + 1;
    const std::string& id = f.id;
    auto F = [](const ManufacturedCase& mc, const std::string& k) { return mc.field(k); };
    auto scaled = [](Field g, cplx c) { return Field([g, c](const Vec3& x) { return VectorXc(c * g(x)); }); };
    auto curl_norm = [&](int s) {
        add_pair(f.ygram, {val(s, 1.0, 3)}, {val(s, 1.0, 3)});
        add_pair(f.ygram, {der(s, 1.0, 3)}, {der(s, 1.0, 3)});
    };
    auto l2_norm = [&](int s) { add_pair(f.ygram, {val(s, 1.0, 3)}, {val(s, 1.0, 3)}); };
    // Loads (J, S) with S in slot 1.
    auto load_js = [=](const ManufacturedCase& mc) { return std::vector<LoadTerm>{{F(mc, "J"), {val(1, 1.0, 3)}}}; };

    if (id == "maxwell_primal_E") {
        f.trial = {{"E", FH, hdeg, SlotKind::Field, true, "E", "curl_E"},
                   {"H_hat", FI, ideg, SlotKind::Interface, false, "H", ""}};
        f.test = {{"F", Family::Hcurl, q, true}};
        add_pair(f.b0, {der(0, 1.0 / mu, 3)}, {der(0, 1.0, 3)});
        add_pair(f.b0, {val(0, -om * om * eps, 3)}, {val(0, 1.0, 3)});
        f.bhat = {{1, TraceOp::NCross, 0, TraceOp::Value, I1 * om}};
        curl_norm(0);
        f.load_builder = [=](const ManufacturedCase& mc) {
            return std::vector<LoadTerm>{{scaled(F(mc, "J"), I1 * om), {val(0, 1.0, 3)}}};
        };
    } else if (id == "maxwell_primal_H") {
        f.trial = {{"H", FH, hdeg, SlotKind::Field, false, "H", "curl_H"},
                   {"E_hat", FI, ideg, SlotKind::Interface, true, "E", ""}};
        f.test = {{"F", Family::Hcurl, q, false}};
        add_pair(f.b0, {der(0, 1.0 / eps, 3)}, {der(0, 1.0, 3)});
        add_pair(f.b0, {val(0, -om * om * mu, 3)}, {val(0, 1.0, 3)});
        f.bhat = {{1, TraceOp::NCross, 0, TraceOp::Value, -I1 * om}};
        curl_norm(0);
        f.load_builder = [=](const ManufacturedCase& mc) {
            return std::vector<LoadTerm>{{scaled(F(mc, "J"), 1.0 / eps), {der(0, 1.0, 3)}}};
        };
    } else if (id == "maxwell_ultraweak") {
        f.graph_norm = true;
        f.trial = {{"H", Family::L2Vec, bdeg, SlotKind::Field, false, "H", ""},
                   {"E", Family::L2Vec, bdeg, SlotKind::Field, false, "E", ""},
                   {"H_hat", FI, ideg, SlotKind::Interface, false, "H", ""},
                   {"E_hat", FI, ideg, SlotKind::Interface, true, "E", ""}};
        f.test = {{"R", Family::Hcurl, q, false}, {"S", Family::Hcurl, q, true}};
        // A*(R, S) = (-i w mu R + curl S, -i w eps S - curl R)
        Expr adj1 = {val(0, -I1 * om * mu, 3), der(1, 1.0, 3)};
        Expr adj2 = {val(1, -I1 * om * eps, 3), der(0, -1.0, 3)};
        add_pair(f.b0, {val(0, 1.0, 3)}, adj1);
        add_pair(f.b0, {val(1, 1.0, 3)}, adj2);
        f.bhat = {{2, TraceOp::NCross, 1, TraceOp::Value, 1.0}, {3, TraceOp::NCross, 0, TraceOp::Value, -1.0}};
        l2_norm(0);
        l2_norm(1);
        add_pair(f.ygram, adj1, adj1);
        add_pair(f.ygram, adj2, adj2);
        f.load_builder = load_js;
    } else if (id == "maxwell_mixed") {
        f.trial = {{"H", Family::L2Vec, bdeg, SlotKind::Field, false, "H", ""},
                   {"E", FH, hdeg, SlotKind::Field, true, "E", "curl_E"},
                   {"H_hat", FI, ideg, SlotKind::Interface, false, "H", ""}};
        f.test = {{"R", Family::L2Vec, q, false}, {"S", Family::Hcurl, q, true}};
        add_pair(f.b0, {val(0, I1 * om * mu, 3), der(1, -1.0, 3)}, {val(0, 1.0, 3)});
        add_pair(f.b0, {val(1, I1 * om * eps, 3)}, {val(1, 1.0, 3)});
        add_pair(f.b0, {val(0, 1.0, 3)}, {der(1, 1.0, 3)});
        f.bhat = {{2, TraceOp::NCross, 1, TraceOp::Value, 1.0}};
        l2_norm(0);
        curl_norm(1);
        f.load_builder = load_js;
    } else if (id == "maxwell_dual_mixed") {
        f.trial = {{"H", FH, hdeg, SlotKind::Field, false, "H", "curl_H"},
                   {"E", Family::L2Vec, bdeg, SlotKind::Field, false, "E", ""},
                   {"E_hat", FI, ideg, SlotKind::Interface, true, "E", ""}};
        f.test = {{"R", Family::Hcurl, q, false}, {"S", Family::L2Vec, q, false}};
        add_pair(f.b0, {val(0, I1 * om * mu, 3)}, {val(0, 1.0, 3)});
        add_pair(f.b0, {val(1, -1.0, 3)}, {der(0, 1.0, 3)});
        add_pair(f.b0, {val(1, I1 * om * eps, 3), der(0, 1.0, 3)}, {val(1, 1.0, 3)});
        f.bhat = {{2, TraceOp::NCross, 0, TraceOp::Value, -1.0}};
        curl_norm(0);
        l2_norm(1);
        f.load_builder = load_js;
    } else if (id == "maxwell_strong") {
        f.trial = {{"H", FH, hdeg, SlotKind::Field, false, "H", "curl_H"},
                   {"E", FH, hdeg, SlotKind::Field, true, "E", "curl_E"}};
        f.test = {{"R", Family::L2Vec, q, false}, {"S", Family::L2Vec, q, false}};
        add_pair(f.b0, {val(0, I1 * om * mu, 3), der(1, -1.0, 3)}, {val(0, 1.0, 3)});
        add_pair(f.b0, {val(1, I1 * om * eps, 3), der(0, 1.0, 3)}, {val(1, 1.0, 3)});
        l2_norm(0);
        l2_norm(1);
        f.load_builder = load_js;
    } else {
        fail("unknown formulation: " + id);
    }
}

}  // namespace

std::string space_mode_name(SpaceMode m) { return m == SpaceMode::Guaranteed ? "guaranteed" : "economy"; }

SpaceMode parse_space_mode(const std::string& s) {
    if (s == "guaranteed") return SpaceMode::Guaranteed;
    if (s == "economy") return SpaceMode::Economy;
    fail("unknown space_mode: " + s);
}

int default_delta(SpaceMode mode) { return mode == SpaceMode::Guaranteed ? 3 : 2; }

const std::vector<std::string>& formulation_ids() {
    static const std::vector<std::string> ids = {
        "primal_poisson",   "primal_dcr",       "ultraweak_dcr",     "mixed_dcr",
        "dual_mixed_dcr",   "strong_dcr",       "maxwell_primal_E",  "maxwell_primal_H",
        "maxwell_ultraweak", "maxwell_mixed",   "maxwell_dual_mixed", "maxwell_strong"};
    return ids;
}

bool is_maxwell(const std::string& id) { return id.rfind("maxwell_", 0) == 0; }

std::string default_case(const std::string& id) {
    if (is_maxwell(id)) return "maxwell_sine_3d";
    if (id == "primal_poisson") return "poisson_sine_2d";
    return "dcr_sine_2d";
}

int Formulation::num_fields() const {
    return static_cast<int>(std::count_if(trial.begin(), trial.end(),
                                          [](const TrialSlot& s) { return s.kind == SlotKind::Field; }));
}

int Formulation::num_interfaces() const { return static_cast<int>(trial.size()) - num_fields(); }

std::shared_ptr<const ReferenceSpace> Formulation::trial_space(int s) const {
    return ReferenceSpace::get(trial[s].family, trial[s].degree, dim);
}

std::shared_ptr<const ReferenceSpace> Formulation::test_space(int s) const {
    return ReferenceSpace::get(test[s].family, test[s].degree, dim);
}

Formulation make_formulation(const std::string& id, int p, int delta, SpaceMode mode, const Coefficients* coef,
                             int dim) {
    require(std::find(formulation_ids().begin(), formulation_ids().end(), id) != formulation_ids().end(),
            "unknown formulation: " + id);
    require(p >= 1, "formulation degree p must be >= 1");
    require(delta >= 1, "test enrichment delta must be >= 1");
    Formulation f;
    f.id = id;
    f.dim = dim > 0 ? dim : (is_maxwell(id) ? 3 : 2);
    require(f.dim == 2 || f.dim == 3, "dimension must be 2 or 3");
    f.p = p;
    f.delta = delta;
    f.mode = mode;
    f.coef = coef ? *coef : default_coefficients(id, f.dim);
    if (id == "primal_poisson") {
        // Pure diffusion regardless of the supplied convection and reaction.
        f.coef.beta = VectorXd::Zero(f.dim);
        f.coef.gamma = 0.0;
        if (f.coef.alpha.size() == 0) f.coef.alpha = MatrixXd::Identity(f.dim, f.dim);
    }
    if (is_maxwell(id)) {
        build_maxwell(f);
    } else {
        build_dcr(f);
    }
    // Every slot's space is validated eagerly so that invalid degrees surface here.
    for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) f.trial_space(s);
    for (int s = 0; s < static_cast<int>(f.test.size()); ++s) f.test_space(s);
    return f;
}

TrialLayout make_trial_layout(const Formulation& f, const MeshEntities& ents) {
    TrialLayout tl;
    for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
        tl.offset.push_back(tl.ndofs);
        tl.slots.push_back(make_layout(ents, f.trial_space(s), f.trial[s].kind == SlotKind::Interface));
        tl.ndofs += tl.slots.back().ndofs;
    }
    return tl;
}

std::vector<int> bc_constraints(const Formulation& f, const TrialLayout& tl) {
    std::vector<int> out;
    for (int s = 0; s < static_cast<int>(f.trial.size()); ++s) {
        if (!f.trial[s].zero_bc) continue;
        const auto& L = tl.slots[s];
        for (int i = 0; i < L.ndofs; ++i)
            if (L.on_boundary[i]) out.push_back(tl.offset[s] + i);
    }
    return out;
}

std::vector<DofLayout> conforming_test_layouts(const Formulation& f, const MeshEntities& ents) {
    std::vector<DofLayout> out;
    for (int s = 0; s < static_cast<int>(f.test.size()); ++s) out.push_back(make_layout(ents, f.test_space(s), false));
    return out;
}

}  // namespace dpg
