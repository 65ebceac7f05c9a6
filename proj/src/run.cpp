#include "dpg/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "dpg/error.hpp"
#include "dpg/solve.hpp"
#include "dpg/system.hpp"
#include "dpg/verify.hpp"

namespace dpg {

double fitted_rate(const std::vector<double>& h, const std::vector<double>& e) {
    std::vector<double> x, y;
    for (size_t i = 0; i < h.size() && i < e.size(); ++i)
        if (h[i] > 0 && e[i] > 0 && std::isfinite(h[i]) && std::isfinite(e[i])) {
            x.push_back(std::log(h[i]));
            y.push_back(std::log(e[i]));
        }
    const size_t n = x.size();
    if (n < 2) return std::nan("");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) mx += x[i] / n, my += y[i] / n;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    if (sxx <= 0) return std::nan("");
    return sxy / sxx;
}

ManufacturedCase config_case(const StudyConfig& cfg) {
    return manufactured_case(cfg.case_name.empty() ? default_case(cfg.formulation) : cfg.case_name);
}

Formulation config_formulation(const StudyConfig& cfg, const ManufacturedCase& mc) {
    const int delta = cfg.delta > 0 ? cfg.delta : default_delta(cfg.space_mode);
    Formulation f = make_formulation(cfg.formulation, cfg.p, delta, cfg.space_mode, &mc.coef);
    require(f.dim == mc.dim, "case '" + mc.name + "' is " + std::to_string(mc.dim) + "D but formulation '" +
                                 cfg.formulation + "' is " + std::to_string(f.dim) + "D");
    return f;
}

SimplicialMesh initial_mesh(const StudyConfig& cfg, const ManufacturedCase& mc) {
    const Domain d = cfg.domain.value_or(mc.domain);
    const int dim = d == Domain::UnitCube ? 3 : 2;
    require(dim == mc.dim, "domain '" + domain_name(d) + "' does not match the " + std::to_string(mc.dim) +
                               "D case '" + mc.name + "'");
    int n = cfg.n0;
    if (n == 0) n = d == Domain::UnitSquare ? 2 : 1;
    return build_structured(d, n);
}

namespace {

void dump_outputs(const StudyConfig& cfg, const VectorXc& x, const EstimatorField& est) {
    if (!cfg.dump_solution.empty()) write_csv_file(cfg.dump_solution, solution_table(x));
    if (!cfg.dump_estimator.empty()) write_csv_file(cfg.dump_estimator, estimator_table(est));
}

}  // namespace

Table run_study(const StudyConfig& cfg) {
    const ManufacturedCase mc = config_case(cfg);
    const Formulation f = config_formulation(cfg, mc);
    SimplicialMesh mesh = initial_mesh(cfg, mc);

    std::vector<std::string> cols{"level", "h", "dofs", "cells"};
    for (const auto& s : f.trial) cols.push_back("err_" + s.name);
    for (const char* c : {"error", "eta", "rate", "rate_eta"}) cols.push_back(c);
    Table t(cols);

    std::vector<double> hs, errs, etas;
    for (int level = 0; level < cfg.levels; ++level) {
        if (level > 0) mesh = refine_uniform(mesh);
        const Discretization disc(f, mesh);
        const DpgRun run = run_dpg(disc, &mc);
        std::vector<ReportValue> row{std::int64_t(level), max_diameter(mesh), std::int64_t(disc.ndofs()),
                                     std::int64_t(mesh.num_cells())};
        double total = std::nan("");
        if (mc.has_exact) {
            const ErrorReport er = measure_error(disc, run.solution.x, mc);
            for (const auto& s : er.slots) row.push_back(s.full);
            total = er.total;
        } else {
            for (size_t i = 0; i < f.trial.size(); ++i) row.push_back(std::nan(""));
        }
        hs.push_back(max_diameter(mesh));
        errs.push_back(total);
        etas.push_back(run.estimator.eta);
        const size_t first = cfg.rate_all ? 0 : (hs.size() >= 2 ? hs.size() - 2 : 0);
        auto window = [&](const std::vector<double>& v) { return std::vector<double>(v.begin() + first, v.end()); };
        row.push_back(total);
        row.push_back(run.estimator.eta);
        row.push_back(fitted_rate(window(hs), window(errs)));
        row.push_back(fitted_rate(window(hs), window(etas)));
        t.add(std::move(row));
        if (level + 1 == cfg.levels) dump_outputs(cfg, run.solution.x, run.estimator);
    }
    return t;
}

Table history_table(const AdaptiveHistory& h) {
    Table t({"iteration", "dofs", "eta", "error", "cells"});
    for (const auto& r : h.records)
        t.add({std::int64_t(r.iteration), std::int64_t(r.dofs), r.eta, r.error, std::int64_t(r.cells)});
    return t;
}

Table run_adaptive(const StudyConfig& cfg) {
    const ManufacturedCase mc = config_case(cfg);
    const Formulation f = config_formulation(cfg, mc);
    AdaptiveStop stop;
    stop.max_iterations = cfg.iterations;
    if (cfg.max_dofs > 0) stop.max_dofs = cfg.max_dofs;
    const AdaptiveResult res = adaptive_solve(f, initial_mesh(cfg, mc), mc, cfg.theta, stop);
    dump_outputs(cfg, res.solution.x, res.estimator);
    return history_table(res.history);
}

namespace {

void add(std::vector<VerifyRecord>& out, const std::string& suite, const std::string& name, double value,
         double tol, bool pass) {
    out.push_back({suite, name, value, tol, pass});
}
void add_below(std::vector<VerifyRecord>& out, const std::string& suite, const std::string& name, double value,
               double tol) {
    add(out, suite, name, value, tol, std::isfinite(value) && value < tol);
}
void add_above(std::vector<VerifyRecord>& out, const std::string& suite, const std::string& name, double value,
               double tol) {
    add(out, suite, name, value, tol, std::isfinite(value) && value > tol);
}

void suite_fortin(const StudyConfig& cfg, std::vector<VerifyRecord>& out) {
    const int p = cfg.p;
    const std::string tag = "p" + std::to_string(p);
    const FortinSystem g = fortin_build(FortinKind::Grad, p);
    const FortinSystem c = fortin_build(FortinKind::Curl, p);
    const FortinSystem d = fortin_build(FortinKind::Div, p);
    for (const FortinSystem* s : {&g, &c, &d}) {
        const std::string nm = fortin_name(s->kind) + "/" + tag;
        add_below(out, "fortin", nm + "/moments", fortin_moment_residual(*s, fortin_samples(*s, p + 6, 20, cfg.seed)),
                  1e-9);
        add_below(out, "fortin", nm + "/constraints", bspace_constraint_residual(*s), 1e-9);
        add(out, "fortin", nm + "/square", double(s->mdim() - s->bdim()), 0.0, s->mdim() == s->bdim() && s->rank == s->bdim());
    }
    add(out, "fortin", "curl/" + tag + "/perp_dim", c.perp_dim, 6 * p + 11, c.perp_dim == 6 * p + 11);
    const CommutingResidual r = fortin_commuting(g, c, d, p + 6, 20, cfg.seed + 1);
    add_below(out, "fortin", "commute_grad/" + tag, r.grad, 1e-9);
    add_below(out, "fortin", "commute_curl/" + tag, r.curl, 1e-9);
    add_below(out, "fortin", "commute_div/" + tag, r.div, 1e-9);
    add_below(out, "fortin", "chain/" + tag, r.chain, 1e-9);
}

void suite_duality(const StudyConfig& cfg, std::vector<VerifyRecord>& out) {
    const int p = cfg.p;
    std::uint64_t seed = cfg.seed;
    for (PairingKind k : all_pairings()) {
        for (int s = 0; s < 5; ++s) {
            const VectorXd x = duality_sample(k, p, seed++);
            const std::string nm = pairing_name(k) + "/sample" + std::to_string(s);
            double prev = INFINITY;
            bool monotone = true;
            double last = 0;
            for (int q : {p + 2, p + 4, p + 6}) {
                last = duality_gap(k, q, p, x).gap;
                monotone = monotone && last <= prev * (1 + 1e-12) + 1e-14;
                prev = last;
            }
            add(out, "duality", nm + "/monotone", monotone ? 1.0 : 0.0, 1.0, monotone);
            add_below(out, "duality", nm + "/gap", last, 0.05);
        }
    }
}

void suite_annihilation(std::vector<VerifyRecord>& out) {
    struct C {
        const char* id;
        Domain d;
    };
    for (C c : {C{"primal_poisson", Domain::UnitSquare}, C{"maxwell_primal_E", Domain::UnitCube}}) {
        const ManufacturedCase mc = manufactured_case(default_case(c.id));
        const Formulation f = make_formulation(c.id, 1, default_delta(SpaceMode::Guaranteed), SpaceMode::Guaranteed,
                                               &mc.coef);
        const Annihilation a = annihilation_check(f, build_structured(c.d, 1));
        add_below(out, "annihilation", std::string(c.id) + "/conforming", a.conforming, 1e-12);
        add_above(out, "annihilation", std::string(c.id) + "/witness", a.witness, 1e-3);
    }
}

void suite_stability(std::vector<VerifyRecord>& out) {
    const ManufacturedCase mc = manufactured_case(default_case("primal_poisson"));
    const Formulation f = make_formulation("primal_poisson", 1, default_delta(SpaceMode::Guaranteed),
                                           SpaceMode::Guaranteed, &mc.coef);
    for (int n : {1, 2}) {
        const std::string name = std::to_string(2 * n * n) + "tri";
        const BrokenStability b = broken_stability_bound(f, build_structured(Domain::UnitSquare, n), name);
        const double margin = b.c1_discrete - b.c1_formula;
        add(out, "stability", "primal_poisson/" + name, margin, -1e-10, margin >= -1e-10);
    }
}

void suite_survey(const StudyConfig& cfg, std::vector<VerifyRecord>& out) {
    std::vector<std::string> mw, dcr;
    for (const auto& id : formulation_ids()) {
        if (is_maxwell(id))
            mw.push_back(id);
        else if (id.find("dcr") != std::string::npos)
            dcr.push_back(id);
    }
    for (const auto& r : infsup_survey(mw, build_structured(Domain::UnitCube, 1), "cube5", 1, cfg.space_mode))
        add_above(out, "survey", r.formulation + "/cube5", r.infsup, 0.0);
    for (const auto& r : infsup_survey(dcr, build_structured(Domain::UnitSquare, 2), "square8", 1, cfg.space_mode))
        add_above(out, "survey", r.formulation + "/square8", r.infsup, 0.0);
}

void suite_orthogonality(const StudyConfig& cfg, std::vector<VerifyRecord>& out) {
    for (const auto& id : formulation_ids()) {
        if (is_maxwell(id)) continue;
        const ManufacturedCase mc = manufactured_case(default_case(id));
        const Formulation f = make_formulation(id, cfg.p, default_delta(cfg.space_mode), cfg.space_mode, &mc.coef);
        const SimplicialMesh m = build_structured(mc.domain, 2);
        const Discretization disc(f, m);
        const DpgRun run = run_dpg(disc, &mc);
        add_below(out, "orthogonality", id, orthogonality_residual(run.systems, run.system, run.solution.x), 1e-9);
    }
}

}  // namespace

std::vector<VerifyRecord> run_verify(const StudyConfig& cfg) {
    std::vector<VerifyRecord> out;
    const bool all = cfg.suite == "all";
    if (all || cfg.suite == "orthogonality") suite_orthogonality(cfg, out);
    if (all || cfg.suite == "annihilation") suite_annihilation(out);
    if (all || cfg.suite == "stability") suite_stability(out);
    if (all || cfg.suite == "survey") suite_survey(cfg, out);
    if (all || cfg.suite == "duality") suite_duality(cfg, out);
    if (all || cfg.suite == "fortin") suite_fortin(cfg, out);
    return out;
}

Table verify_table(const std::vector<VerifyRecord>& recs) {
    Table t({"suite", "case", "value", "tolerance", "pass"});
    for (const auto& r : recs) t.add({r.suite, r.case_name, r.value, r.tolerance, r.pass});
    return t;
}

std::string describe(const StudyConfig& cfg) {
    const ManufacturedCase mc = config_case(cfg);
    const Formulation f = config_formulation(cfg, mc);
    const SimplicialMesh mesh = initial_mesh(cfg, mc);
    const Discretization disc(f, mesh);

    nlohmann::ordered_json j;
    j["formulation"] = f.id;
    j["dim"] = f.dim;
    j["p"] = f.p;
    j["delta"] = f.delta;
    j["space"] = space_mode_name(f.mode);
    j["case"] = mc.name;
    j["domain"] = domain_name(cfg.domain.value_or(mc.domain));
    j["complex"] = f.complex_valued;
    auto trial = nlohmann::ordered_json::array();
    for (const auto& s : f.trial) {
        nlohmann::ordered_json o;
        o["name"] = s.name;
        o["family"] = family_name(s.family);
        o["degree"] = s.degree;
        o["kind"] = s.kind == SlotKind::Field ? "field" : "interface";
        o["zero_bc"] = s.zero_bc;
        trial.push_back(o);
    }
    j["trial"] = trial;
    auto test = nlohmann::ordered_json::array();
    for (const auto& s : f.test) {
        nlohmann::ordered_json o;
        o["name"] = s.name;
        o["family"] = family_name(s.family);
        o["degree"] = s.degree;
        test.push_back(o);
    }
    j["test"] = test;
    j["cells"] = mesh.num_cells();
    j["dofs"] = disc.ndofs();
    j["constrained"] = disc.constrained.size();
    j["local_trial"] = disc.ntrial_local();
    j["local_test"] = disc.ntest;
    return j.dump(2) + "\n";
}

Table solution_table(const VectorXc& x) {
    Table t({"dof", "real", "imag"});
    for (Eigen::Index i = 0; i < x.size(); ++i) t.add({std::int64_t(i), x[i].real(), x[i].imag()});
    return t;
}

Table estimator_table(const EstimatorField& est) {
    Table t({"cell", "eta"});
    for (size_t k = 0; k < est.eta_K.size(); ++k) t.add({std::int64_t(k), est.eta_K[k]});
    return t;
}

int run_config(const StudyConfig& cfg) {
    validate(cfg);
    switch (cfg.mode) {
        case RunMode::Study: write_csv_file(cfg.out, run_study(cfg)); return 0;
        case RunMode::Adaptive: write_csv_file(cfg.out, run_adaptive(cfg)); return 0;
        case RunMode::Verify: {
            const auto recs = run_verify(cfg);
            write_jsonl_file(cfg.out, verify_table(recs));
            for (const auto& r : recs)
                if (!r.pass) return 1;
            return 0;
        }
        case RunMode::Describe: {
            const std::string text = describe(cfg);
            if (cfg.out == "-" || cfg.out.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                std::ofstream o(cfg.out, std::ios::binary);
                require(o.good(), "cannot write '" + cfg.out + "'");
                o << text;
            }
            return 0;
        }
    }
    return 2;
}

}  // namespace dpg
