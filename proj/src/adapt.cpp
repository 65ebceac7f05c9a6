#include "dpg/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dpg {

std::set<int> mark(const EstimatorField& est, double theta) {
    require(theta > 0.0 && theta <= 1.0, "mark: theta must lie in (0,1], got " + std::to_string(theta));
    std::set<int> out;
    const int n = static_cast<int>(est.eta_K.size());
    double total = 0.0;
    for (double e : est.eta_K) total += e * e;
    if (n == 0 || total == 0.0) return out;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return est.eta_K[a] > est.eta_K[b]; });
    const double target = theta * theta * total;
    double acc = 0.0;
    for (int c : order) {
        if (est.eta_K[c] <= 0.0) break;
        out.insert(c);
        acc += est.eta_K[c] * est.eta_K[c];
        // strict: a set that only ties the bulk target is extended by one more cell
        if (acc > target) break;
    }
    return out;
}

namespace {

HistoryRecord record(const Formulation& form, const SimplicialMesh& mesh, const ManufacturedCase& mc, int it,
                     DpgRun* keep) {
    Discretization disc(form, mesh);
    DpgRun run = run_dpg(disc, &mc);
    HistoryRecord r;
    r.iteration = it;
    r.dofs = disc.ndofs();
    r.eta = run.estimator.eta;
    r.cells = mesh.num_cells();
    if (mc.has_exact) {
        ErrorReport e = measure_error(disc, run.solution.x, mc);
        r.error = e.total;
        r.slot_errors = e.slots;
    }
    if (keep) *keep = std::move(run);
    return r;
}

}  // namespace

AdaptiveResult adaptive_solve(const Formulation& form, const SimplicialMesh& mesh0, const ManufacturedCase& mc,
                              double theta, AdaptiveStop stop) {
    require(theta > 0.0 && theta <= 1.0, "adaptive_solve: theta must lie in (0,1]");
    require(stop.max_iterations >= 1, "adaptive_solve: max_iterations must be positive");
    AdaptiveResult res;
    SimplicialMesh mesh = mesh0;
    for (int it = 0;; ++it) {
        DpgRun run;
        res.history.records.push_back(record(form, mesh, mc, it, &run));
        res.mesh = mesh;
        res.solution = run.solution;
        res.estimator = run.estimator;
        if (it + 1 >= stop.max_iterations || res.history.records.back().dofs >= stop.max_dofs) break;
        std::set<int> marked = mark(run.estimator, theta);
        if (marked.empty()) break;
        mesh = refine_marked(mesh, marked);
    }
    return res;
}

AdaptiveHistory uniform_history(const Formulation& form, const SimplicialMesh& mesh0, const ManufacturedCase& mc,
                                int levels) {
    AdaptiveHistory h;
    SimplicialMesh mesh = mesh0;
    for (int l = 0; l < levels; ++l) {
        h.records.push_back(record(form, mesh, mc, l, nullptr));
        if (l + 1 < levels) mesh = refine_uniform(mesh);
    }
    return h;
}

double eta_at_dofs(const AdaptiveHistory& h, double dofs) {
    const auto& r = h.records;
    for (size_t i = 0; i + 1 < r.size(); ++i) {
        double d0 = r[i].dofs, d1 = r[i + 1].dofs;
        if (dofs < d0 || dofs > d1) continue;
        double t = (std::log(dofs) - std::log(d0)) / (std::log(d1) - std::log(d0));
        return std::exp((1 - t) * std::log(r[i].eta) + t * std::log(r[i + 1].eta));
    }
    if (!r.empty() && dofs == r.back().dofs) return r.back().eta;
    return std::nan("");
}

}  // namespace dpg
