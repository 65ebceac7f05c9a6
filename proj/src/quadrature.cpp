#include "dpg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace dpg {

void gauss_legendre01(int n, VectorXd& x, VectorXd& w) {
    require(n >= 1, "gauss_legendre01: need at least one point");
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        x(n - 1 - i) = 0.5 * (t + 1.0);
        w(n - 1 - i) = 1.0 / ((1.0 - t * t) * dp * dp);
    }
}

namespace {

QuadratureRule build_rule(int dim, int order) {
    QuadratureRule q;
    q.dim = dim;
    q.order = order;
    if (dim == 0) {
        q.points.resize(1, 0);
        q.weights = VectorXd::Constant(1, 1.0);
        return q;
    }
    // Collapsed coordinates: the Jacobian adds (dim - 1 - j) powers in direction j.
    std::vector<VectorXd> gx(dim), gw(dim);
    for (int j = 0; j < dim; ++j) {
        int deg = order + (dim - 1 - j);
        gauss_legendre01(deg / 2 + 1, gx[j], gw[j]);
    }
    int n = 1;
    for (int j = 0; j < dim; ++j) n *= static_cast<int>(gx[j].size());
    q.points.resize(n, dim);
    q.weights.resize(n);
    std::vector<int> idx(dim, 0);
    for (int k = 0; k < n; ++k) {
        int r = k;
        for (int j = dim - 1; j >= 0; --j) {
            idx[j] = r % gx[j].size();
            r /= gx[j].size();
        }
        double scale = 1.0, w = 1.0;
        for (int j = 0; j < dim; ++j) {
            double u = gx[j](idx[j]);
            q.points(k, j) = u * scale;
            w *= gw[j](idx[j]) * scale;
            scale *= (1.0 - u);
        }
        q.weights(k) = w;
    }
    return q;
}

}  // namespace

QuadratureRule quadrature_rule(int dim, int order) {
    require(dim >= 0 && dim <= 3, "quadrature_rule: dimension must be 0..3");
    require(order >= 0 && order <= kMaxQuadratureOrder,
            "quadrature_rule: unsupported order " + std::to_string(order));
    static std::mutex mtx;
    static std::map<std::pair<int, int>, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(dim, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto rule = build_rule(dim, order);
    cache.emplace(key, rule);
    return rule;
}

}  // namespace dpg
