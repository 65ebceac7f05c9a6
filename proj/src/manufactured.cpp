#include <cmath>
#include <numbers>

#include "dpg/forms.hpp"

namespace dpg {

namespace {

constexpr double kPi = std::numbers::pi;

VectorXc vec(std::initializer_list<cplx> v) {
    VectorXc r(static_cast<int>(v.size()));
    int i = 0;
    for (cplx x : v) r(i++) = x;
    return r;
}

// u = sin(pi x) sin(pi y) with sigma = a grad u + a beta u, a = identity.
ManufacturedCase sine_2d(const std::string& name, VectorXd beta, double gamma) {
    ManufacturedCase mc;
    mc.name = name;
    mc.dim = 2;
    mc.domain = Domain::UnitSquare;
    mc.has_exact = true;
    mc.coef.alpha = MatrixXd::Identity(2, 2);
    mc.coef.beta = beta;
    mc.coef.gamma = gamma;
    auto u = [](const Vec3& x) { return std::sin(kPi * x(0)) * std::sin(kPi * x(1)); };
    auto gu = [](const Vec3& x) {
        return Eigen::Vector2d(kPi * std::cos(kPi * x(0)) * std::sin(kPi * x(1)),
                               kPi * std::sin(kPi * x(0)) * std::cos(kPi * x(1)));
    };
    const double b0 = beta(0), b1 = beta(1);
    mc.fields["u"] = [u](const Vec3& x) { return vec({u(x)}); };
    mc.fields["grad_u"] = [gu](const Vec3& x) {
        auto g = gu(x);
        return vec({g(0), g(1)});
    };
    mc.fields["sigma"] = [=](const Vec3& x) {
        auto g = gu(x);
        return vec({g(0) + b0 * u(x), g(1) + b1 * u(x)});
    };
    auto div_sigma = [=](const Vec3& x) {
        auto g = gu(x);
        return -2.0 * kPi * kPi * u(x) + b0 * g(0) + b1 * g(1);
    };
    mc.fields["div_sigma"] = [=](const Vec3& x) { return vec({div_sigma(x)}); };
    mc.fields["F1"] = [](const Vec3&) { return vec({0.0, 0.0}); };
    mc.fields["F2"] = [=](const Vec3& x) { return vec({div_sigma(x) - gamma * u(x)}); };
    mc.expected_rate = [](const std::string& slot, int p) { return slot == "u" || slot == "sigma" ? p + 1.0 : p; };
    return mc;
}

ManufacturedCase lshape() {
    ManufacturedCase mc;
    mc.name = "poisson_lshape_singular";
    mc.dim = 2;
    mc.domain = Domain::LShape;
    mc.has_exact = false;
    mc.coef.alpha = MatrixXd::Identity(2, 2);
    mc.coef.beta = VectorXd::Zero(2);
    mc.coef.gamma = 0.0;
    // -div grad u = 1, written as div sigma - gamma u = F2.
    mc.fields["F1"] = [](const Vec3&) { return vec({0.0, 0.0}); };
    mc.fields["F2"] = [](const Vec3&) { return vec({-1.0}); };
    mc.expected_rate = [](const std::string&, int) { return 2.0 / 3.0; };
    return mc;
}

// E = (sin pi x sin pi y sin pi z, 0, 0), H = curl E / (i omega mu), J = i omega eps E + curl H.
ManufacturedCase maxwell_sine() {
    ManufacturedCase mc;
    mc.name = "maxwell_sine_3d";
    mc.dim = 3;
    mc.domain = Domain::UnitCube;
    mc.has_exact = true;
    mc.coef.alpha = MatrixXd::Identity(3, 3);
    mc.coef.beta = VectorXd::Zero(3);
    mc.coef.eps = mc.coef.mu = mc.coef.omega = 1.0;
    const cplx iwmu(0.0, 1.0), iweps(0.0, 1.0);
    auto S = [](double t) { return std::sin(kPi * t); };
    auto C = [](double t) { return std::cos(kPi * t); };
    auto E = [=](const Vec3& x) { return vec({S(x(0)) * S(x(1)) * S(x(2)), 0.0, 0.0}); };
    auto curlE = [=](const Vec3& x) {
        return vec({0.0, kPi * S(x(0)) * S(x(1)) * C(x(2)), -kPi * S(x(0)) * C(x(1)) * S(x(2))});
    };
    auto curlcurlE = [=](const Vec3& x) {
        const double k2 = kPi * kPi;
        return vec({2.0 * k2 * S(x(0)) * S(x(1)) * S(x(2)), k2 * C(x(0)) * C(x(1)) * S(x(2)),
                    k2 * C(x(0)) * S(x(1)) * C(x(2))});
    };
    mc.fields["E"] = E;
    mc.fields["curl_E"] = curlE;
    mc.fields["H"] = [=](const Vec3& x) { return VectorXc(curlE(x) / iwmu); };
    mc.fields["curl_H"] = [=](const Vec3& x) { return VectorXc(curlcurlE(x) / iwmu); };
    mc.fields["J"] = [=](const Vec3& x) { return VectorXc(iweps * E(x) + curlcurlE(x) / iwmu); };
    mc.expected_rate = [](const std::string&, int p) { return static_cast<double>(p); };
    return mc;
}

}  // namespace

const Field& ManufacturedCase::field(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) fail("manufactured case " + name + " has no field '" + key + "'");
    return it->second;
}

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names = {"poisson_sine_2d", "dcr_sine_2d", "maxwell_sine_3d",
                                                   "poisson_lshape_singular"};
    return names;
}

ManufacturedCase manufactured_case(const std::string& name) {
    if (name == "poisson_sine_2d") return sine_2d(name, VectorXd::Zero(2), 0.0);
    if (name == "dcr_sine_2d") return sine_2d(name, Eigen::Vector2d(1.0, 0.5), 1.0);
    if (name == "maxwell_sine_3d") return maxwell_sine();
    if (name == "poisson_lshape_singular") return lshape();
    fail("unknown manufactured case: " + name);
}

}  // namespace dpg
