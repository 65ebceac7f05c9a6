#include <random>

#include "dpg/verify.hpp"

namespace dpg {

std::string pairing_name(PairingKind k) {
    switch (k) {
        case PairingKind::GradDiv: return "grad/div";
        case PairingKind::DivGrad: return "div/grad";
        case PairingKind::CurlTCurlD: return "curlT/curlD";
        case PairingKind::CurlDCurlT: return "curlD/curlT";
    }
    return "?";
}

const std::vector<PairingKind>& all_pairings() {
    static const std::vector<PairingKind> v{PairingKind::GradDiv, PairingKind::DivGrad, PairingKind::CurlTCurlD,
                                            PairingKind::CurlDCurlT};
    return v;
}

namespace {

/// Source space carrying the trace and the space it is tested against.
std::pair<Family, Family> spaces(PairingKind k) {
    switch (k) {
        case PairingKind::GradDiv: return {Family::H1, Family::Hdiv};
        case PairingKind::DivGrad: return {Family::Hdiv, Family::H1};
        default: return {Family::Hcurl, Family::Hcurl};
    }
}

MatrixXd inner(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b, const VectorXd& w) {
    MatrixXd out = MatrixXd::Zero(a[0].cols(), b[0].cols());
    for (size_t c = 0; c < a.size(); ++c) out += a[c].transpose() * w.asDiagonal() * b[c];
    return out;
}

MatrixXd gram(const PhysTables& t) { return inner(t.val, t.val, t.w) + inner(t.der, t.der, t.w); }

/// Green's identity pairing <trace(z), trace(y)> on the boundary as volume integrals
/// (rows: source basis, columns: test basis).
MatrixXd pairing_matrix(PairingKind k, const PhysTables& u, const PhysTables& v) {
    switch (k) {
        case PairingKind::GradDiv:  // <w, tau.n> = (grad w, tau) + (w, div tau)
            return inner(u.der, v.val, u.w) + inner(u.val, v.der, u.w);
        case PairingKind::DivGrad:  // <sigma.n, v> = (div sigma, v) + (sigma, grad v)
            return inner(u.der, v.val, u.w) + inner(u.val, v.der, u.w);
        case PairingKind::CurlTCurlD:  // <n x E, F> = (curl E, F) - (E, curl F)
            return inner(u.der, v.val, u.w) - inner(u.val, v.der, u.w);
        case PairingKind::CurlDCurlT:  // <E_T, n x F> = (E, curl F) - (curl E, F)
            return inner(u.val, v.der, u.w) - inner(u.der, v.val, u.w);
    }
    return {};
}

}  // namespace

VectorXd duality_sample(PairingKind k, int sample_degree, std::uint64_t seed) {
    auto sp = ReferenceSpace::get(spaces(k).first, sample_degree, 3);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    VectorXd c(sp->n);
    for (int i = 0; i < sp->n; ++i) c(i) = nd(rng);
    return c / c.norm();
}

DualityResult duality_gap(PairingKind k, int q, int sample_degree, const VectorXd& sample) {
    require(sample_degree >= 1 && sample_degree <= q - 2,
            "duality_gap: trace degree " + std::to_string(sample_degree) + " not representable at q = " +
                std::to_string(q));
    auto [uf, vf] = spaces(k);
    auto us = ReferenceSpace::get(uf, sample_degree, 3);
    auto uq = ReferenceSpace::get(uf, q, 3);
    auto vq = ReferenceSpace::get(vf, q, 3);
    require(sample.size() == us->n, "duality_gap: sample size mismatch");
    const CellGeometry g = CellGeometry::from_vertices(reference_vertices(3));
    const int order = 2 * q + 2;
    PhysTables ts = cell_tables(*us, g, order, false);
    PhysTables tu = cell_tables(*uq, g, order, false);
    PhysTables tv = cell_tables(*vq, g, order, false);

    // the sample in the degree-q basis (orthonormal, nested spaces: exact projection)
    VectorXd z = inner(tu.val, ts.val, tu.w) * sample;

    MatrixXd C(0, uq->n);
    for (int i = 0; i < 4; ++i) {
        MatrixXd Ti = facet_trace_matrix(uf, q, 3, i);
        MatrixXd next(C.rows() + Ti.rows(), uq->n);
        next << C, Ti;
        C = next;
    }
    Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s(rank) > 1e-10 * s(0)) ++rank;
    MatrixXd N = svd.matrixV().rightCols(uq->n - rank);

    const MatrixXd Gu = gram(tu);
    const VectorXd Gz = Gu * z;
    VectorXd NGz = N.transpose() * Gz;
    MatrixXd NGN = N.transpose() * Gu * N;
    double q2 = z.dot(Gz);
    if (N.cols() > 0) q2 -= NGz.dot(NGN.llt().solve(NGz));

    const VectorXd pz = pairing_matrix(k, tu, tv).transpose() * z;
    const double d2 = pz.dot(gram(tv).llt().solve(pz));

    DualityResult r;
    r.quotient = std::sqrt(std::max(q2, 0.0));
    r.dual = std::sqrt(std::max(d2, 0.0));
    r.gap = r.dual > 0.0 ? std::abs(r.quotient / r.dual - 1.0) : 0.0;
    return r;
}

}  // namespace dpg
