// usd.hpp
// Unambiguous discrimination of two signal states and one decoy: the
// reciprocal (binormalised) basis, the inconclusive POVM element A0, and the
// maximisation of Eve's mean success probability subject to A0 >= 0.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "usdqkd/common.hpp"
#include "usdqkd/optim.hpp"
#include "usdqkd/states.hpp"

namespace usdqkd {

using Vec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3cd;

// u-vectors in the Gram-Schmidt frame of {u1, u2, u3} and their reciprocal
// v-vectors, <v_i|u_j> = δ_ij. v is left zero when the geometry is degenerate.
struct UsdGeometry {
    std::array<Vec3, 3> u{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 3> v{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    cplx h{0.0, 0.0};
    cplx k{0.0, 0.0};
    double l = 0.0;
    double m = 0.0;
    bool degenerate = false;
};

struct UsdSolution {
    double p_s = 0.0;
    double p_d = 0.0;
    double p0 = 1.0;
    double min_eig_a0 = 1.0;
    bool on_det_zero = false;
    bool degenerate = false;
    double nu = 0.0;
    double objective = 0.0;  // (1-ν) p_s + ν p_d
    double ps_max = 0.0;     // largest p_s with any feasible p_d
};

// L = sqrt(1 - |S12|^2)
inline double l_value(const GramData& g) { return std::sqrt(std::max(0.0, 1.0 - std::norm(g.s12))); }

// M from the residual when available, otherwise the Gram-determinant formula.
inline double m_value(const GramData& g) {
    if (g.residual) return l_value(g) * *g.residual;
    const double m2 = 1.0 - std::norm(g.s13) - std::norm(g.s12) - std::norm(g.s23) +
                      (std::conj(g.s12) * g.s13 * std::conj(g.s23) + g.s12 * std::conj(g.s13) * g.s23).real();
    return std::sqrt(std::max(0.0, m2));
}

// Δ = 1 + S12 - 2|S13|^2; zero exactly when the decoy lies in the signal span.
inline double usd_delta(const GramData& g) { return 1.0 + g.s12.real() - 2.0 * std::norm(g.s13); }

inline UsdGeometry build_geometry(const GramData& g, const Tolerances& tol = {}) {
    g.validate(tol);
    UsdGeometry geo;
    geo.h = g.s12 * g.s23 - g.s13;
    geo.k = g.s23 - std::conj(g.s12) * g.s13;
    geo.l = l_value(g);
    geo.m = m_value(g);
    geo.degenerate = geo.l < tol.degeneracy_tol || geo.m < tol.degeneracy_tol;

    const double L = geo.l, M = geo.m;
    geo.u[0] << 1.0, 0.0, 0.0;
    if (L > 0.0) {
        geo.u[1] << g.s12, L, 0.0;
        geo.u[2] << g.s13, geo.k / L, M / L;
    } else {
        geo.u[1] << g.s12, 0.0, 0.0;
        geo.u[2] << g.s13, 0.0, 0.0;
    }
    if (geo.degenerate) return geo;

    geo.v[0] << 1.0, -std::conj(g.s12) / L, std::conj(geo.h) / (L * M);
    geo.v[1] << 0.0, 1.0 / L, -std::conj(geo.k) / (L * M);
    geo.v[2] << 0.0, 0.0, L / M;
    return geo;
}

namespace detail {

inline void require_usable(const UsdGeometry& geo, double p_s, double p_d) {
    require(!geo.degenerate, "A0: geometry is degenerate, no reciprocal basis");
    require(is_probability(p_s) && is_probability(p_d), "A0: p_s and p_d must lie in [0,1]");
}

inline Mat3 signal_projector(const UsdGeometry& geo) {
    return geo.v[0] * geo.v[0].adjoint() + geo.v[1] * geo.v[1].adjoint();
}

inline double min_eigenvalue(const Mat3& a) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace detail

// A0 = I - P_S (|v1><v1| + |v2><v2|) - P_D |v3><v3|
inline Mat3 build_a0(const UsdGeometry& geo, double p_s, double p_d) {
    detail::require_usable(geo, p_s, p_d);
    return Mat3::Identity() - p_s * detail::signal_projector(geo) - p_d * geo.v[2] * geo.v[2].adjoint();
}

// The same operator written out entry by entry in the u-frame.
inline Mat3 a0_explicit(const GramData& g, const UsdGeometry& geo, double p_s, double p_d) {
    detail::require_usable(geo, p_s, p_d);
    const cplx s = g.s12, H = geo.h, K = geo.k;
    const double L = geo.l, M = geo.m;
    Mat3 a;
    a(0, 0) = 1.0 - p_s;
    a(0, 1) = p_s * s / L;
    a(0, 2) = -p_s * H / (L * M);
    a(1, 0) = p_s * std::conj(s) / L;
    a(1, 1) = 1.0 - p_s * (1.0 + std::norm(s)) / (L * L);
    a(1, 2) = p_s * (std::conj(s) * H + K) / (M * L * L);
    a(2, 0) = -p_s * std::conj(H) / (L * M);
    a(2, 1) = p_s * (s * std::conj(H) + std::conj(K)) / (M * L * L);
    a(2, 2) = 1.0 - (p_s * (std::norm(H) + std::norm(K)) + std::pow(L, 4) * p_d) / ((M * L) * (M * L));
    return a;
}

// Closed-form det(A0); valid only for S13 = S23 with real S12.
inline double det_a0_closed(const GramData& g, double p_s, double p_d, const Tolerances& tol = {}) {
    detail::require(g.symmetric(tol), "det(A0): closed form requires S13 = S23 and real S12");
    detail::require(detail::is_probability(p_s) && detail::is_probability(p_d), "det(A0): probabilities out of range");
    const double L = l_value(g), M = m_value(g);
    detail::require(M > tol.degeneracy_tol, "det(A0): degenerate geometry");
    const double M2 = M * M;
    return (2.0 * p_d * p_s + p_s * p_s - p_d * L * L - p_s * (2.0 - std::norm(g.s13) - std::norm(g.s23)) -
            p_d * p_s * p_s + M2) /
           M2;
}

// The det(A0) = 0 curve solved for P_D.
inline double f1(const GramData& g, double p_s, const Tolerances& tol = {}) {
    detail::require(g.symmetric(tol), "f1: requires S13 = S23 and real S12");
    const double s12 = g.s12.real();
    return (p_s - usd_delta(g)) / (p_s - 1.0 - s12);
}

// Maximises (1-ν) P_S + ν P_D over A0 >= 0, P_S, P_D in [0,1].
//
// For fixed P_S, A0 = B - P_D |v3><v3| with B = I - P_S (|v1><v1| + |v2><v2|).
// B >= 0 iff P_S <= 1/λmax(|v1><v1| + |v2><v2|), and on that range det(A0) is
// linear in P_D with its single root at f1(P_S), so the largest feasible P_D
// is min(1, f1(P_S)). The objective along that boundary is concave; it is
// sampled and then refined by golden section.
inline UsdSolution optimize_usd(const GramData& g, double nu, const Tolerances& tol = {}) {
    detail::require(nu > 0.0 && nu < 1.0, "optimize_usd: nu must lie in (0,1)");
    detail::require(g.symmetric(tol), "optimize_usd: only the symmetric case S13 = S23 is supported");
    const UsdGeometry geo = build_geometry(g, tol);

    UsdSolution sol;
    sol.nu = nu;
    if (geo.degenerate) {
        sol.degenerate = true;
        sol.min_eig_a0 = 1.0;
        return sol;
    }

    Eigen::SelfAdjointEigenSolver<Mat3> es(detail::signal_projector(geo), Eigen::EigenvaluesOnly);
    const double ps_max = std::min(1.0, 1.0 / es.eigenvalues()(2));
    sol.ps_max = ps_max;

    auto pd_of = [&](double ps) { return std::clamp(f1(g, ps, tol), 0.0, 1.0); };
    auto objective = [&](double ps) { return (1.0 - nu) * ps + nu * pd_of(ps); };

    const ScalarOptimum best = bracket_and_maximize(objective, 0.0, ps_max, 1024, 1e-10);
    double ps = std::clamp(best.x, 0.0, ps_max);
    double pd = pd_of(ps);

    double eig = detail::min_eigenvalue(build_a0(geo, ps, pd));
    if (eig < -tol.num_tol) {
        // Rounding pushed the curve point just outside the cone; pull P_D back.
        double lo = 0.0, hi = pd;
        for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail::min_eigenvalue(build_a0(geo, ps, mid)) >= -tol.num_tol) lo = mid;
            else hi = mid;
        }
        pd = lo;
        eig = detail::min_eigenvalue(build_a0(geo, ps, pd));
    }

    sol.p_s = ps;
    sol.p_d = pd;
    sol.p0 = 1.0 - (1.0 - nu) * ps - nu * pd;
    sol.objective = (1.0 - nu) * ps + nu * pd;
    sol.min_eig_a0 = eig;
    sol.on_det_zero = std::abs(build_a0(geo, ps, pd).determinant()) <= 1e-9;
    return sol;
}

}  // namespace usdqkd
