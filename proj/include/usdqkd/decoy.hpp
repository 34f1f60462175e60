// decoy.hpp
// Decoy-state design: the even-cat decoy that lies in the span of the two
// signals, and the squeezed-vacuum decoy tuned to make Δ small.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "usdqkd/common.hpp"
#include "usdqkd/optim.hpp"
#include "usdqkd/states.hpp"
#include "usdqkd/usd.hpp"

namespace usdqkd {

struct DecoyDesign {
    StatePrep prep;
    GramData gram;
    double delta = 0.0;
    double m_value = 0.0;
    bool usd_disabled = false;
    double mean_photon_number = 0.0;
    bool signals_coincide = false;  // α = 0: every state is vacuum
};

struct SignalPair {
    StatePrep u1;
    StatePrep u2;
};

inline SignalPair signal_pair(double alpha, double phi = 0.0) {
    return {StatePrep::coherent(alpha, phi), StatePrep::coherent(alpha, phi + std::numbers::pi)};
}

// Gram data, Δ and M for an arbitrary decoy against the signals |±αe^{iφ}>.
inline DecoyDesign design_decoy(double alpha, double phi, const StatePrep& decoy, std::size_t n_cut = 64,
                                const Tolerances& tol = {}) {
    const SignalPair sp = signal_pair(alpha, phi);
    DecoyDesign d;
    d.prep = decoy;
    d.gram = gram_from_preps(sp.u1, sp.u2, decoy, n_cut, tol);
    d.delta = usd_delta(d.gram);
    d.m_value = m_value(d.gram);
    d.usd_disabled = d.m_value < tol.degeneracy_tol;
    d.mean_photon_number = realize(decoy, n_cut, tol).mean_photon_number();
    d.signals_coincide = alpha == 0.0;
    return d;
}

inline DecoyDesign design_cat(double alpha, double phi = 0.0, std::size_t n_cut = 64, const Tolerances& tol = {}) {
    detail::require(std::isfinite(alpha) && alpha > 0.0, "design_cat: alpha must be > 0");
    return design_decoy(alpha, phi, StatePrep::cat(alpha, phi), n_cut, tol);
}

inline DecoyDesign design_squeezed(double alpha, double r, std::size_t n_cut = 64, const Tolerances& tol = {}) {
    return design_decoy(alpha, 0.0, StatePrep::squeezed_vacuum(r), n_cut, tol);
}

// Δ(α, r) = 1 + e^{-2α²} - (2 / cosh r) e^{-α²(1 - tanh r)}
inline double delta_squeezed(double alpha, double r) {
    detail::require(std::isfinite(alpha) && std::isfinite(r), "delta_squeezed: inputs must be finite");
    const double a2 = alpha * alpha;
    return 1.0 + std::exp(-2.0 * a2) - 2.0 / std::cosh(r) * std::exp(-a2 * (1.0 - std::tanh(r)));
}

// Signal amplitude at which ∂Δ/∂α = 0 for a given squeezing r.
inline double optimal_alpha(double r) {
    detail::require(std::isfinite(r) && r >= 0.0, "optimal_alpha: r must be >= 0");
    const double c = std::cosh(r);
    // ln(e^r cosh² r) = r + 2 ln cosh r
    return std::sqrt(std::exp(-r) * c * (r + 2.0 * std::log(c)));
}

struct DeltaMinimum {
    double r = 0.0;
    double delta = 0.0;
};

// Minimises Δ over r in [0, 5] at fixed α.
inline DeltaMinimum minimize_delta(double alpha) {
    detail::require(std::isfinite(alpha) && alpha > 0.0, "minimize_delta: alpha must be > 0");
    const ScalarOptimum m = bracket_and_minimize([alpha](double r) { return delta_squeezed(alpha, r); }, 0.0, 5.0,
                                                 1024, 1e-10);
    return {m.x, m.value};
}

// A normalised Fock vector orthogonal to both signals: the largest residual
// among |0>..|7> after projecting out span{|αe^{iφ}>, |-αe^{iφ}>}.
inline FockVector orthogonal_decoy(double alpha, double phi = 0.0, std::size_t n_cut = 64,
                                   const Tolerances& tol = {}) {
    const SignalPair sp = signal_pair(alpha, phi);
    const FockVector a = realize(sp.u1, n_cut, tol);
    const FockVector b = realize(sp.u2, n_cut, tol);
    const std::size_t dim = std::max(a.size(), b.size());

    auto to_vec = [dim](const FockVector& f) {
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < f.size(); ++i) x(static_cast<Eigen::Index>(i)) = f[i];
        return x;
    };
    Eigen::VectorXcd e1 = to_vec(a).normalized();
    Eigen::VectorXcd e2 = to_vec(b);
    e2 -= e1.dot(e2) * e1;
    const bool have_e2 = e2.norm() > tol.num_tol;
    if (have_e2) e2.normalize();

    Eigen::VectorXcd best;
    double best_norm = -1.0;
    for (std::size_t n = 0; n < std::min<std::size_t>(8, dim); ++n) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
        w(static_cast<Eigen::Index>(n)) = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            w -= e1.dot(w) * e1;
            if (have_e2) w -= e2.dot(w) * e2;
        }
        if (w.norm() > best_norm) {
            best_norm = w.norm();
            best = w;
        }
    }
    best.normalize();
    return FockVector::from_raw(std::vector<cplx>(best.data(), best.data() + best.size()));
}

}  // namespace usdqkd
