// states.hpp
// Truncated Fock-space realisations of the protocol states (weak coherent
// signals, even-cat and squeezed-vacuum decoys) and their overlaps, computed
// both by direct inner products and by closed forms where those exist.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "usdqkd/common.hpp"

namespace usdqkd {

// ── FockVector ───────────────────────────────────────────────────────────────
// Amplitudes indexed by photon number 0..n_cut. tail_mass is the probability
// discarded by truncation (1 - squared norm for exactly normalised states).
class FockVector {
public:
    FockVector() : amplitudes_(2, cplx{0.0, 0.0}) { amplitudes_[0] = 1.0; }

    FockVector(std::vector<cplx> amplitudes, double tail_mass)
        : amplitudes_(std::move(amplitudes)), tail_mass_(tail_mass) {
        detail::require(amplitudes_.size() >= 2, "FockVector needs n_cut >= 1");
    }

    // Arbitrary user amplitudes; normalised on construction.
    static FockVector from_raw(std::vector<cplx> amplitudes) {
        if (amplitudes.size() < 2) amplitudes.resize(2, cplx{0.0, 0.0});
        long double s = 0.0L;
        for (const auto& a : amplitudes) s += std::norm(a);
        detail::require(s > 0.0L, "raw Fock vector must be nonzero");
        const double inv = 1.0 / std::sqrt(static_cast<double>(s));
        for (auto& a : amplitudes) a *= inv;
        return FockVector(std::move(amplitudes), 0.0);
    }

    std::size_t n_cut() const { return amplitudes_.size() - 1; }
    std::size_t size() const { return amplitudes_.size(); }
    std::span<const cplx> amplitudes() const { return amplitudes_; }
    const cplx& operator[](std::size_t n) const { return amplitudes_[n]; }
    double tail_mass() const { return tail_mass_; }

    double norm_squared() const {
        long double s = 0.0L;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return static_cast<double>(s);
    }

    double mean_photon_number() const {
        long double s = 0.0L;
        for (std::size_t n = 0; n < amplitudes_.size(); ++n)
            s += static_cast<long double>(n) * std::norm(amplitudes_[n]);
        return static_cast<double>(s / static_cast<long double>(norm_squared()));
    }

private:
    std::vector<cplx> amplitudes_;
    double tail_mass_ = 0.0;
};

namespace detail {

// Fills amplitudes 0..n_cut with `amp(n)`, doubling n_cut until the
// discarded mass of a unit-norm state drops below tail_tol.
template <class AmplitudeFn>
FockVector grow_until_converged(std::size_t n_cut, const Tolerances& tol, AmplitudeFn&& amp,
                                const char* what) {
    require(n_cut >= 1, std::string(what) + ": n_cut must be >= 1");
    require(n_cut <= tol.n_cut_max, std::string(what) + ": n_cut exceeds n_cut_max");
    for (;;) {
        std::vector<cplx> a(n_cut + 1);
        long double s = 0.0L;
        for (std::size_t n = 0; n <= n_cut; ++n) {
            a[n] = amp(n);
            s += std::norm(a[n]);
        }
        const double tail = std::max(0.0, static_cast<double>(1.0L - s));
        if (tail < tol.tail_tol) return FockVector(std::move(a), tail);
        if (n_cut >= tol.n_cut_max)
            throw TruncationError(std::string(what) + ": tail mass " + std::to_string(tail) +
                                  " above tail_tol at n_cut_max");
        n_cut = std::min(n_cut * 2, tol.n_cut_max);
    }
}

// e^{-a^2/2} a^n / sqrt(n!) in log space; a >= 0.
inline double coherent_magnitude(double alpha, std::size_t n) {
    if (n == 0) return std::exp(-0.5 * alpha * alpha);
    if (alpha == 0.0) return 0.0;
    const double nn = static_cast<double>(n);
    return std::exp(-0.5 * alpha * alpha + nn * std::log(alpha) - 0.5 * std::lgamma(nn + 1.0));
}

}  // namespace detail

inline FockVector fock_coherent(double alpha, double phi, std::size_t n_cut = 16,
                                const Tolerances& tol = {}) {
    detail::require(std::isfinite(alpha) && alpha >= 0.0, "coherent: alpha must be finite and >= 0");
    detail::require(std::isfinite(phi), "coherent: phi must be finite");
    return detail::grow_until_converged(
        n_cut, tol,
        [&](std::size_t n) {
            return std::polar(detail::coherent_magnitude(alpha, n), static_cast<double>(n) * phi);
        },
        "coherent");
}

// |0,r> with real squeezing and zero squeezing phase.
inline FockVector fock_squeezed_vacuum(double r, std::size_t n_cut = 16, const Tolerances& tol = {}) {
    detail::require(std::isfinite(r) && std::abs(r) < 10.0, "squeezed vacuum: need |r| < 10");
    const double t = std::tanh(r);
    const double log_prefactor = -0.5 * std::log(std::cosh(r));
    const double log_abs_t = std::log(std::abs(t));
    return detail::grow_until_converged(
        n_cut, tol,
        [&](std::size_t n) -> cplx {
            if (n % 2 == 1) return 0.0;
            const std::size_t k = n / 2;
            if (k == 0) return std::exp(log_prefactor);
            if (t == 0.0) return 0.0;
            const double kk = static_cast<double>(k);
            // sqrt((2k)!) / (2^k k!) |t|^k
            const double lg = 0.5 * std::lgamma(2.0 * kk + 1.0) - kk * std::log(2.0) -
                              std::lgamma(kk + 1.0) + kk * log_abs_t;
            const double sign = (t < 0.0 && k % 2 == 1) ? -1.0 : 1.0;
            return sign * std::exp(log_prefactor + lg);
        },
        "squeezed vacuum");
}

inline double cat_normalization(double alpha) {
    // Even cat (|a> + |-a>) norm.
    return std::sqrt(2.0 * (1.0 + std::exp(-2.0 * alpha * alpha)));
}

// Even cat (|αe^{iφ}> + |-αe^{iφ}>) / sqrt(2(1 + e^{-2α²})).
inline FockVector fock_cat(double alpha, double phi, std::size_t n_cut = 16, const Tolerances& tol = {}) {
    detail::require(std::isfinite(alpha) && alpha >= 0.0, "cat: alpha must be finite and >= 0");
    detail::require(std::isfinite(phi), "cat: phi must be finite");
    const double inv_norm = 2.0 / cat_normalization(alpha);
    return detail::grow_until_converged(
        n_cut, tol,
        [&](std::size_t n) -> cplx {
            if (n % 2 == 1) return 0.0;
            return std::polar(inv_norm * detail::coherent_magnitude(alpha, n),
                              static_cast<double>(n) * phi);
        },
        "cat");
}

// <a|b>; the shorter vector is zero-padded.
inline cplx inner_product(const FockVector& a, const FockVector& b) {
    const std::size_t n = std::min(a.size(), b.size());
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// ── StatePrep ────────────────────────────────────────────────────────────────
enum class StateKind { Coherent, Cat, SqueezedVacuum, Raw };

inline const char* to_string(StateKind k) {
    switch (k) {
        case StateKind::Coherent: return "coherent";
        case StateKind::Cat: return "cat";
        case StateKind::SqueezedVacuum: return "squeezed";
        case StateKind::Raw: return "raw";
    }
    return "?";
}

struct StatePrep {
    StateKind kind = StateKind::Coherent;
    double alpha = 0.0;
    double phi = 0.0;
    double r = 0.0;
    std::optional<FockVector> raw;

    static StatePrep coherent(double alpha, double phi = 0.0) {
        return {StateKind::Coherent, alpha, phi, 0.0, std::nullopt};
    }
    static StatePrep cat(double alpha, double phi = 0.0) {
        return {StateKind::Cat, alpha, phi, 0.0, std::nullopt};
    }
    static StatePrep squeezed_vacuum(double r) {
        return {StateKind::SqueezedVacuum, 0.0, 0.0, r, std::nullopt};
    }
    static StatePrep from_fock(FockVector v) {
        return {StateKind::Raw, 0.0, 0.0, 0.0, std::move(v)};
    }

    void validate() const {
        switch (kind) {
            case StateKind::Coherent:
            case StateKind::Cat:
                detail::require(std::isfinite(alpha) && alpha >= 0.0, "state prep: alpha must be >= 0");
                detail::require(std::isfinite(phi), "state prep: phi must be finite");
                break;
            case StateKind::SqueezedVacuum:
                detail::require(std::isfinite(r), "state prep: r must be finite");
                break;
            case StateKind::Raw:
                detail::require(raw.has_value(), "state prep: raw kind needs a Fock vector");
                break;
        }
    }
};

inline FockVector realize(const StatePrep& p, std::size_t n_cut = 16, const Tolerances& tol = {}) {
    p.validate();
    switch (p.kind) {
        case StateKind::Coherent: return fock_coherent(p.alpha, p.phi, n_cut, tol);
        case StateKind::Cat: return fock_cat(p.alpha, p.phi, n_cut, tol);
        case StateKind::SqueezedVacuum: return fock_squeezed_vacuum(p.r, n_cut, tol);
        case StateKind::Raw: return *p.raw;
    }
    return {};
}

namespace detail {

// A state written as a finite sum of Gaussian pure states with known
// pairwise overlaps: coherent |β> or squeezed vacuum |0,r>.
struct GaussianTerm {
    cplx weight;
    bool squeezed;
    cplx beta;  // coherent amplitude
    double r;   // squeezing
};

inline std::optional<std::vector<GaussianTerm>> gaussian_terms(const StatePrep& p) {
    switch (p.kind) {
        case StateKind::Coherent:
            return std::vector<GaussianTerm>{{1.0, false, std::polar(p.alpha, p.phi), 0.0}};
        case StateKind::Cat: {
            const double w = 1.0 / cat_normalization(p.alpha);
            const cplx b = std::polar(p.alpha, p.phi);
            return std::vector<GaussianTerm>{{w, false, b, 0.0}, {w, false, -b, 0.0}};
        }
        case StateKind::SqueezedVacuum:
            return std::vector<GaussianTerm>{{1.0, true, 0.0, p.r}};
        case StateKind::Raw:
            return std::nullopt;
    }
    return std::nullopt;
}

inline cplx gaussian_overlap(const GaussianTerm& a, const GaussianTerm& b) {
    if (!a.squeezed && !b.squeezed)
        return std::exp(-0.5 * std::norm(a.beta) - 0.5 * std::norm(b.beta) + std::conj(a.beta) * b.beta);
    if (!a.squeezed && b.squeezed)
        return std::exp(-0.5 * std::norm(a.beta) + 0.5 * std::conj(a.beta) * std::conj(a.beta) * std::tanh(b.r)) /
               std::sqrt(std::cosh(b.r));
    if (a.squeezed && !b.squeezed) return std::conj(gaussian_overlap(b, a));
    return 1.0 / std::sqrt(std::cosh(a.r - b.r));
}

}  // namespace detail

// Closed-form <a|b> for coherent / cat / squeezed-vacuum preps; nullopt for raw.
inline std::optional<cplx> analytic_overlap(const StatePrep& a, const StatePrep& b) {
    const auto ta = detail::gaussian_terms(a);
    const auto tb = detail::gaussian_terms(b);
    if (!ta || !tb) return std::nullopt;
    cplx s{0.0, 0.0};
    for (const auto& x : *ta)
        for (const auto& y : *tb) s += std::conj(x.weight) * y.weight * detail::gaussian_overlap(x, y);
    return s;
}

// ── GramData ─────────────────────────────────────────────────────────────────
// Off-diagonal overlaps of three unit vectors. `residual`, when present, is the
// norm of u3's component orthogonal to span{u1, u2} measured directly in the
// state space; it pins the degeneracy scalar M far more accurately than the
// Gram determinant, which loses half the significant digits near M = 0.
struct GramData {
    cplx s12{0.0, 0.0};
    cplx s13{0.0, 0.0};
    cplx s23{0.0, 0.0};
    std::optional<double> residual;

    Eigen::Matrix3cd matrix() const {
        Eigen::Matrix3cd g;
        g << 1.0, s12, s13,
             std::conj(s12), 1.0, s23,
             std::conj(s13), std::conj(s23), 1.0;
        return g;
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(matrix(), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }

    void validate(const Tolerances& tol = {}) const {
        for (const cplx& s : {s12, s13, s23}) {
            detail::require(std::isfinite(s.real()) && std::isfinite(s.imag()), "gram: non-finite overlap");
            detail::require(std::abs(s) <= 1.0 + tol.num_tol, "gram: |overlap| exceeds 1");
        }
        detail::require(min_eigenvalue() >= -tol.num_tol, "gram: matrix is not positive semidefinite");
    }

    bool symmetric(const Tolerances& tol = {}) const {
        return std::abs(s13 - s23) <= tol.num_tol && std::abs(s12.imag()) <= tol.num_tol;
    }
};

// Per-entry comparison of the Fock-sum and closed-form routes.
struct GramReport {
    GramData numeric;
    std::array<std::optional<cplx>, 3> analytic;  // s12, s13, s23
    double max_discrepancy = 0.0;
    std::size_t n_cut = 0;
    std::array<double, 3> tail_mass{};
};

namespace detail {

// Norm of the part of c orthogonal to span{a, b} (modified Gram-Schmidt).
inline double orthogonal_residual(const FockVector& a, const FockVector& b, const FockVector& c) {
    const std::size_t n = std::max({a.size(), b.size(), c.size()});
    auto pad = [n](const FockVector& v) {
        std::vector<cplx> x(n, cplx{0.0, 0.0});
        std::copy(v.amplitudes().begin(), v.amplitudes().end(), x.begin());
        return x;
    };
    auto dot = [](const std::vector<cplx>& x, const std::vector<cplx>& y) {
        cplx s{0.0, 0.0};
        for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
        return s;
    };
    auto nrm = [&](const std::vector<cplx>& x) { return std::sqrt(dot(x, x).real()); };
    auto axpy = [](std::vector<cplx>& y, cplx k, const std::vector<cplx>& x) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= k * x[i];
    };

    std::vector<cplx> e1 = pad(a), e2 = pad(b), w = pad(c);
    const double n1 = nrm(e1);
    for (auto& x : e1) x /= n1;
    axpy(e2, dot(e1, e2), e1);
    const double n2 = nrm(e2);
    axpy(w, dot(e1, w), e1);
    if (n2 > 0.0) {
        for (auto& x : e2) x /= n2;
        axpy(w, dot(e2, w), e2);
    }
    // second pass for orthogonality to working precision
    axpy(w, dot(e1, w), e1);
    if (n2 > 0.0) axpy(w, dot(e2, w), e2);
    return nrm(w);
}

}  // namespace detail

inline GramReport compare_gram(const StatePrep& u1, const StatePrep& u2, const StatePrep& u3,
                               std::size_t n_cut = 16, const Tolerances& tol = {}) {
    const FockVector f1 = realize(u1, n_cut, tol);
    const FockVector f2 = realize(u2, n_cut, tol);
    const FockVector f3 = realize(u3, n_cut, tol);

    GramReport rep;
    rep.n_cut = std::max({f1.n_cut(), f2.n_cut(), f3.n_cut()});
    rep.tail_mass = {f1.tail_mass(), f2.tail_mass(), f3.tail_mass()};
    rep.numeric.s12 = inner_product(f1, f2);
    rep.numeric.s13 = inner_product(f1, f3);
    rep.numeric.s23 = inner_product(f2, f3);
    rep.numeric.residual = detail::orthogonal_residual(f1, f2, f3);

    rep.analytic = {analytic_overlap(u1, u2), analytic_overlap(u1, u3), analytic_overlap(u2, u3)};
    const std::array<cplx, 3> num = {rep.numeric.s12, rep.numeric.s13, rep.numeric.s23};
    for (std::size_t i = 0; i < 3; ++i)
        if (rep.analytic[i]) rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(*rep.analytic[i] - num[i]));
    return rep;
}

// Numeric Gram entries, cross-checked against closed forms to `cross_tol`.
inline GramData gram_from_preps(const StatePrep& u1, const StatePrep& u2, const StatePrep& u3,
                                std::size_t n_cut = 16, const Tolerances& tol = {}, double cross_tol = 1e-8) {
    GramReport rep = compare_gram(u1, u2, u3, n_cut, tol);
    if (rep.max_discrepancy > cross_tol)
        throw ConsistencyError("gram: closed-form and Fock overlaps differ by " +
                               std::to_string(rep.max_discrepancy));
    rep.numeric.validate(tol);
    return rep.numeric;
}

}  // namespace usdqkd
