// channel.hpp
// Conditional-probability tables of the honest Alice-Bob channel and of the
// channel with an intercept-resend USD attack, Eve's statistics-preserving
// parameters, the decoy-count threshold test and the loss budget.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "usdqkd/common.hpp"

namespace usdqkd {

// Row/column labels of a CombinedChannel.
enum Symbol : int { Zero = 0, One = 1, Decoy = 2 };
enum Outcome : int { Read0 = 0, Read1 = 1, Inconclusive = 2 };

// Honest channel: inconclusive g, bitflip e, decoy read as 0/1 with d0/d1.
struct ChannelModel {
    double g = 0.0;
    double e = 0.0;
    double d0 = 0.0;
    double d1 = 0.0;

    double c() const { return 1.0 - g - e; }
    double d() const { return d0 + d1; }

    void validate() const {
        using detail::is_probability;
        detail::require(is_probability(g) && is_probability(e) && is_probability(d0) && is_probability(d1),
                        "channel: g, e, d0, d1 must lie in [0,1]");
        detail::require(g + e <= 1.0, "channel: g + e must not exceed 1");
        detail::require(d0 + d1 <= 1.0, "channel: d0 + d1 must not exceed 1");
    }
};

struct EveStrategy {
    double p_e = 0.0;  // fraction of pulses routed through Eve
    double p_s = 0.0;  // USD success on signals
    double p_d = 0.0;  // USD success on decoys
    double g_e = 0.0;
    double e_e = 0.0;
    double d0_e = 0.0;
    double d1_e = 0.0;

    double c_e() const { return 1.0 - g_e - e_e; }
    double d_e() const { return d0_e + d1_e; }

    void validate() const {
        using detail::is_probability;
        for (double p : {p_e, p_s, p_d, g_e, e_e, d0_e, d1_e})
            detail::require(is_probability(p), "eve: every parameter must lie in [0,1]");
        detail::require(g_e + e_e <= 1.0, "eve: g_e + e_e must not exceed 1");
        detail::require(d0_e + d1_e <= 1.0, "eve: d0_e + d1_e must not exceed 1");
    }
};

// Rows: input 0 / 1 / decoy. Columns: output 0 / 1 / inconclusive.
struct CombinedChannel {
    std::array<std::array<double, 3>, 3> p{};

    const std::array<double, 3>& row(int input) const { return p[static_cast<std::size_t>(input)]; }
    double operator()(int input, int output) const {
        return p[static_cast<std::size_t>(input)][static_cast<std::size_t>(output)];
    }
    double row_sum(int input) const {
        const auto& r = row(input);
        return r[0] + r[1] + r[2];
    }
};

inline CombinedChannel ab_table(const ChannelModel& m) {
    m.validate();
    CombinedChannel t;
    t.p[Zero] = {m.c(), m.e, m.g};
    t.p[One] = {m.e, m.c(), m.g};
    t.p[Decoy] = {m.d0, m.d1, 1.0 - m.d0 - m.d1};
    return t;
}

// Mixture of the honest channel (weight 1 - p_e) and Eve's resend channel.
inline CombinedChannel aeb_table(const ChannelModel& m, const EveStrategy& eve) {
    m.validate();
    eve.validate();
    const double pe = eve.p_e, ps = eve.p_s, pd = eve.p_d;
    const double c = m.c(), d = m.d();
    CombinedChannel t;
    const double conclusive = (1.0 - pe) * c + pe * ps * eve.c_e();
    const double flipped = (1.0 - pe) * m.e + pe * ps * eve.e_e;
    const double lost = (1.0 - pe) * m.g + pe * (ps * eve.g_e + (1.0 - ps));
    t.p[Zero] = {conclusive, flipped, lost};
    t.p[One] = {flipped, conclusive, lost};
    t.p[Decoy] = {(1.0 - pe) * m.d0 + pe * pd * eve.d0_e, (1.0 - pe) * m.d1 + pe * pd * eve.d1_e,
                  (1.0 - pe) * (1.0 - d) + pe * (pd * (1.0 - eve.d_e()) + (1.0 - pd))};
    return t;
}

// ── solve_eve ────────────────────────────────────────────────────────────────
enum class EveViolation {
    AttackImpossible,  // p_s = 0 or p_d = 0: nothing to resend
    SignalRate,        // p_s < 1 - g: detection rate cannot be restored
    SignalError,       // e_e > 1 or g_e + e_e > 1
    DecoyRate,         // p_d < d: decoy detection rate cannot be restored
};

inline const char* to_string(EveViolation v) {
    switch (v) {
        case EveViolation::AttackImpossible: return "attack_impossible";
        case EveViolation::SignalRate: return "signal_rate";
        case EveViolation::SignalError: return "signal_error";
        case EveViolation::DecoyRate: return "decoy_rate";
    }
    return "?";
}

inline const char* describe(EveViolation v) {
    switch (v) {
        case EveViolation::AttackImpossible: return "USD success probability is zero; attack impossible";
        case EveViolation::SignalRate: return "p_s < 1 - g: signal detection rate cannot be maintained";
        case EveViolation::SignalError: return "resend parameters g_e + e_e exceed 1";
        case EveViolation::DecoyRate: return "p_d < d: decoy detection rate cannot be maintained";
    }
    return "?";
}

struct EveSolution {
    bool feasible = false;
    std::vector<EveViolation> violations;
    // Raw values zeroing each rate bracket; may lie outside [0,1] when infeasible.
    double g_e = 0.0;
    double e_e = 0.0;
    double d_e = 0.0;
    std::optional<EveStrategy> strategy;  // set only when feasible (p_e = 1)

    bool attack_impossible() const {
        return !violations.empty() && violations.front() == EveViolation::AttackImpossible;
    }
};

// Resend parameters that keep the detection, error and decoy rates unchanged.
inline EveSolution solve_eve(const ChannelModel& m, double p_s, double p_d) {
    m.validate();
    detail::require(detail::is_probability(p_s) && detail::is_probability(p_d), "solve_eve: p_s, p_d must lie in [0,1]");
    const double d = m.d();
    detail::require(d > 0.0, "solve_eve: decoy detection probability d must be > 0");

    EveSolution sol;
    if (p_s == 0.0 || p_d == 0.0) {
        sol.violations.push_back(EveViolation::AttackImpossible);
        return sol;
    }
    sol.g_e = 1.0 - (1.0 - m.g) / p_s;
    sol.e_e = m.e / p_s;
    sol.d_e = d / p_d;

    if (sol.g_e < 0.0) sol.violations.push_back(EveViolation::SignalRate);
    if (sol.e_e > 1.0 || sol.g_e + sol.e_e > 1.0) sol.violations.push_back(EveViolation::SignalError);
    if (sol.d_e > 1.0) sol.violations.push_back(EveViolation::DecoyRate);
    sol.feasible = sol.violations.empty();
    if (sol.feasible) {
        EveStrategy s;
        s.p_e = 1.0;
        s.p_s = p_s;
        s.p_d = p_d;
        s.g_e = sol.g_e;
        s.e_e = sol.e_e;
        s.d0_e = m.d0 / p_d;
        s.d1_e = m.d1 / p_d;
        sol.strategy = s;
    }
    return sol;
}

// Decoy detection probability seen by Bob under a (possibly partial) attack.
inline double attacked_decoy_rate(const ChannelModel& m, const EveStrategy& eve) {
    return (1.0 - eve.p_e) * m.d() + eve.p_e * eve.p_d * eve.d_e();
}

// ── threshold_test ───────────────────────────────────────────────────────────
struct ThresholdVerdict {
    double n = 0.0;
    double n_d = 0.0;
    double z = 0.0;
    double d = 0.0;
    double d_tilde = 0.0;
    double lower_attack_bound = 0.0;  // N D~ + z sqrt(N D~ (1 - D~))
    double upper_honest_bound = 0.0;  // N D - z sqrt(N D (1 - D))
    bool attack_detected = false;
    bool bounds_separated = false;
};

inline ThresholdVerdict threshold_test(double n, double n_d, double d, double d_tilde, double z) {
    detail::require(n > 0.0, "threshold_test: n must be > 0");
    detail::require(n_d >= 0.0, "threshold_test: n_d must be >= 0");
    detail::require(z > 0.0, "threshold_test: z must be > 0");
    detail::require(0.0 <= d_tilde && d_tilde <= d && d <= 1.0, "threshold_test: need 0 <= d_tilde <= d <= 1");
    ThresholdVerdict v;
    v.n = n;
    v.n_d = n_d;
    v.z = z;
    v.d = d;
    v.d_tilde = d_tilde;
    v.lower_attack_bound = n * d_tilde + z * std::sqrt(n * d_tilde * (1.0 - d_tilde));
    v.upper_honest_bound = n * d - z * std::sqrt(n * d * (1.0 - d));
    v.bounds_separated = v.lower_attack_bound < v.upper_honest_bound;
    v.attack_detected = v.bounds_separated && n_d <= v.lower_attack_bound;
    return v;
}

// Smallest real N at which the two bounds separate (infinite if d_tilde = d).
inline double separation_point(double d, double d_tilde, double z) {
    const double gap = d - d_tilde;
    if (gap <= 0.0) return INFINITY;
    const double spread = z * (std::sqrt(d_tilde * (1.0 - d_tilde)) + std::sqrt(d * (1.0 - d)));
    return (spread / gap) * (spread / gap);
}

// Loss budget in dB: -10 log10(μ η_B η_D - P_D); nullopt when μ η_B η_D <= P_D.
inline std::optional<double> max_loss(double mu, double eta_b, double eta_d, double p_d) {
    detail::require(std::isfinite(mu) && mu > 0.0, "max_loss: mu must be > 0");
    detail::require(detail::is_probability(eta_b) && detail::is_probability(eta_d) && detail::is_probability(p_d),
                    "max_loss: eta_b, eta_d, p_d must lie in [0,1]");
    const double margin = mu * eta_b * eta_d - p_d;
    if (margin <= 0.0) return std::nullopt;
    return -10.0 * std::log10(margin);
}

}  // namespace usdqkd
