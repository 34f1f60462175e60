// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "usdqkd/usdqkd.hpp"

using namespace usdqkd;
namespace fz = oracle::frozen;

namespace {

struct Check {
    bool pass;
    std::string detail;
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

GramData symmetric(double s12, cplx s13) {
    GramData g;
    g.s12 = s12;
    g.s13 = s13;
    g.s23 = s13;
    return g;
}

Check overlaps() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ua(0.0, 2.0), ur(0.0, 1.5), uphi(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const double alpha = ua(rng), r = ur(rng), phi = uphi(rng);
        const StatePrep a = StatePrep::coherent(alpha, phi), b = StatePrep::coherent(alpha, phi + std::numbers::pi);
        const StatePrep sq = StatePrep::squeezed_vacuum(r), cat = StatePrep::cat(alpha, phi);
        const FockVector fa = realize(a, 128), fb = realize(b, 128), fs = realize(sq, 128), fc = realize(cat, 128);

        // coherent pair: exp(-2α²)
        const cplx ab = inner_product(fa, fb);
        worst = std::max(worst, std::abs(ab - *analytic_overlap(a, b)));
        worst = std::max(worst, std::abs(ab - std::exp(-2.0 * alpha * alpha)));
        // coherent vs squeezed: |S13|² = exp(-α²(1 - tanh r cos 2φ)) / cosh r
        const cplx as = inner_product(fa, fs);
        worst = std::max(worst, std::abs(as - *analytic_overlap(a, sq)));
        const double s13sq = std::exp(-alpha * alpha * (1.0 - std::tanh(r) * std::cos(2.0 * phi))) / std::cosh(r);
        worst = std::max(worst, std::abs(std::norm(as) - s13sq));
        // cat and squeezed against the same signal
        worst = std::max(worst, std::abs(inner_product(fa, fc) - *analytic_overlap(a, cat)));
        worst = std::max(worst, std::abs(inner_product(fc, fs) - *analytic_overlap(cat, sq)));
    }
    return {worst <= 1e-8, "max |analytic - Fock| = " + num(worst)};
}

Check reciprocity() {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Matrix3cd m = oracle::random_gram(rng);
        GramData g;
        g.s12 = m(0, 1);
        g.s13 = m(0, 2);
        g.s23 = m(1, 2);
        const UsdGeometry geo = build_geometry(g);
        if (geo.degenerate) return {false, "random Gram flagged degenerate"};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                worst = std::max(worst, std::abs(geo.v[i].dot(geo.u[j]) - (i == j ? 1.0 : 0.0)));
    }
    return {worst < 1e-9, "max |<v_i|u_j> - delta_ij| = " + num(worst)};
}

Check determinant() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, worst_curve = 0.0;
    int curve_points = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto sg = oracle::random_symmetric_gram(rng);
        const GramData g = symmetric(sg.s12, sg.s13);
        const UsdGeometry geo = build_geometry(g);
        const double ps = u(rng), pd = u(rng);
        worst = std::max(worst, std::abs(det_a0_closed(g, ps, pd) - oracle::det3(build_a0(geo, ps, pd))));
        const double p = u(rng), q = f1(g, p);
        if (q < 0.0 || q > 1.0) continue;
        ++curve_points;
        worst_curve = std::max(worst_curve, std::abs(oracle::det3(build_a0(geo, p, q))));
    }
    return {worst <= 1e-10 && worst_curve <= 1e-10 && curve_points > 100,
            "closed vs cofactor " + num(worst) + ", |det| on f1 curve " + num(worst_curve) + " (" +
                std::to_string(curve_points) + " points)"};
}

Check cat_kill_switch() {
    double worst_m = 0.0, worst_delta = 0.0;
    bool zeros = true;
    for (int k = 1; k <= 20; ++k) {
        const double alpha = 0.1 * k;
        const DecoyDesign d = design_cat(alpha);
        worst_m = std::max(worst_m, d.m_value);
        worst_delta = std::max(worst_delta, std::abs(d.delta));
        const UsdSolution s = optimize_usd(d.gram, 0.01);
        zeros = zeros && s.p_s == 0.0 && s.p_d == 0.0 && s.p0 == 1.0;
    }
    return {worst_m < 1e-8 && worst_delta <= 1e-10 && zeros,
            "max M " + num(worst_m) + ", max |Delta| " + num(worst_delta) + ", (0,0,1) " + (zeros ? "yes" : "no")};
}

Check optimizer() {
    std::vector<std::pair<GramData, double>> cases;
    cases.emplace_back(symmetric(fz::exp_m05, 0.0), 0.1);  // orthogonal decoy at α = 0.5
    cases.emplace_back(design_squeezed(optimal_alpha(0.5), 0.5).gram, 0.01);
    cases.emplace_back(design_squeezed(0.8, 0.3).gram, 0.2);
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> unu(0.01, 0.5);
    while (cases.size() < 10) {
        const auto sg = oracle::random_symmetric_gram(rng, 0.05);
        cases.emplace_back(symmetric(sg.s12, sg.s13), unu(rng));
    }
    double worst = 0.0;
    bool psd = true;
    for (const auto& [g, nu] : cases) {
        const UsdSolution s = optimize_usd(g, nu);
        const auto grid = oracle::grid_usd(g.matrix(), nu);
        worst = std::max(worst, std::abs(s.objective - grid.objective));
        psd = psd && s.min_eig_a0 >= -1e-10;
    }
    const UsdSolution orth = optimize_usd(cases.front().first, 0.1);
    const double orth_err = std::abs(orth.p_s - fz::two_state_bound_05);
    return {worst <= 1e-3 && psd && orth_err <= 1e-6,
            "max |objective - grid| " + num(worst) + ", orthogonal P_S " + std::to_string(orth.p_s)};
}

Check stationarity() {
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double r = 0.1 * k, a = optimal_alpha(r);
        worst = std::max(worst, std::abs(delta_squeezed(a + h, r) - delta_squeezed(a - h, r)) / (2 * h));
        worst = std::max(worst,
                         std::abs(oracle::delta_reference(a + h, r) - oracle::delta_reference(a - h, r)) / (2 * h));
    }
    double worst_min = 0.0;
    for (double alpha : {0.3, 0.5, fz::opt_alpha_05, 1.0, 1.5}) {
        const DeltaMinimum m = minimize_delta(alpha);
        const auto [gr, gv] =
            oracle::grid_minimize([&](double r) { return oracle::delta_reference(alpha, r); }, 0.0, 5.0, 1e-3);
        worst_min = std::max(worst_min, std::abs(m.delta - gv));
    }
    return {worst < 1e-6 && worst_min <= 1e-6,
            "max |dDelta/dalpha| " + num(worst) + ", minimize_delta vs grid " + num(worst_min)};
}

Check channel_algebra() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double row_err = 0.0, lin_err = 0.0, mask_err = 0.0;
    int feasible = 0, decoy_cases = 0;
    bool decoy_rule = true;
    for (int t = 0; t < 2000; ++t) {
        ChannelModel m;
        m.g = u(rng);
        m.e = (1.0 - m.g) * u(rng);
        m.d0 = 0.5 * u(rng);
        m.d1 = 0.5 * u(rng);
        EveStrategy e;
        e.p_e = u(rng);
        e.p_s = u(rng);
        e.p_d = u(rng);
        e.g_e = u(rng);
        e.e_e = (1.0 - e.g_e) * u(rng);
        e.d0_e = 0.5 * u(rng);
        e.d1_e = 0.5 * u(rng);

        const CombinedChannel ab = ab_table(m), aeb = aeb_table(m, e);
        EveStrategy full = e;
        full.p_e = 1.0;
        const CombinedChannel eve_only = aeb_table(m, full);
        for (int i = 0; i < 3; ++i) {
            row_err = std::max({row_err, std::abs(ab.row_sum(i) - 1.0), std::abs(aeb.row_sum(i) - 1.0)});
            for (int j = 0; j < 3; ++j)
                lin_err = std::max(lin_err, std::abs(aeb(i, j) - ((1 - e.p_e) * ab(i, j) + e.p_e * eve_only(i, j))));
        }

        if (m.d() == 0.0) continue;
        const double ps = u(rng), pd = u(rng);
        const EveSolution sol = solve_eve(m, ps, pd);
        if (pd < m.d()) {
            ++decoy_cases;
            decoy_rule = decoy_rule && !sol.feasible;
        }
        if (sol.feasible) {
            ++feasible;
            const CombinedChannel att = aeb_table(m, *sol.strategy);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) mask_err = std::max(mask_err, std::abs(att(i, j) - ab(i, j)));
        }
    }
    const bool ok = row_err <= 1e-12 && lin_err <= 1e-12 && mask_err <= 1e-12 && decoy_rule && feasible > 10 &&
                    decoy_cases > 10;
    return {ok, "row sums " + num(row_err) + ", linearity " + num(lin_err) + ", masking " + num(mask_err) + " (" +
                    std::to_string(feasible) + " feasible), P_D<D infeasible in " + std::to_string(decoy_cases) +
                    " cases: " + (decoy_rule ? "yes" : "no")};
}

Check detection() {
    SimConfig honest;
    honest.n_pulses = 1000000;
    honest.nu = 0.01;
    honest.channel = {0.9, 0.01, 0.01, 0.01};
    honest.seed = 20240611;
    SimConfig attacked = honest;
    // cat decoy: Eve's USD never identifies it, and she blocks it
    const UsdSolution usd = optimize_usd(design_cat(0.5).gram, honest.nu);
    EveStrategy e;
    e.p_e = 1.0;
    e.p_s = usd.p_s;
    e.p_d = usd.p_d;
    attacked.eve = e;

    const ExperimentResult a = run_experiment(attacked, 5.0);
    const ExperimentResult h = run_experiment(honest, 5.0, 0.0);
    const bool repro = a.stats == run_experiment(attacked, 5.0, std::nullopt, 4).stats &&
                       h.stats == run_experiment(honest, 5.0, 0.0, 3).stats;
    const bool ok = a.verdict.attack_detected && !h.verdict.attack_detected && repro && usd.p_d == 0.0;
    return {ok, "attacked n_d=" + std::to_string(a.stats.n_d()) + " of " + std::to_string(a.stats.decoys_sent()) +
                    " flagged=" + (a.verdict.attack_detected ? "yes" : "no") + "; honest n_d=" +
                    std::to_string(h.stats.n_d()) + " of " + std::to_string(h.stats.decoys_sent()) +
                    " flagged=" + (h.verdict.attack_detected ? "yes" : "no") + "; reproducible " +
                    (repro ? "yes" : "no")};
}

Check loss_budget() {
    const auto l = max_loss(0.5, 0.5, 0.2, 0.01);
    const double expected = -10.0 * std::log10(0.04);
    const double err = l ? std::abs(*l - expected) : INFINITY;
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool branch = true;
    for (int t = 0; t < 10000; ++t) {
        const double mu = 0.01 + 0.99 * u(rng), eb = u(rng), ed = u(rng);
        const double pd = t % 2 ? u(rng) * 0.1 : mu * eb * ed;  // half the draws sit exactly on the boundary
        branch = branch && (max_loss(mu, eb, ed, pd).has_value() == (mu * eb * ed > pd));
    }
    return {err <= 1e-6 && branch && std::abs(*l - 13.979) < 1e-3,
            "L_max " + std::to_string(l.value_or(NAN)) + " dB (error " + num(err) + "), infeasible iff mu eta eta <= P_D: " +
                (branch ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria = {
        {"overlap correctness", overlaps},
        {"reciprocal basis", reciprocity},
        {"determinant identity", determinant},
        {"cat-state kill switch", cat_kill_switch},
        {"optimizer vs brute force", optimizer},
        {"stationarity of optimal alpha", stationarity},
        {"channel algebra", channel_algebra},
        {"end-to-end detection", detection},
        {"loss budget", loss_budget},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Check o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    secs);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
