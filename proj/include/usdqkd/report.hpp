// report.hpp
// The five analyses behind the command-line tool. Each returns one JSON
// document, an exit code and, for sweeps, a CSV series.

#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "usdqkd/channel.hpp"
#include "usdqkd/config.hpp"
#include "usdqkd/decoy.hpp"
#include "usdqkd/montecarlo.hpp"
#include "usdqkd/states.hpp"
#include "usdqkd/usd.hpp"

namespace usdqkd::cli {

enum ExitCode : int { Success = 0, InvalidInput = 2, Infeasible = 3 };

inline constexpr const char* kSchemaVersion = "usdqkd.report/1";

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

struct CommandResult {
    json report;
    int exit_code = Success;
    std::optional<Csv> csv;
};

// Shortest round-trip decimal, independent of the global locale.
inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

inline json to_json(const CombinedChannel& t) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({t(i, 0), t(i, 1), t(i, 2)});
    return rows;
}

inline json to_json(const UsdSolution& s) {
    return json{{"p_s", s.p_s},
                {"p_d", s.p_d},
                {"p0", s.p0},
                {"objective", s.objective},
                {"nu", s.nu},
                {"min_eig_a0", s.min_eig_a0},
                {"on_det_zero", s.on_det_zero},
                {"degenerate", s.degenerate},
                {"ps_max", s.ps_max}};
}

inline json to_json(const EveStrategy& e) {
    return json{{"p_e", e.p_e}, {"p_s", e.p_s}, {"p_d", e.p_d}, {"g_e", e.g_e},
                {"e_e", e.e_e}, {"d0_e", e.d0_e}, {"d1_e", e.d1_e}};
}

inline json to_json(const ThresholdVerdict& v) {
    return json{{"n", v.n},
                {"n_d", v.n_d},
                {"z", v.z},
                {"d", v.d},
                {"d_tilde", v.d_tilde},
                {"lower_attack_bound", v.lower_attack_bound},
                {"upper_honest_bound", v.upper_honest_bound},
                {"bounds_separated", v.bounds_separated},
                {"attack_detected", v.attack_detected},
                {"confidence", std::erf(v.z / std::sqrt(2.0))}};
}

inline json to_json(const SimStats& s) {
    json counts = json::array(), rates = json::array(), errs = json::array();
    for (int i = 0; i < 3; ++i) {
        counts.push_back({s.counts[i][0], s.counts[i][1], s.counts[i][2]});
        rates.push_back({s.rate(i, 0), s.rate(i, 1), s.rate(i, 2)});
        errs.push_back({s.std_error(i, 0), s.std_error(i, 1), s.std_error(i, 2)});
    }
    return json{{"n_pulses", s.n_pulses}, {"counts", counts},     {"rates", rates},
                {"std_errors", errs},     {"decoys_sent", s.decoys_sent()}, {"n_d", s.n_d()}};
}

inline json envelope(const std::string& command, const RunConfig& c) {
    return json{{"schema", kSchemaVersion},
                {"command", command},
                {"inputs",
                 {{"alpha", c.signal_alpha()},
                  {"phi", c.phi},
                  {"decoy", to_string(c.decoy.kind)},
                  {"r", c.decoy.r},
                  {"nu", c.nu},
                  {"n_cut", c.n_cut}}}};
}

namespace detail {

struct Analysis {
    GramReport gram;
    double m = 0.0;
    double delta = 0.0;
    double mean_photon_number = 0.0;
};

inline Analysis analyse(const RunConfig& c, double alpha) {
    const SignalPair sp = signal_pair(alpha, c.phi);
    const StatePrep decoy = decoy_prep(c, alpha);
    Analysis a;
    a.gram = compare_gram(sp.u1, sp.u2, decoy, c.n_cut, c.tolerances);
    a.gram.numeric.validate(c.tolerances);
    a.m = m_value(a.gram.numeric);
    a.delta = usd_delta(a.gram.numeric);
    a.mean_photon_number = realize(decoy, c.n_cut, c.tolerances).mean_photon_number();
    return a;
}

inline RunConfig with_param(RunConfig c, const std::string& param, double x) {
    if (param == "alpha") {
        c.alpha = x;
        c.decoy.match_alpha = false;
    } else if (param == "r") {
        c.decoy.r = x;
    } else if (param == "mu") {
        c.loss.mu = x;
    }
    return c;
}

inline json gram_json(const Analysis& a, double cross_tol) {
    const std::array<const char*, 3> names = {"s12", "s13", "s23"};
    const std::array<cplx, 3> num = {a.gram.numeric.s12, a.gram.numeric.s13, a.gram.numeric.s23};
    json entries = json::object();
    for (std::size_t i = 0; i < 3; ++i) {
        json e{{"numeric", to_json(num[i])}};
        if (a.gram.analytic[i]) {
            e["analytic"] = to_json(*a.gram.analytic[i]);
            e["discrepancy"] = std::abs(*a.gram.analytic[i] - num[i]);
        } else {
            e["analytic"] = nullptr;
            e["discrepancy"] = nullptr;
        }
        entries[names[i]] = e;
    }
    return json{{"entries", entries},
                {"max_discrepancy", a.gram.max_discrepancy},
                {"consistent", a.gram.max_discrepancy <= cross_tol},
                {"n_cut", a.gram.n_cut},
                {"tail_mass", a.gram.tail_mass},
                {"residual", a.gram.numeric.residual.value_or(0.0)},
                {"m", a.m},
                {"delta", a.delta},
                {"decoy_mean_photon_number", a.mean_photon_number}};
}

inline std::optional<EveStrategy> explicit_eve(const RunConfig& c) {
    const auto& o = c.eve;
    EveStrategy e;
    e.p_e = o.p_e.value_or(1.0);
    e.p_s = o.p_s.value_or(0.0);
    e.p_d = o.p_d.value_or(0.0);
    e.g_e = o.g_e.value_or(0.0);
    e.e_e = o.e_e.value_or(0.0);
    e.d0_e = o.d0_e.value_or(0.0);
    e.d1_e = o.d1_e.value_or(0.0);
    e.validate();
    return e;
}

}  // namespace detail

inline CommandResult cmd_overlaps(const RunConfig& c) {
    CommandResult res;
    res.report = envelope("overlaps", c);
    const auto a = detail::analyse(c, c.signal_alpha());
    res.report["gram"] = detail::gram_json(a, 1e-8);
    return res;
}

inline CommandResult cmd_usd(const RunConfig& c) {
    CommandResult res;
    res.report = envelope("usd", c);

    auto point = [&](const RunConfig& rc) {
        const double alpha = rc.signal_alpha();
        const auto a = detail::analyse(rc, alpha);
        const UsdSolution s = optimize_usd(a.gram.numeric, rc.nu, rc.tolerances);
        return std::tuple{alpha, a, s};
    };

    const auto [alpha, a, s] = point(c);
    res.report["gram"] = detail::gram_json(a, 1e-8);
    res.report["solution"] = to_json(s);
    res.report["degenerate"] = s.degenerate;
    if (s.degenerate) res.exit_code = Infeasible;

    if (c.sweep) {
        usdqkd::detail::require(c.sweep->param == "alpha" || c.sweep->param == "r", "sweep.param: usd sweeps alpha or r");
        Csv csv{{"param", "alpha", "r", "delta", "m", "degenerate", "p_s", "p_d", "p0"}, {}};
        json series = json::array();
        for (std::size_t i = 0; i < c.sweep->steps; ++i) {
            const double x = c.sweep->at(i);
            const RunConfig rc = detail::with_param(c, c.sweep->param, x);
            const auto [al, an, so] = point(rc);
            csv.rows.push_back({fmt(x), fmt(al), fmt(rc.decoy.r), fmt(an.delta), fmt(an.m), so.degenerate ? "1" : "0",
                                fmt(so.p_s), fmt(so.p_d), fmt(so.p0)});
            series.push_back({{"param", x}, {"alpha", al}, {"r", rc.decoy.r}, {"delta", an.delta}, {"m", an.m},
                              {"degenerate", so.degenerate}, {"p_s", so.p_s}, {"p_d", so.p_d}, {"p0", so.p0}});
        }
        res.report["sweep"] = {{"param", c.sweep->param}, {"points", series}};
        res.csv = std::move(csv);
    }
    return res;
}

inline CommandResult cmd_eve(const RunConfig& c) {
    CommandResult res;
    res.report = envelope("eve", c);

    double p_s = 0.0, p_d = 0.0;
    if (c.eve.p_s && c.eve.p_d) {
        p_s = *c.eve.p_s;
        p_d = *c.eve.p_d;
        res.report["usd_source"] = "config";
    } else {
        const auto a = detail::analyse(c, c.signal_alpha());
        const UsdSolution s = optimize_usd(a.gram.numeric, c.nu, c.tolerances);
        p_s = c.eve.p_s.value_or(s.p_s);
        p_d = c.eve.p_d.value_or(s.p_d);
        res.report["usd_source"] = "optimize_usd";
        res.report["solution"] = to_json(s);
    }

    const EveSolution sol = solve_eve(c.channel, p_s, p_d);
    json violations = json::array();
    for (auto v : sol.violations) violations.push_back({{"code", to_string(v)}, {"message", describe(v)}});

    json eve{{"p_s", p_s},
             {"p_d", p_d},
             {"feasible", sol.feasible},
             {"attack_impossible", sol.attack_impossible()},
             {"violations", violations},
             {"g_e", sol.g_e},
             {"e_e", sol.e_e},
             {"d_e", sol.d_e}};
    eve["strategy"] = sol.strategy ? to_json(*sol.strategy) : json(nullptr);
    res.report["eve"] = eve;
    res.report["honest_table"] = to_json(ab_table(c.channel));
    res.report["attacked_table"] = sol.strategy ? to_json(aeb_table(c.channel, *sol.strategy)) : json(nullptr);
    res.report["decoy_secure"] = p_d < c.channel.d();
    if (!sol.feasible) res.exit_code = Infeasible;
    return res;
}

inline CommandResult cmd_simulate(const RunConfig& c) {
    CommandResult res;
    res.report = envelope("simulate", c);

    SimConfig sim;
    sim.n_pulses = c.simulation.n_pulses;
    sim.nu = c.nu;
    sim.channel = c.channel;
    sim.seed = c.simulation.seed;
    sim.chunk_size = c.simulation.chunk_size;

    switch (c.simulation.attack) {
        case AttackMode::None: break;
        case AttackMode::Explicit: sim.eve = detail::explicit_eve(c); break;
        case AttackMode::Solved: {
            const auto a = detail::analyse(c, c.signal_alpha());
            const UsdSolution s = optimize_usd(a.gram.numeric, c.nu, c.tolerances);
            const EveSolution es = solve_eve(c.channel, s.p_s, s.p_d);
            if (es.strategy) {
                EveStrategy e = *es.strategy;
                e.p_e = c.eve.p_e.value_or(1.0);
                sim.eve = e;
            } else {
                // Eve cannot mask herself: she still intercepts with her optimal
                // USD and blocks every inconclusive result.
                EveStrategy e;
                e.p_e = c.eve.p_e.value_or(1.0);
                e.p_s = s.p_s;
                e.p_d = s.p_d;
                e.g_e = std::clamp(es.g_e, 0.0, 1.0);
                e.e_e = std::clamp(es.e_e, 0.0, 1.0 - e.g_e);
                const double scale = c.channel.d() > 0 ? std::min(1.0, es.d_e) / c.channel.d() : 0.0;
                e.d0_e = c.channel.d0 * scale;
                e.d1_e = c.channel.d1 * scale;
                sim.eve = e;
            }
            res.report["solution"] = to_json(s);
            break;
        }
    }

    const ExperimentResult ex = run_experiment(sim, c.simulation.z, c.simulation.d_tilde, c.simulation.threads);
    res.report["simulation"] = {{"n_pulses", sim.n_pulses},
                                {"seed", sim.seed},
                                {"chunk_size", sim.chunk_size},
                                {"attack", to_string(c.simulation.attack)}};
    res.report["simulation"]["eve"] = sim.eve ? to_json(*sim.eve) : json(nullptr);
    res.report["expected_table"] = to_json(sim.table());
    res.report["stats"] = to_json(ex.stats);
    res.report["verdict"] = to_json(ex.verdict);
    return res;
}

inline CommandResult cmd_maxloss(const RunConfig& c) {
    CommandResult res;
    res.report = envelope("maxloss", c);

    auto mu_of = [&](const RunConfig& rc) {
        if (rc.loss.mu) return *rc.loss.mu;
        return detail::analyse(rc, rc.signal_alpha()).mean_photon_number;
    };
    const double mu = mu_of(c);
    const auto l = max_loss(mu, c.loss.eta_b, c.loss.eta_d, c.loss.p_d);
    res.report["loss"] = {{"mu", mu},
                          {"eta_b", c.loss.eta_b},
                          {"eta_d", c.loss.eta_d},
                          {"p_d", c.loss.p_d},
                          {"feasible", l.has_value()}};
    res.report["loss"]["l_max_db"] = l ? json(*l) : json(nullptr);
    if (!l) res.exit_code = Infeasible;

    if (c.sweep) {
        usdqkd::detail::require(c.sweep->param == "mu", "sweep.param: maxloss sweeps mu");
        Csv csv{{"mu", "l_max_db", "feasible"}, {}};
        for (std::size_t i = 0; i < c.sweep->steps; ++i) {
            const double x = c.sweep->at(i);
            const auto li = max_loss(x, c.loss.eta_b, c.loss.eta_d, c.loss.p_d);
            csv.rows.push_back({fmt(x), li ? fmt(*li) : "", li ? "1" : "0"});
        }
        res.csv = std::move(csv);
    }
    return res;
}

inline CommandResult run_command(const std::string& command, const RunConfig& c) {
    if (command == "overlaps") return cmd_overlaps(c);
    if (command == "usd") return cmd_usd(c);
    if (command == "eve") return cmd_eve(c);
    if (command == "simulate") return cmd_simulate(c);
    if (command == "maxloss") return cmd_maxloss(c);
    throw ValidationError("unknown command: " + command);
}

namespace detail {

template <class Pred>
std::optional<std::string> need(const json& obj, const char* key, Pred pred, const char* what) {
    if (!obj.is_object() || !obj.contains(key)) return std::string("missing ") + key;
    if (!pred(obj.at(key))) return std::string(key) + ": expected " + what;
    return std::nullopt;
}

}  // namespace detail

// Structural check of an emitted report; returns the first problem found.
inline std::optional<std::string> validate_report(const json& r) {
    using detail::need;
    auto is_num = [](const json& j) { return j.is_number(); };
    auto is_bool = [](const json& j) { return j.is_boolean(); };
    auto is_obj = [](const json& j) { return j.is_object(); };
    auto is_str = [](const json& j) { return j.is_string(); };
    auto is_table = [](const json& j) {
        if (!j.is_array() || j.size() != 3) return false;
        for (const auto& row : j)
            if (!row.is_array() || row.size() != 3) return false;
        return true;
    };
    auto is_table_or_null = [&](const json& j) { return j.is_null() || is_table(j); };
    auto is_num_or_null = [](const json& j) { return j.is_null() || j.is_number(); };

    std::optional<std::string> e;
    if ((e = need(r, "schema", is_str, "string"))) return e;
    if (r.at("schema") != kSchemaVersion) return "schema: unexpected version";
    if ((e = need(r, "command", is_str, "string"))) return e;
    if ((e = need(r, "inputs", is_obj, "object"))) return e;
    const std::string cmd = r.at("command");

    auto check_gram = [&]() -> std::optional<std::string> {
        std::optional<std::string> ge;
        if ((ge = need(r, "gram", is_obj, "object"))) return ge;
        const json& g = r.at("gram");
        if ((ge = need(g, "entries", is_obj, "object"))) return ge;
        for (const char* k : {"s12", "s13", "s23"})
            if ((ge = need(g.at("entries"), k, is_obj, "object"))) return ge;
        for (const char* k : {"max_discrepancy", "m", "delta", "residual"})
            if ((ge = need(g, k, is_num, "number"))) return ge;
        return need(g, "consistent", is_bool, "boolean");
    };
    auto check_solution = [&]() -> std::optional<std::string> {
        std::optional<std::string> se;
        if ((se = need(r, "solution", is_obj, "object"))) return se;
        for (const char* k : {"p_s", "p_d", "p0", "min_eig_a0", "objective"})
            if ((se = need(r.at("solution"), k, is_num, "number"))) return se;
        return need(r.at("solution"), "degenerate", is_bool, "boolean");
    };

    if (cmd == "overlaps") return check_gram();
    if (cmd == "usd") {
        if ((e = check_gram())) return e;
        return check_solution();
    }
    if (cmd == "eve") {
        if ((e = need(r, "eve", is_obj, "object"))) return e;
        if ((e = need(r.at("eve"), "feasible", is_bool, "boolean"))) return e;
        if ((e = need(r, "honest_table", is_table, "3x3 table"))) return e;
        if ((e = need(r, "attacked_table", is_table_or_null, "3x3 table or null"))) return e;
        return need(r, "decoy_secure", is_bool, "boolean");
    }
    if (cmd == "simulate") {
        if ((e = need(r, "stats", is_obj, "object"))) return e;
        if ((e = need(r.at("stats"), "counts", is_table, "3x3 table"))) return e;
        if ((e = need(r.at("stats"), "n_d", is_num, "number"))) return e;
        if ((e = need(r, "verdict", is_obj, "object"))) return e;
        if ((e = need(r.at("verdict"), "attack_detected", is_bool, "boolean"))) return e;
        return need(r.at("verdict"), "bounds_separated", is_bool, "boolean");
    }
    if (cmd == "maxloss") {
        if ((e = need(r, "loss", is_obj, "object"))) return e;
        if ((e = need(r.at("loss"), "feasible", is_bool, "boolean"))) return e;
        return need(r.at("loss"), "l_max_db", is_num_or_null, "number or null");
    }
    return "command: unknown " + cmd;
}

}  // namespace usdqkd::cli
