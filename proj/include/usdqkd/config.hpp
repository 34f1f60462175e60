// config.hpp
// Run configuration for the command-line front end: a JSON document with
// dotted-path overrides, validated field by field before any computation.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usdqkd/channel.hpp"
#include "usdqkd/common.hpp"
#include "usdqkd/decoy.hpp"
#include "usdqkd/montecarlo.hpp"
#include "usdqkd/states.hpp"

namespace usdqkd::cli {

using json = nlohmann::json;

enum class DecoyKind { Cat, Squeezed, Coherent, Orthogonal, Raw };

struct DecoyConfig {
    DecoyKind kind = DecoyKind::Cat;
    double r = 0.5;
    bool match_alpha = false;  // signal α taken from optimal_alpha(r)
    double alpha = 0.0;        // coherent decoy amplitude
    double phi = 0.0;          // coherent decoy phase
    std::vector<cplx> amplitudes;
};

struct EveOverrides {
    std::optional<double> p_e, p_s, p_d, g_e, e_e, d0_e, d1_e;
};

enum class AttackMode { None, Explicit, Solved };

struct SimulationConfig {
    std::uint64_t n_pulses = 100000;
    std::uint64_t seed = 1;
    std::uint64_t chunk_size = 65536;
    unsigned threads = 1;
    double z = 5.0;
    AttackMode attack = AttackMode::None;
    std::optional<double> d_tilde;
};

struct LossConfig {
    std::optional<double> mu;  // defaults to the decoy's mean photon number
    double eta_b = 0.5;
    double eta_d = 0.2;
    double p_d = 0.0;
};

struct SweepConfig {
    std::string param;  // alpha | r | mu
    double start = 0.0;
    double stop = 1.0;
    std::size_t steps = 11;

    double at(std::size_t i) const {
        return steps <= 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
};

struct RunConfig {
    double alpha = 0.5;
    double phi = 0.0;
    DecoyConfig decoy;
    double nu = 0.01;
    std::size_t n_cut = 64;
    ChannelModel channel{0.9, 0.01, 0.01, 0.01};
    EveOverrides eve;
    SimulationConfig simulation;
    LossConfig loss;
    std::optional<SweepConfig> sweep;
    Tolerances tolerances;

    // Signal amplitude after applying decoy.match_alpha.
    double signal_alpha() const {
        return decoy.kind == DecoyKind::Squeezed && decoy.match_alpha ? optimal_alpha(decoy.r) : alpha;
    }
};

inline const char* to_string(DecoyKind k) {
    switch (k) {
        case DecoyKind::Cat: return "cat";
        case DecoyKind::Squeezed: return "squeezed";
        case DecoyKind::Coherent: return "coherent";
        case DecoyKind::Orthogonal: return "orthogonal";
        case DecoyKind::Raw: return "raw";
    }
    return "?";
}

inline const char* to_string(AttackMode m) {
    switch (m) {
        case AttackMode::None: return "none";
        case AttackMode::Explicit: return "explicit";
        case AttackMode::Solved: return "solved";
    }
    return "?";
}

// StatePrep for the configured decoy; `alpha`/`phi` are the signal parameters.
inline StatePrep decoy_prep(const RunConfig& c, double alpha) {
    switch (c.decoy.kind) {
        case DecoyKind::Cat: return StatePrep::cat(alpha, c.phi);
        case DecoyKind::Squeezed: return StatePrep::squeezed_vacuum(c.decoy.r);
        case DecoyKind::Coherent: return StatePrep::coherent(c.decoy.alpha, c.decoy.phi);
        case DecoyKind::Orthogonal:
            return StatePrep::from_fock(orthogonal_decoy(alpha, c.phi, c.n_cut, c.tolerances));
        case DecoyKind::Raw: return StatePrep::from_fock(FockVector::from_raw(c.decoy.amplitudes));
    }
    return {};
}

namespace detail {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    void fail(const std::string& key, const std::string& msg) const { throw ValidationError(field(key) + ": " + msg); }

    std::string field(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    void number(const std::string& key, double& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) fail(key, "must be finite");
    }
    void number(const std::string& key, std::optional<double>& out) const {
        if (!has(key)) return;
        double x = 0.0;
        number(key, x);
        out = x;
    }
    template <class UInt>
    void count(const std::string& key, UInt& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(key, "expected a nonnegative integer");
        out = static_cast<UInt>(v.get<std::uint64_t>());
    }
    void boolean(const std::string& key, bool& out) const {
        if (!has(key)) return;
        if (!j_.at(key).is_boolean()) fail(key, "expected true or false");
        out = j_.at(key).get<bool>();
    }
    std::optional<std::string> string(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        if (!j_.at(key).is_string()) fail(key, "expected a string");
        return j_.at(key).get<std::string>();
    }
    Reader child(const std::string& key) const { return Reader(j_.at(key), field(key)); }
    const json& raw(const std::string& key) const { return j_.at(key); }

    void only(std::initializer_list<const char*> allowed) const {
        for (const auto& [k, _] : j_.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) fail(k, "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
};

inline void check_prob(const Reader& rd, const std::string& key, double v) {
    if (!(v >= 0.0 && v <= 1.0)) rd.fail(key, "must lie in [0,1]");
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
    using detail::Reader;
    RunConfig c;
    Reader rd(root, "");
    rd.only({"alpha", "phi", "decoy", "nu", "n_cut", "channel", "eve", "simulation", "loss", "sweep", "tolerances"});
    rd.number("alpha", c.alpha);
    rd.number("phi", c.phi);
    rd.number("nu", c.nu);
    rd.count("n_cut", c.n_cut);
    if (c.alpha < 0.0) rd.fail("alpha", "must be >= 0");
    if (!(c.nu > 0.0 && c.nu < 1.0)) rd.fail("nu", "must lie in (0,1)");
    if (c.n_cut < 1) rd.fail("n_cut", "must be >= 1");

    if (rd.has("tolerances")) {
        Reader t = rd.child("tolerances");
        t.only({"num_tol", "tail_tol", "degeneracy_tol", "n_cut_max"});
        t.number("num_tol", c.tolerances.num_tol);
        t.number("tail_tol", c.tolerances.tail_tol);
        t.number("degeneracy_tol", c.tolerances.degeneracy_tol);
        t.count("n_cut_max", c.tolerances.n_cut_max);
        for (const char* k : {"num_tol", "tail_tol", "degeneracy_tol"})
            if (t.has(k) && !(t.raw(k).get<double>() > 0.0)) t.fail(k, "must be > 0");
    }
    if (c.n_cut > c.tolerances.n_cut_max) rd.fail("n_cut", "exceeds tolerances.n_cut_max");

    if (rd.has("decoy")) {
        Reader d = rd.child("decoy");
        d.only({"kind", "r", "match_alpha", "alpha", "phi", "amplitudes"});
        if (auto k = d.string("kind")) {
            if (*k == "cat") c.decoy.kind = DecoyKind::Cat;
            else if (*k == "squeezed") c.decoy.kind = DecoyKind::Squeezed;
            else if (*k == "coherent" || *k == "vacuum") c.decoy.kind = DecoyKind::Coherent;
            else if (*k == "orthogonal") c.decoy.kind = DecoyKind::Orthogonal;
            else if (*k == "raw") c.decoy.kind = DecoyKind::Raw;
            else d.fail("kind", "expected one of cat, squeezed, coherent, vacuum, orthogonal, raw");
        }
        d.number("r", c.decoy.r);
        d.boolean("match_alpha", c.decoy.match_alpha);
        d.number("alpha", c.decoy.alpha);
        d.number("phi", c.decoy.phi);
        if (std::abs(c.decoy.r) >= 10.0) d.fail("r", "must satisfy |r| < 10");
        if (c.decoy.match_alpha && c.decoy.r < 0.0) d.fail("r", "match_alpha needs r >= 0");
        if (c.decoy.alpha < 0.0) d.fail("alpha", "must be >= 0");
        if (d.has("amplitudes")) {
            const json& a = d.raw("amplitudes");
            if (!a.is_array() || a.empty()) d.fail("amplitudes", "expected a nonempty array");
            for (const auto& x : a) {
                if (x.is_number()) c.decoy.amplitudes.emplace_back(x.get<double>(), 0.0);
                else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number())
                    c.decoy.amplitudes.emplace_back(x[0].get<double>(), x[1].get<double>());
                else d.fail("amplitudes", "entries must be numbers or [re, im] pairs");
            }
        }
        if (c.decoy.kind == DecoyKind::Raw && c.decoy.amplitudes.empty())
            d.fail("amplitudes", "required for a raw decoy");
    }

    if (rd.has("channel")) {
        Reader ch = rd.child("channel");
        ch.only({"g", "e", "d0", "d1"});
        ch.number("g", c.channel.g);
        ch.number("e", c.channel.e);
        ch.number("d0", c.channel.d0);
        ch.number("d1", c.channel.d1);
        detail::check_prob(ch, "g", c.channel.g);
        detail::check_prob(ch, "e", c.channel.e);
        detail::check_prob(ch, "d0", c.channel.d0);
        detail::check_prob(ch, "d1", c.channel.d1);
        if (c.channel.g + c.channel.e > 1.0) ch.fail("e", "g + e must not exceed 1");
        if (c.channel.d0 + c.channel.d1 > 1.0) ch.fail("d1", "d0 + d1 must not exceed 1");
    }

    if (rd.has("eve")) {
        Reader ev = rd.child("eve");
        ev.only({"p_e", "p_s", "p_d", "g_e", "e_e", "d0_e", "d1_e"});
        auto& o = c.eve;
        ev.number("p_e", o.p_e);
        ev.number("p_s", o.p_s);
        ev.number("p_d", o.p_d);
        ev.number("g_e", o.g_e);
        ev.number("e_e", o.e_e);
        ev.number("d0_e", o.d0_e);
        ev.number("d1_e", o.d1_e);
        for (auto [k, v] : {std::pair{"p_e", o.p_e}, {"p_s", o.p_s}, {"p_d", o.p_d}, {"g_e", o.g_e},
                            {"e_e", o.e_e}, {"d0_e", o.d0_e}, {"d1_e", o.d1_e}})
            if (v) detail::check_prob(ev, k, *v);
    }

    if (rd.has("simulation")) {
        Reader s = rd.child("simulation");
        s.only({"n_pulses", "seed", "chunk_size", "threads", "z", "attack", "d_tilde"});
        s.count("n_pulses", c.simulation.n_pulses);
        s.count("seed", c.simulation.seed);
        s.count("chunk_size", c.simulation.chunk_size);
        s.count("threads", c.simulation.threads);
        s.number("z", c.simulation.z);
        s.number("d_tilde", c.simulation.d_tilde);
        if (c.simulation.n_pulses < 1) s.fail("n_pulses", "must be >= 1");
        if (c.simulation.chunk_size < 1) s.fail("chunk_size", "must be >= 1");
        if (!(c.simulation.z > 0.0)) s.fail("z", "must be > 0");
        if (c.simulation.d_tilde) detail::check_prob(s, "d_tilde", *c.simulation.d_tilde);
        if (auto a = s.string("attack")) {
            if (*a == "none") c.simulation.attack = AttackMode::None;
            else if (*a == "explicit") c.simulation.attack = AttackMode::Explicit;
            else if (*a == "solved") c.simulation.attack = AttackMode::Solved;
            else s.fail("attack", "expected one of none, explicit, solved");
        }
    }

    if (rd.has("loss")) {
        Reader l = rd.child("loss");
        l.only({"mu", "eta_b", "eta_d", "p_d"});
        l.number("mu", c.loss.mu);
        l.number("eta_b", c.loss.eta_b);
        l.number("eta_d", c.loss.eta_d);
        l.number("p_d", c.loss.p_d);
        if (c.loss.mu && !(*c.loss.mu > 0.0)) l.fail("mu", "must be > 0");
        detail::check_prob(l, "eta_b", c.loss.eta_b);
        detail::check_prob(l, "eta_d", c.loss.eta_d);
        detail::check_prob(l, "p_d", c.loss.p_d);
    }

    if (rd.has("sweep")) {
        Reader sw = rd.child("sweep");
        sw.only({"param", "start", "stop", "steps"});
        SweepConfig s;
        auto p = sw.string("param");
        if (!p) sw.fail("param", "required");
        if (*p != "alpha" && *p != "r" && *p != "mu") sw.fail("param", "expected one of alpha, r, mu");
        s.param = *p;
        sw.number("start", s.start);
        sw.number("stop", s.stop);
        sw.count("steps", s.steps);
        if (s.steps < 1) sw.fail("steps", "must be >= 1");
        c.sweep = s;
    }
    return c;
}

// Sets `key` (dotted path) to `value`; the value is parsed as JSON when it
// parses, otherwise stored as a string.
inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("--set " + assignment + ": expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &root;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (parts[i].empty()) throw ValidationError("--set " + key + ": empty path component");
        json& next = (*node)[parts[i]];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw ValidationError("--set " + key + ": " + parts[i] + " is not an object");
        node = &next;
    }
    if (parts.empty() || parts.back().empty()) throw ValidationError("--set " + key + ": empty path component");
    (*node)[parts.back()] = value;
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("--config " + path + ": cannot open file");
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ValidationError("--config " + path + ": not valid JSON");
    return j;
}

}  // namespace usdqkd::cli
