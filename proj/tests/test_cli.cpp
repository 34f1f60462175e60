#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "usdqkd/config.hpp"
#include "usdqkd/report.hpp"

using namespace usdqkd;
using namespace usdqkd::cli;
namespace fz = oracle::frozen;

namespace {

RunConfig load(const std::string& name) {
    return parse_config(load_config_file(std::string(USDQKD_CONFIG_DIR) + "/" + name));
}

struct CliRun {
    int code;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(USDQKD_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void expect_valid(const CommandResult& r) {
    const json reparsed = json::parse(r.report.dump());
    const auto problem = validate_report(reparsed);
    EXPECT_FALSE(problem.has_value()) << *problem;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
    json root = json::object();
    apply_override(root, "channel.g=0.8");
    apply_override(root, "decoy.kind=squeezed");
    apply_override(root, "simulation.seed=17");
    const RunConfig c = parse_config(root);
    EXPECT_EQ(c.channel.g, 0.8);
    EXPECT_EQ(c.decoy.kind, DecoyKind::Squeezed);
    EXPECT_EQ(c.simulation.seed, 17u);
    EXPECT_EQ(c.nu, 0.01);
}

TEST(Config, FieldLevelErrors) {
    auto message = [](const json& j) -> std::string {
        try {
            parse_config(j);
        } catch (const ValidationError& e) {
            return e.what();
        }
        return "";
    };
    EXPECT_EQ(message({{"channel", {{"g", 1.5}}}}), "channel.g: must lie in [0,1]");
    EXPECT_EQ(message({{"nu", 0.0}}), "nu: must lie in (0,1)");
    EXPECT_EQ(message({{"decoy", {{"kind", "thermal"}}}}),
              "decoy.kind: expected one of cat, squeezed, coherent, vacuum, orthogonal, raw");
    EXPECT_EQ(message({{"alpah", 0.5}}), "alpah: unknown key");
    EXPECT_EQ(message({{"simulation", {{"n_pulses", -3}}}}), "simulation.n_pulses: expected a nonnegative integer");
    EXPECT_EQ(message({{"decoy", {{"kind", "raw"}}}}), "decoy.amplitudes: required for a raw decoy");
    EXPECT_EQ(message({{"sweep", {{"param", "g"}}}}), "sweep.param: expected one of alpha, r, mu");
    json root = json::object();
    EXPECT_THROW(apply_override(root, "novalue"), ValidationError);
    EXPECT_THROW(apply_override(root, "a..b=1"), ValidationError);
}

TEST(Config, RawAmplitudes) {
    const RunConfig c = parse_config({{"decoy", {{"kind", "raw"}, {"amplitudes", {1.0, json::array({0.0, 1.0})}}}}});
    ASSERT_EQ(c.decoy.amplitudes.size(), 2u);
    EXPECT_EQ(c.decoy.amplitudes[1], cplx(0.0, 1.0));
}

TEST(CmdOverlaps, CatDecoy) {
    const CommandResult r = cmd_overlaps(load("overlaps_cat.json"));
    EXPECT_EQ(r.exit_code, Success);
    const json& g = r.report["gram"];
    EXPECT_NEAR(g["entries"]["s12"]["numeric"]["re"].get<double>(), fz::exp_m05, 1e-10);
    EXPECT_NEAR(g["entries"]["s13"]["numeric"]["re"].get<double>(), fz::cat_s13_05, 1e-10);
    EXPECT_LT(g["max_discrepancy"].get<double>(), 1e-8);
    EXPECT_TRUE(g["consistent"].get<bool>());
    expect_valid(r);
}

TEST(CmdOverlaps, OrthogonalAndSqueezed) {
    RunConfig c = load("overlaps_cat.json");
    c.decoy.kind = DecoyKind::Orthogonal;
    const CommandResult o = cmd_overlaps(c);
    EXPECT_NEAR(o.report["gram"]["entries"]["s13"]["numeric"]["abs"].get<double>(), 0.0, 1e-12);
    EXPECT_TRUE(o.report["gram"]["entries"]["s13"]["analytic"].is_null());

    const CommandResult s = cmd_overlaps(load("overlaps_squeezed.json"));
    EXPECT_NEAR(s.report["gram"]["entries"]["s13"]["numeric"]["re"].get<double>(), fz::coh_sq_overlap, 1e-10);
    EXPECT_LT(s.report["gram"]["max_discrepancy"].get<double>(), 1e-8);
}

TEST(CmdUsd, CatIsDegenerate) {
    const CommandResult r = cmd_usd(load("usd_cat.json"));
    EXPECT_EQ(r.exit_code, Infeasible);
    EXPECT_EQ(r.report["solution"]["p_s"].get<double>(), 0.0);
    EXPECT_EQ(r.report["solution"]["p_d"].get<double>(), 0.0);
    EXPECT_EQ(r.report["solution"]["p0"].get<double>(), 1.0);
    expect_valid(r);
}

TEST(CmdUsd, OrthogonalDecoy) {
    const CommandResult r = cmd_usd(load("usd_orthogonal.json"));
    EXPECT_EQ(r.exit_code, Success);
    EXPECT_NEAR(r.report["solution"]["p_s"].get<double>(), fz::two_state_bound_05, 1e-6);
    EXPECT_NEAR(r.report["solution"]["p_d"].get<double>(), 1.0, 1e-9);
}

TEST(CmdUsd, SqueezedSweepCsv) {
    const RunConfig c = load("usd_squeezed_sweep.json");
    const CommandResult r = cmd_usd(c);
    ASSERT_TRUE(r.csv);
    EXPECT_EQ(r.csv->rows.size(), 21u);
    const std::string text = r.csv->str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "param,alpha,r,delta,m,degenerate,p_s,p_d,p0");
    double prev = -1.0;
    for (const auto& pt : r.report["sweep"]["points"]) {
        const double rr = pt["r"].get<double>(), alpha = pt["alpha"].get<double>();
        const double delta = pt["delta"].get<double>();
        EXPECT_NEAR(delta, delta_squeezed(alpha, rr), 1e-8);
        EXPECT_GE(delta, prev - 1e-12);  // increases along the matched curve
        prev = delta;
    }
    expect_valid(r);
}

TEST(CmdEve, FeasibleAndImpossible) {
    const CommandResult f = cmd_eve(load("eve_feasible.json"));
    EXPECT_EQ(f.exit_code, Success);
    EXPECT_TRUE(f.report["eve"]["feasible"].get<bool>());
    EXPECT_NEAR(f.report["eve"]["g_e"].get<double>(), 0.7458703939008895, 1e-12);
    const json& honest = f.report["honest_table"];
    const json& attacked = f.report["attacked_table"];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(honest[i][j].get<double>(), attacked[i][j].get<double>(), 1e-12);
    expect_valid(f);

    const CommandResult c = cmd_eve(load("eve_cat.json"));
    EXPECT_EQ(c.exit_code, Infeasible);
    EXPECT_TRUE(c.report["eve"]["attack_impossible"].get<bool>());
    EXPECT_TRUE(c.report["decoy_secure"].get<bool>());
    expect_valid(c);
}

TEST(CmdEve, DecoyConditionReported) {
    RunConfig c = load("eve_feasible.json");
    c.eve.p_d = 0.01;
    const CommandResult r = cmd_eve(c);
    EXPECT_EQ(r.exit_code, Infeasible);
    EXPECT_EQ(r.report["eve"]["violations"][0]["code"], "decoy_rate");
}

TEST(CmdSimulate, Scenarios) {
    const CommandResult h = cmd_simulate(load("simulate_honest.json"));
    EXPECT_FALSE(h.report["verdict"]["attack_detected"].get<bool>());
    EXPECT_TRUE(h.report["verdict"]["bounds_separated"].get<bool>());
    expect_valid(h);

    const CommandResult a = cmd_simulate(load("simulate_cat_attack.json"));
    EXPECT_TRUE(a.report["verdict"]["attack_detected"].get<bool>());
    EXPECT_EQ(a.report["stats"]["n_d"].get<std::uint64_t>(), 0u);

    const CommandResult m = cmd_simulate(load("simulate_masked.json"));
    const json& rates = m.report["stats"]["rates"];
    const json& errs = m.report["stats"]["std_errors"];
    const CombinedChannel honest = ab_table({0.9, 0.005, 0.01, 0.01});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double n = static_cast<double>(m.report["stats"]["counts"][i][0].get<std::uint64_t>() +
                                                 m.report["stats"]["counts"][i][1].get<std::uint64_t>() +
                                                 m.report["stats"]["counts"][i][2].get<std::uint64_t>());
            const double sigma = std::sqrt(honest(i, j) * (1 - honest(i, j)) / n);
            EXPECT_LE(std::abs(rates[i][j].get<double>() - honest(i, j)), 4 * sigma + 1e-15);
            EXPECT_NEAR(errs[i][j].get<double>(), std::sqrt(rates[i][j].get<double>() * (1 - rates[i][j].get<double>()) / n), 1e-12);
        }
}

TEST(CmdSimulate, DeterministicOutput) {
    RunConfig c = load("simulate_masked.json");
    const std::string a = cmd_simulate(c).report.dump(2);
    c.simulation.threads = 4;
    EXPECT_EQ(a, cmd_simulate(c).report.dump(2));
}

TEST(CmdMaxloss, ValueAndSweep) {
    const CommandResult r = cmd_maxloss(load("maxloss.json"));
    EXPECT_EQ(r.exit_code, Success);
    EXPECT_NEAR(r.report["loss"]["l_max_db"].get<double>(), 13.979400086720375, 1e-9);
    ASSERT_TRUE(r.csv);
    EXPECT_EQ(r.csv->rows.size(), 20u);
    EXPECT_EQ(r.csv->rows.front()[2], "0");  // 0.05*0.1 < 0.01
    EXPECT_EQ(r.csv->rows.back()[2], "1");
    expect_valid(r);

    RunConfig c = load("maxloss.json");
    c.loss.p_d = 0.06;
    c.sweep.reset();
    const CommandResult inf = cmd_maxloss(c);
    EXPECT_EQ(inf.exit_code, Infeasible);
    EXPECT_TRUE(inf.report["loss"]["l_max_db"].is_null());
    expect_valid(inf);
}

TEST(CmdMaxloss, DefaultsMuToDecoyMeanPhotonNumber) {
    RunConfig c;
    c.alpha = 0.7;
    c.decoy.kind = DecoyKind::Cat;
    const CommandResult r = cmd_maxloss(c);
    EXPECT_NEAR(r.report["loss"]["mu"].get<double>(), 0.49 * std::tanh(0.49), 1e-10);
}

TEST(Report, ValidatorCatchesBrokenReports) {
    json r = cmd_maxloss(load("maxloss.json")).report;
    r["loss"].erase("feasible");
    EXPECT_TRUE(validate_report(r).has_value());
    json s = cmd_overlaps(load("overlaps_cat.json")).report;
    s["schema"] = "other";
    EXPECT_TRUE(validate_report(s).has_value());
}

TEST(Csv, LocaleIndependentNumbers) {
    EXPECT_EQ(fmt(0.5), "0.5");
    EXPECT_EQ(fmt(-1e-20), "-1e-20");
    EXPECT_EQ(fmt(13.979400086720375), "13.979400086720375");
}

TEST(Binary, ExitCodesAndDeterminism) {
    const std::string dir = USDQKD_CONFIG_DIR;
    EXPECT_EQ(run_cli("overlaps --config " + dir + "/overlaps_cat.json").code, 0);
    EXPECT_EQ(run_cli("usd --config " + dir + "/usd_cat.json").code, 3);
    EXPECT_EQ(run_cli("eve --config " + dir + "/eve_cat.json").code, 3);
    EXPECT_EQ(run_cli("maxloss --config " + dir + "/maxloss.json --set loss.p_d=0.2").code, 3);
    EXPECT_EQ(run_cli("usd --set nu=2").code, 2);
    EXPECT_EQ(run_cli("usd --config /nonexistent.json").code, 2);
    EXPECT_EQ(run_cli("bogus").code, 2);

    const CliRun a = run_cli("simulate --config " + dir + "/simulate_masked.json --seed 11");
    const CliRun b = run_cli("simulate --config " + dir + "/simulate_masked.json --seed 11");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const json rep = json::parse(a.out);
    EXPECT_EQ(rep["simulation"]["seed"].get<std::uint64_t>(), 11u);
    EXPECT_FALSE(validate_report(rep).has_value());
}

TEST(Binary, WritesCsv) {
    const std::string csv = std::string(USDQKD_BINARY_DIR) + "/sweep_test.csv";
    std::remove(csv.c_str());
    const CliRun r = run_cli("maxloss --config " + std::string(USDQKD_CONFIG_DIR) + "/maxloss.json --csv " + csv);
    EXPECT_EQ(r.code, 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "mu,l_max_db,feasible");
}
