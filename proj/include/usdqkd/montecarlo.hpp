// montecarlo.hpp
// Pulse-by-pulse sampling of the channel tables. Every chunk of pulses draws
// from its own generator seeded by (seed, chunk index), so the result does
// not depend on how chunks are spread over threads.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "usdqkd/channel.hpp"
#include "usdqkd/common.hpp"

namespace usdqkd {

struct SimConfig {
    std::uint64_t n_pulses = 100000;
    double nu = 0.01;
    ChannelModel channel;
    std::optional<EveStrategy> eve;
    std::uint64_t seed = 1;
    std::uint64_t chunk_size = 65536;

    void validate() const {
        detail::require(n_pulses >= 1, "simulation: n_pulses must be >= 1");
        detail::require(nu > 0.0 && nu < 1.0, "simulation: nu must lie in (0,1)");
        detail::require(chunk_size >= 1, "simulation: chunk_size must be >= 1");
        channel.validate();
        if (eve) eve->validate();
    }

    CombinedChannel table() const { return eve ? aeb_table(channel, *eve) : ab_table(channel); }
};

using CountMatrix = std::array<std::array<std::uint64_t, 3>, 3>;

struct SimStats {
    CountMatrix counts{};
    std::uint64_t n_pulses = 0;

    std::uint64_t row_total(int input) const {
        const auto& r = counts[static_cast<std::size_t>(input)];
        return r[0] + r[1] + r[2];
    }
    double rate(int input, int output) const {
        const auto tot = row_total(input);
        return tot == 0 ? 0.0
                        : static_cast<double>(counts[static_cast<std::size_t>(input)][static_cast<std::size_t>(output)]) /
                              static_cast<double>(tot);
    }
    // Binomial standard error of rate(input, output).
    double std_error(int input, int output) const {
        const auto tot = row_total(input);
        if (tot == 0) return 0.0;
        const double p = rate(input, output);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(tot));
    }
    std::uint64_t decoys_sent() const { return row_total(Decoy); }
    std::uint64_t n_d() const { return counts[Decoy][Read0] + counts[Decoy][Read1]; }

    SimStats& operator+=(const SimStats& o) {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) counts[i][j] += o.counts[i][j];
        n_pulses += o.n_pulses;
        return *this;
    }
    bool operator==(const SimStats&) const = default;
};

namespace detail {

inline std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

// Uniform in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline int draw_category(double u, const std::array<double, 3>& p) {
    if (u < p[0]) return 0;
    if (u < p[0] + p[1]) return 1;
    return 2;
}

inline SimStats simulate_chunk(const SimConfig& cfg, const CombinedChannel& table, std::uint64_t chunk) {
    SimStats s;
    const std::uint64_t begin = chunk * cfg.chunk_size;
    const std::uint64_t end = std::min(cfg.n_pulses, begin + cfg.chunk_size);
    const double half = 0.5 * (1.0 - cfg.nu);
    const std::array<double, 3> source = {half, half, cfg.nu};
    auto eng = chunk_engine(cfg.seed, chunk);
    for (std::uint64_t i = begin; i < end; ++i) {
        const int in = draw_category(unit_uniform(eng), source);
        const int out = draw_category(unit_uniform(eng), table.row(in));
        ++s.counts[static_cast<std::size_t>(in)][static_cast<std::size_t>(out)];
    }
    s.n_pulses = end - begin;
    return s;
}

}  // namespace detail

// threads = 0 picks std::thread::hardware_concurrency().
inline SimStats simulate(const SimConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    const CombinedChannel table = cfg.table();
    const std::uint64_t n_chunks = (cfg.n_pulses + cfg.chunk_size - 1) / cfg.chunk_size;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_chunks));

    std::vector<SimStats> partial(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t c = t; c < n_chunks; c += threads)
                    partial[t] += detail::simulate_chunk(cfg, table, c);
            });
    }
    SimStats total;
    for (const auto& p : partial) total += p;
    return total;
}

struct ExperimentResult {
    SimStats stats;
    ThresholdVerdict verdict;
};

// Simulates, then tests the decoy count against the honest rate d and the
// attacked rate d~ (explicit hypothesis, else the simulated Eve, else d).
inline ExperimentResult run_experiment(const SimConfig& cfg, double z, std::optional<double> d_tilde = std::nullopt,
                                       unsigned threads = 1) {
    ExperimentResult res;
    res.stats = simulate(cfg, threads);
    const double d = cfg.channel.d();
    const double dt = d_tilde ? *d_tilde : (cfg.eve ? attacked_decoy_rate(cfg.channel, *cfg.eve) : d);
    const double n = static_cast<double>(std::max<std::uint64_t>(1, res.stats.decoys_sent()));
    res.verdict = threshold_test(n, static_cast<double>(res.stats.n_d()), d, std::min(dt, d), z);
    return res;
}

}  // namespace usdqkd
