#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "relaybuf/params.hpp"

namespace relaybuf {

/// xoshiro256++ (Blackman/Vigna) with substreams: the state is derived from
/// (seed, stream) through SplitMix64, so independent tasks get independent,
/// reproducible streams regardless of scheduling.
class Xoshiro256PlusPlus {
  public:
    explicit Xoshiro256PlusPlus(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next();
    /// Uniform on (0, 1] with 53-bit resolution (never 0, so log() is safe).
    double uniform_unit();
    /// Exponential with the given mean, by inversion: -mean * log(U).
    double exponential(double mean);

  private:
    std::array<std::uint64_t, 4> state_;
};

/// Per-slot channel power gains |h|^2 (exponential, mean d^-alpha) and the
/// slot's harvested energy X (exponential, mean 1/lambda1). Draw order is
/// fixed: g_sd, g_sr, g_rd, harvest.
struct SlotDraws {
    double g_sd = 0.0;
    double g_sr = 0.0;
    double g_rd = 0.0;
    double harvest = 0.0;
};

struct ChainState {
    double buffer_energy = 0.0;  // B(i) >= 0
    std::uint64_t slot_index = 0;
};

struct IntervalOutcome {
    bool ack = false;
    bool relay_transmitted = false;  // relay radiated nonzero power
    double relay_energy = 0.0;       // E_R(i) drawn from the buffer this slot
    bool outage = false;
    double rate_delivered = 0.0;  // 0, R0/2 or R0
};

struct SlotCounters {
    std::uint64_t n_ack = 0;
    std::uint64_t n_nack = 0;
    std::uint64_t n_relay_tx = 0;
    std::uint64_t n_relay_success = 0;
    std::uint64_t n_decode_fail = 0;  // NACK slots with gamma_SR < gamma_th
    std::uint64_t n_direct_success = 0;  // DT only
    std::uint64_t n_outage = 0;
    std::uint64_t n_buffer_at_least_m = 0;  // slots entered with B(i) >= M
    std::uint64_t n_nack_full_draw = 0;     // NACK slots with E_R = M
};

/// Monte Carlo outputs. Outage/throughput standard errors are binomial /
/// per-slot-variance based; buffer_samples holds the decimated B(i) sequence
/// (pre-update, every k-th retained slot, k chosen so at most 1e5 samples are
/// kept). harvest/drain totals are compensated (Kahan) sums over the whole
/// run for the energy-conservation audit.
struct SimEstimate {
    double p_out_hat = 0.0;
    double se_p_out = 0.0;
    double throughput_hat = 0.0;
    double se_throughput = 0.0;
    std::uint64_t n_slots = 0;
    std::uint64_t n_burn_in = 0;
    std::uint64_t n_retained = 0;
    std::uint64_t decimation = 1;
    std::vector<double> buffer_samples;
    SlotCounters counters;
    double buffer_full_fraction = 0.0;  // n_buffer_at_least_m / n_retained
    double rate_delivered_sum = 0.0;    // compensated sum over retained slots
    double harvest_total = 0.0;
    double drain_total = 0.0;
    double final_buffer = 0.0;
};

SlotDraws draw_slot(Xoshiro256PlusPlus& rng, const DerivedConstants& constants);

/// Advance the chain by one signalling interval. Mirrors the buffer update
/// equations literally: on NACK the energy is drained whether or not the
/// relay decodes. Throws std::logic_error if the buffer would go negative.
IntervalOutcome step(ChainState& state, const SlotDraws& draws, PolicyKind policy,
                     const DerivedConstants& constants);

/// Simulate n_slots intervals (burn_in discarded from the estimates, state
/// carried through). Constants are derived from params with the signalling
/// mode forced by the policy. Deterministic given (params, policy, n_slots,
/// burn_in, seed, stream).
SimEstimate run(const SystemParams& params, PolicyKind policy, std::uint64_t n_slots,
                std::uint64_t burn_in, std::uint64_t seed, std::uint64_t stream = 0);

/// Empirical CDF over a sample (sorted on construction).
class Ecdf {
  public:
    explicit Ecdf(std::vector<double> samples);
    double operator()(double x) const;
    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

  private:
    std::vector<double> sorted_;
};

/// Kolmogorov-Smirnov statistic sup |ECDF - CDF|, evaluated at the sample
/// points and their left limits. Requires >= 100 samples.
double ks_distance(const Ecdf& ecdf, const std::function<double(double)>& cdf);

}  // namespace relaybuf
