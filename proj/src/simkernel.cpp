#include "relaybuf/simkernel.hpp"

#include <algorithm>
#include <cmath>

namespace relaybuf {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// Compensated accumulator for the conservation audit.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

Xoshiro256PlusPlus::Xoshiro256PlusPlus(std::uint64_t seed, std::uint64_t stream) {
    // Hash (seed, stream) into the seeding sequence so substreams are
    // decorrelated even for adjacent indices.
    std::uint64_t sm = seed;
    const std::uint64_t a = splitmix64(sm);
    sm = a ^ (stream * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL);
    for (auto& word : state_) word = splitmix64(sm);
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0)
        state_[0] = 1;  // all-zero state is invalid for xoshiro
}

std::uint64_t Xoshiro256PlusPlus::next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Xoshiro256PlusPlus::uniform_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double Xoshiro256PlusPlus::exponential(double mean) {
    return -mean * std::log(uniform_unit());
}

SlotDraws draw_slot(Xoshiro256PlusPlus& rng, const DerivedConstants& c) {
    SlotDraws d;
    d.g_sd = rng.exponential(c.mean_gain_sd());
    d.g_sr = rng.exponential(c.mean_gain_sr());
    d.g_rd = rng.exponential(c.mean_gain_rd());
    d.harvest = rng.exponential(1.0 / c.lambda1);
    return d;
}

IntervalOutcome step(ChainState& st, const SlotDraws& d, PolicyKind policy,
                     const DerivedConstants& c) {
    IntervalOutcome out;
    const double r0 = c.rate_bpcu;
    const double gamma_sd = c.snr * d.g_sd;
    ++st.slot_index;

    if (policy == PolicyKind::Dt) {
        const bool success = gamma_sd >= c.gamma_th;
        out.outage = !success;
        out.rate_delivered = success ? r0 : 0.0;
        return out;
    }

    const bool buffered = uses_buffer(policy);
    if (c.incremental() && gamma_sd >= c.gamma_th) {
        out.ack = true;
        out.rate_delivered = r0;
        if (buffered) st.buffer_energy += d.harvest;
        return out;
    }

    // NACK: the relay drains energy per the policy (whether or not it
    // decodes) and transmits over the half slot.
    double relay_power = 0.0;
    switch (policy) {
        case PolicyKind::Ibep:
        case PolicyKind::Nibep:
            out.relay_energy = std::min(st.buffer_energy, c.m_draw);
            st.buffer_energy = st.buffer_energy - out.relay_energy + d.harvest;
            relay_power = 2.0 * out.relay_energy;
            break;
        case PolicyKind::Iofp:
        case PolicyKind::Niofp:
            if (st.buffer_energy >= c.m_draw) {
                out.relay_energy = c.m_draw;
                st.buffer_energy = st.buffer_energy - c.m_draw + d.harvest;
            } else {
                out.relay_energy = 0.0;
                st.buffer_energy += d.harvest;
            }
            relay_power = 2.0 * out.relay_energy;
            break;
        case PolicyKind::Hu:
            relay_power = d.harvest;  // P_R(i) = X(i), nothing stored
            break;
        default:
            break;
    }
    if (buffered && st.buffer_energy < 0.0)
        throw std::logic_error("simkernel: negative buffer energy");

    out.relay_transmitted = relay_power > 0.0;
    const double gamma_sr = c.snr * d.g_sr;
    const double gamma_rd = relay_power * d.g_rd / c.noise_power;
    const bool success = gamma_sr >= c.gamma_th && gamma_sd + gamma_rd >= c.gamma_th;
    out.outage = !success;
    out.rate_delivered = success ? 0.5 * r0 : 0.0;
    return out;
}

SimEstimate run(const SystemParams& params, PolicyKind policy, std::uint64_t n_slots,
                std::uint64_t burn_in, std::uint64_t seed, std::uint64_t stream) {
    if (n_slots < burn_in + 1000)
        throw ConfigError("run: n_slots must be at least burn_in + 1000");
    const DerivedConstants c = derive_constants(with_mode(params, mode_of(policy)));

    SimEstimate est;
    est.n_slots = n_slots;
    est.n_burn_in = burn_in;
    est.n_retained = n_slots - burn_in;
    constexpr std::uint64_t kMaxRetainedSamples = 100000;
    est.decimation =
        std::max<std::uint64_t>(1, (est.n_retained + kMaxRetainedSamples - 1) /
                                       kMaxRetainedSamples);
    const bool buffered = uses_buffer(policy);
    if (buffered)
        est.buffer_samples.reserve(
            static_cast<std::size_t>(est.n_retained / est.decimation + 1));

    Xoshiro256PlusPlus rng(seed, stream);
    ChainState st;
    SlotCounters& k = est.counters;
    KahanSum harvest_sum, drain_sum, rate_sum;

    for (std::uint64_t i = 0; i < n_slots; ++i) {
        const SlotDraws d = draw_slot(rng, c);
        const bool retained = i >= burn_in;
        if (retained && buffered) {
            if (st.buffer_energy >= c.m_draw) ++k.n_buffer_at_least_m;
            if ((i - burn_in) % est.decimation == 0)
                est.buffer_samples.push_back(st.buffer_energy);
        }

        const IntervalOutcome out = step(st, d, policy, c);
        if (buffered) {
            harvest_sum.add(d.harvest);
            drain_sum.add(out.relay_energy);
        }
        if (!retained) continue;

        rate_sum.add(out.rate_delivered);
        if (out.ack) ++k.n_ack;
        if (policy == PolicyKind::Dt) {
            if (!out.outage) ++k.n_direct_success;
            else ++k.n_outage;
            continue;
        }
        if (!out.ack) {
            ++k.n_nack;
            if (out.relay_transmitted) ++k.n_relay_tx;
            if (out.relay_energy == c.m_draw && c.m_draw > 0.0) ++k.n_nack_full_draw;
            if (c.snr * d.g_sr < c.gamma_th) ++k.n_decode_fail;
            if (out.outage) ++k.n_outage;
            else ++k.n_relay_success;
        }
    }

    const double n = static_cast<double>(est.n_retained);
    const double r0 = c.rate_bpcu;
    est.p_out_hat = static_cast<double>(k.n_outage) / n;
    est.se_p_out = std::sqrt(est.p_out_hat * (1.0 - est.p_out_hat) / n);
    est.throughput_hat =
        (r0 * static_cast<double>(k.n_ack + k.n_direct_success) +
         0.5 * r0 * static_cast<double>(k.n_relay_success)) / n;
    const double second_moment =
        (r0 * r0 * static_cast<double>(k.n_ack + k.n_direct_success) +
         0.25 * r0 * r0 * static_cast<double>(k.n_relay_success)) / n;
    est.se_throughput = std::sqrt(
        std::max(0.0, second_moment - est.throughput_hat * est.throughput_hat) / n);
    est.buffer_full_fraction = static_cast<double>(k.n_buffer_at_least_m) / n;
    est.rate_delivered_sum = rate_sum.sum;
    est.harvest_total = harvest_sum.sum;
    est.drain_total = drain_sum.sum;
    est.final_buffer = st.buffer_energy;
    return est;
}

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw DomainError("Ecdf: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) /
           static_cast<double>(sorted_.size());
}

double ks_distance(const Ecdf& ecdf, const std::function<double(double)>& cdf) {
    const std::vector<double>& xs = ecdf.sorted();
    if (xs.size() < 100) throw DomainError("ks_distance: need at least 100 samples");
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);  // at the point
        d = std::max(d, f - static_cast<double>(i) / n);          // left limit
    }
    return d;
}

}  // namespace relaybuf
