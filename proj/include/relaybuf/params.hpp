#pragma once

#include <string>

#include "relaybuf/errors.hpp"

namespace relaybuf {

enum class SignallingMode { Incremental, NonIncremental };

/// The six schemes. The first four use the harvest-store-use relay with a
/// primary energy buffer; Hu spends each slot's harvest in the same slot;
/// Dt is direct (relay-less) transmission over the full slot.
enum class PolicyKind { Ibep, Iofp, Nibep, Niofp, Hu, Dt };

constexpr PolicyKind kAllPolicies[] = {PolicyKind::Ibep,  PolicyKind::Iofp,
                                       PolicyKind::Nibep, PolicyKind::Niofp,
                                       PolicyKind::Hu,    PolicyKind::Dt};

/// Signalling mode implied by a scheme (Nibep/Niofp never get an ACK).
SignallingMode mode_of(PolicyKind p);
/// True for the four schemes that own a primary energy buffer.
bool uses_buffer(PolicyKind p);
std::string to_string(PolicyKind p);
PolicyKind policy_from_string(const std::string& name);

struct Geometry {
    double d_sr = 0.0;
    double d_rd = 0.0;
    double d_sd = 0.0;
};

/// Buffer configuration: either the per-transmission draw M directly, or a
/// target stability factor phi from which M is back-solved.
struct BufferSpec {
    enum class Kind { Draw, StabilityFactor };
    Kind kind = Kind::Draw;
    double value = 0.0;
};

/// Physical scenario. All powers/energies are linear-scale and normalized to
/// unit slot duration; distances are dimensionless plane units.
struct SystemParams {
    Geometry geometry;
    double alpha = 3.0;          // path-loss exponent
    double noise_power = 0.0;    // sigma^2
    double source_power = 0.0;   // P_S
    double rate_bpcu = 0.0;      // R0
    double harvest_mean = 0.0;   // 1/lambda1
    BufferSpec buffer;
    SignallingMode mode = SignallingMode::Incremental;
};

/// Everything downstream consumes this, never raw params.
///
/// The non-incremental threshold ("gamma_th_prime = infinity") is represented
/// by the mode flag: ack_probability() is exactly 0.0 in non-incremental mode
/// and no infinity is ever passed to a numeric exponential.
struct DerivedConstants {
    double w1 = 0.0;  // sigma^2 d_RD^alpha / (2 M)
    double w2 = 0.0;  // sigma^2 d_SD^alpha / P_S
    double w3 = 0.0;  // sigma^2 d_RD^alpha / 2
    double w4 = 0.0;  // sigma^2 d_SR^alpha / P_S
    double gamma_th = 0.0;  // 2^(2 R0) - 1
    SignallingMode mode = SignallingMode::Incremental;
    double phi = 0.0;     // m_draw * lambda_eff
    double m_draw = 0.0;  // energy drawn per relay transmission

    double lambda1 = 0.0;     // harvest rate, 1 / E{X}
    double lambda_eff = 0.0;  // lambda1 * (1 - ack_probability())
    double noise_power = 0.0;
    double source_power = 0.0;
    double snr = 0.0;  // P_S / sigma^2
    double rate_bpcu = 0.0;
    double alpha = 0.0;
    Geometry geometry;

    bool incremental() const { return mode == SignallingMode::Incremental; }
    /// Pr{gamma_SD >= gamma_th_prime}: exp(-w2*gamma_th) when incremental,
    /// exactly 0 otherwise.
    double ack_probability() const { return ack_prob_; }
    double nack_probability() const { return 1.0 - ack_prob_; }
    /// Mean channel power gains d^-alpha.
    double mean_gain_sd() const { return mean_sd_; }
    double mean_gain_sr() const { return mean_sr_; }
    double mean_gain_rd() const { return mean_rd_; }

    // Cached by derive_constants; tests may override ack_prob_ to probe the
    // large-threshold limit.
    double ack_prob_ = 0.0;
    double mean_sd_ = 0.0;
    double mean_sr_ = 0.0;
    double mean_rd_ = 0.0;
};

/// 10^(x/10). Throws ConfigError for non-finite input.
double db_to_linear(double x_db);

/// SNR decoding threshold 2^(2 r0) - 1 for half-slot transmission.
/// Throws ConfigError unless r0 > 0.
double gamma_threshold(double r0);

/// Validate params and compute every derived constant. When the buffer spec
/// is a stability factor, M = phi / lambda_eff is back-solved; when it is M,
/// phi = M * lambda_eff.
DerivedConstants derive_constants(const SystemParams& params);

/// Copy of params with the signalling mode replaced.
SystemParams with_mode(SystemParams params, SignallingMode mode);

/// Parse the UTF-8 JSON scenario config. Strict: unknown keys are rejected,
/// dB-valued fields carry a _db suffix, geometry is either three coordinate
/// pairs or three distances, buffer is either {"m":..} or {"phi":..}.
SystemParams parse_config_json(const std::string& text);

/// Load + parse a config file.
SystemParams load_config_file(const std::string& path);

/// Resolved one-line JSON for reports/CSV metadata.
std::string config_to_json(const SystemParams& params);

}  // namespace relaybuf
