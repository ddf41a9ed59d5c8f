#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relaybuf/limitdist.hpp"
#include "relaybuf/params.hpp"
#include "relaybuf/special.hpp"

namespace relaybuf {

/// Closed-form outage evaluation. p_out is the joint probability of a NACK
/// slot the relay fails to rescue; pr_nack = Pr{gamma_SD < gamma_th_prime}.
/// components names the additive terms for term-by-term testing; quad_error
/// bounds the quadrature contribution (0 when no integral is involved).
struct OutageResult {
    double p_out = 0.0;
    double pr_nack = 1.0;
    double quad_error = 0.0;
    std::vector<std::pair<std::string, double>> components;

    double component(const std::string& name) const;
};

/// High-SNR outage model: p ~ inv_sq_coeff / SNR^2 + inv_lin_coeff / SNR.
struct AsymptoteModel {
    int diversity_order = 0;
    double inv_sq_coeff = 0.0;
    double inv_lin_coeff = 0.0;

    double evaluate(double snr_linear) const {
        return inv_sq_coeff / (snr_linear * snr_linear) + inv_lin_coeff / snr_linear;
    }
};

/// Pr{A + B < gamma} for independent A ~ Exp(rate_a), B ~ Exp(rate_b),
/// continuous through rate_a == rate_b (Erlang-2 limit).
double sum_exponential_cdf(double rate_a, double rate_b, double gamma);

/// Outage for the buffered best-effort policy. dist must be the IBEP limiting
/// law when the chain is stable and may be null when unstable (the absorbing
/// branch needs no law).
OutageResult outage_hsu_ibep(const DerivedConstants& constants,
                             const LimitingDistribution* dist);

/// W2 Z1 int_0^M x e^{-Z1 x} (e^{-W2 G} - e^{-W3 G / x}) / (x W2 - W3) dx.
/// The removable singularity at x* = W3/W2 is patched by its analytic limit
/// and the interval split there. Absolute error <= 1e-10.
QuadResult integral_i_hsu(const DerivedConstants& constants, double z1,
                          const Quadrature& q = {});

/// Outage for the buffered on-off policy (stable branch mixes the full-draw
/// term with weight 1/phi and the silent term with weight 1 - 1/phi).
OutageResult outage_hsu_iofp(const DerivedConstants& constants,
                             const LimitingDistribution* dist);

/// Outage for harvest-use relaying; the I_HU integral over [0, inf) is
/// truncated where a closed-form exponential tail majorant is negligible and
/// the discarded tail is recorded in quad_error.
OutageResult outage_hu(const DerivedConstants& constants);

/// Direct transmission: 1 - exp(-W2 gamma_th). Caveat: uses the same
/// half-slot threshold 2^(2 R0) - 1 as the relayed schemes for
/// comparability, although DT occupies the full slot.
OutageResult outage_dt(const DerivedConstants& constants);

/// Dispatch on scheme, deriving the limiting law when the chain is stable.
OutageResult analytic_outage(const DerivedConstants& constants, PolicyKind scheme);

/// Throughput from an outage probability. Relayed schemes:
/// R0 ack + (R0/2) (pr_nack - p_out); direct: R0 (1 - p_out).
/// Throws ConsistencyError when p_out is outside [0, pr_nack].
double throughput(const DerivedConstants& constants, double p_out, PolicyKind scheme);

/// High-SNR asymptote coefficients (incremental mode only):
/// IBEP: d_SD^a d_SR^a G^2 / SNR^2;  IOFP adds (1 - 1/phi) G d_SD^a / SNR.
AsymptoteModel outage_asymptote(const DerivedConstants& constants, PolicyKind policy);

/// Least-squares slope of -log10(p_out) vs log10(snr), fitted over the top
/// fit_window_db of the supplied grid. Points: (snr_linear, p_out), SNRs
/// strictly increasing, p_out in (0,1).
double estimate_diversity_order(std::span<const std::pair<double, double>> points,
                                double fit_window_db = 15.0);

}  // namespace relaybuf
