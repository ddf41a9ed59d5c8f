#pragma once

#include "relaybuf/params.hpp"

namespace relaybuf {

/// Stable: phi > 1, the buffer chain has a limiting law.
/// Unstable: phi <= 1, the buffer is absorbing and M is available almost
/// surely (the critically balanced case phi = 1 is grouped with Unstable).
enum class StabilityClass { Stable, Unstable };

StabilityClass classify(const DerivedConstants& constants);

/// Stationary law of the primary energy buffer for a stable chain.
///
/// IBEP: CDF 1 - exp(-z1 x) on [0, inf).
/// IOFP: piecewise PDF (1 - e^{q x})/M on [0, M),
///       -q e^{q x} / (M (q + lambda_eff)) on [M, inf), with q = -z1.
struct LimitingDistribution {
    PolicyKind policy = PolicyKind::Ibep;
    double z1 = 0.0;  // exponential rate, > 0
    double q = 0.0;   // piecewise rate, = -z1 < 0
    double m_draw = 0.0;
    double lambda_eff = 0.0;
    /// phi in (1, 1 + 1e-8]: z1 loses precision near the branch point and the
    /// value should be treated as a warning-quality estimate.
    bool near_critical = false;

    double phi() const { return m_draw * lambda_eff; }
};

/// Exponential rate Z1 of the IBEP limiting law,
/// Z1 = W0(-phi e^{-phi})/M + lambda_eff. Throws StabilityError if phi <= 1.
double ibep_rate(const DerivedConstants& constants);

/// Piecewise rate Q of the IOFP limiting law,
/// Q = -W0(-phi e^{-phi})/M - lambda_eff (= -Z1). Throws StabilityError if
/// phi <= 1.
double iofp_rate(const DerivedConstants& constants);

LimitingDistribution ibep_distribution(const DerivedConstants& constants);
LimitingDistribution iofp_distribution(const DerivedConstants& constants);

double ibep_cdf(const LimitingDistribution& dist, double x);
double ibep_pdf(const LimitingDistribution& dist, double x);
double iofp_pdf(const LimitingDistribution& dist, double x);
double iofp_cdf(const LimitingDistribution& dist, double x);

/// Pr{B >= M} = 1/phi under the IOFP limiting law.
double iofp_prob_buffer_full(const LimitingDistribution& dist);

}  // namespace relaybuf
