#include "relaybuf/limitdist.hpp"

#include <cmath>

#include "relaybuf/special.hpp"

namespace relaybuf {

StabilityClass classify(const DerivedConstants& c) {
    // phi = 1 is critically balanced; the buffer still absorbs, so it is
    // grouped with the unstable class.
    return c.phi > 1.0 ? StabilityClass::Stable : StabilityClass::Unstable;
}

namespace {

void require_stable(const DerivedConstants& c, const char* what) {
    if (classify(c) != StabilityClass::Stable)
        throw StabilityError(std::string(what) +
                             ": no limiting distribution for phi <= 1 (phi = " +
                             std::to_string(c.phi) + ")");
}

}  // namespace

double ibep_rate(const DerivedConstants& c) {
    require_stable(c, "ibep_rate");
    const double phi = c.phi;
    const double w = lambert_w0(-phi * std::exp(-phi));
    return w / c.m_draw + c.lambda_eff;
}

double iofp_rate(const DerivedConstants& c) {
    require_stable(c, "iofp_rate");
    const double phi = c.phi;
    const double w = lambert_w0(-phi * std::exp(-phi));
    return -w / c.m_draw - c.lambda_eff;
}

namespace {

LimitingDistribution make_distribution(const DerivedConstants& c, PolicyKind policy) {
    LimitingDistribution d;
    d.policy = policy;
    d.z1 = ibep_rate(c);
    d.q = iofp_rate(c);
    d.m_draw = c.m_draw;
    d.lambda_eff = c.lambda_eff;
    d.near_critical = c.phi <= 1.0 + 1e-8;
    return d;
}

void require_domain(double x, const char* what) {
    if (!(x >= 0.0)) throw DomainError(std::string(what) + ": requires x >= 0");
}

}  // namespace

LimitingDistribution ibep_distribution(const DerivedConstants& c) {
    return make_distribution(c, PolicyKind::Ibep);
}

LimitingDistribution iofp_distribution(const DerivedConstants& c) {
    return make_distribution(c, PolicyKind::Iofp);
}

double ibep_cdf(const LimitingDistribution& d, double x) {
    require_domain(x, "ibep_cdf");
    return -std::expm1(-d.z1 * x);
}

double ibep_pdf(const LimitingDistribution& d, double x) {
    require_domain(x, "ibep_pdf");
    return d.z1 * std::exp(-d.z1 * x);
}

double iofp_pdf(const LimitingDistribution& d, double x) {
    require_domain(x, "iofp_pdf");
    if (x < d.m_draw) return -std::expm1(d.q * x) / d.m_draw;
    return -d.q * std::exp(d.q * x) / (d.m_draw * (d.q + d.lambda_eff));
}

double iofp_cdf(const LimitingDistribution& d, double x) {
    require_domain(x, "iofp_cdf");
    const double m = d.m_draw;
    if (x < m) {
        // int_0^x (1 - e^{q u})/M du = x/M - (e^{q x} - 1)/(q M)
        return x / m - std::expm1(d.q * x) / (d.q * m);
    }
    // Tail mass beyond x: e^{q(x-M)} / phi, using the root identity
    // lambda_eff e^{qM} = q + lambda_eff to eliminate the (q + lambda_eff)
    // denominator.
    return 1.0 - std::exp(d.q * (x - m)) / d.phi();
}

double iofp_prob_buffer_full(const LimitingDistribution& d) {
    if (!(d.phi() > 1.0))
        throw StabilityError("iofp_prob_buffer_full: requires a stable law");
    return 1.0 / d.phi();
}

}  // namespace relaybuf
