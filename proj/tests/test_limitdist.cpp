#include <cmath>

#include "doctest.h"
#include "relaybuf/limitdist.hpp"
#include "relaybuf/special.hpp"

using namespace relaybuf;

namespace {

SystemParams scenario(double phi, double snr_db = 25.0) {
    SystemParams p;
    p.geometry = {1.0, 3.0, 4.0};
    p.alpha = 3.0;
    p.noise_power = 1e-4;
    p.source_power = 1e-4 * db_to_linear(snr_db);
    p.rate_bpcu = 1.5;
    p.harvest_mean = 0.1;
    p.buffer = {BufferSpec::Kind::StabilityFactor, phi};
    p.mode = SignallingMode::Incremental;
    return p;
}

DerivedConstants constants(double phi, double snr_db = 25.0) {
    return derive_constants(scenario(phi, snr_db));
}

}  // namespace

TEST_CASE("classify stability by phi") {
    CHECK(classify(constants(1.1)) == StabilityClass::Stable);
    CHECK(classify(constants(1.0)) == StabilityClass::Unstable);
    CHECK(classify(constants(0.5)) == StabilityClass::Unstable);
}

TEST_CASE("ibep_rate matches the bisection oracle") {
    // frozen from the bisection oracle on w e^w = -phi e^-phi:
    //   phi = 1.1: W = -0.90625244200500949 -> z1 M = 0.19374755799499051
    //   phi = 2.0: W = -0.40637573995995991 -> z1 M = 1.59362426004004009
    const DerivedConstants c11 = constants(1.1);
    CHECK(ibep_rate(c11) * c11.m_draw ==
          doctest::Approx(0.19374755799499051).epsilon(1e-12));
    const DerivedConstants c20 = constants(2.0);
    CHECK(ibep_rate(c20) * c20.m_draw ==
          doctest::Approx(1.59362426004004009).epsilon(1e-12));
    CHECK_THROWS_AS(ibep_rate(constants(0.9)), StabilityError);
    CHECK_THROWS_AS(ibep_rate(constants(1.0)), StabilityError);
}

TEST_CASE("z1 M vanishes as phi -> 1+ and flags the warning zone") {
    // At eps = 1e-6 the branch offset is still representable: z1 M ~ 2 eps.
    const DerivedConstants fine = constants(1.0 + 1e-6);
    CHECK(ibep_rate(fine) * fine.m_draw ==
          doctest::Approx(2e-6).epsilon(0.02));
    // Inside (1, 1 + 1e-8] the W evaluation sits on the double-precision
    // noise floor (~1e-8); the distribution must carry the warning flag.
    const DerivedConstants c = constants(1.0 + 1e-9);
    const double z1m = ibep_rate(c) * c.m_draw;
    CHECK(z1m > 0.0);
    CHECK(z1m < 1e-7);
    CHECK(ibep_distribution(c).near_critical);
    CHECK(!ibep_distribution(constants(1.1)).near_critical);
}

TEST_CASE("iofp_rate is the exact negative of ibep_rate") {
    for (double phi : {1.05, 1.1, 1.5, 2.0, 5.0}) {
        const DerivedConstants c = constants(phi);
        const double z1 = ibep_rate(c);
        const double q = iofp_rate(c);
        CHECK(q < 0.0);
        CHECK(std::abs(q + z1) <= 1e-14 * z1);
    }
    CHECK_THROWS_AS(iofp_rate(constants(0.5)), StabilityError);
}

TEST_CASE("root identities (stationarity fixed points)") {
    for (double phi : {1.1, 1.5, 2.0}) {
        const DerivedConstants c = constants(phi);
        const double z1 = ibep_rate(c);
        const double q = iofp_rate(c);
        const double scale = std::max(1.0, c.lambda_eff);
        CHECK(std::abs(c.lambda_eff * std::exp(-z1 * c.m_draw) - c.lambda_eff + z1) /
                  scale <=
              1e-12);
        CHECK(std::abs(c.lambda_eff * std::exp(q * c.m_draw) - q - c.lambda_eff) /
                  scale <=
              1e-12);
    }
}

TEST_CASE("ibep cdf/pdf") {
    const DerivedConstants c = constants(1.1);
    const LimitingDistribution d = ibep_distribution(c);
    CHECK(ibep_cdf(d, 0.0) == 0.0);
    CHECK(ibep_cdf(d, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
    // at x = M the cdf is 1 - e^{-z1 M} with z1 M = 0.19374755799499051
    CHECK(ibep_cdf(d, d.m_draw) ==
          doctest::Approx(0.17613414363180955).epsilon(1e-12));
    CHECK(ibep_pdf(d, 0.0) == doctest::Approx(d.z1).epsilon(1e-14));
    CHECK_THROWS_AS(ibep_cdf(d, -0.1), DomainError);
    CHECK_THROWS_AS(ibep_pdf(d, -0.1), DomainError);

    // monotone nondecreasing cdf
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = i * (5.0 / d.z1) / 200.0;
        const double v = ibep_cdf(d, x);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("iofp pdf: zero at origin, continuous at M, nonnegative") {
    for (double phi : {1.1, 1.5, 2.0}) {
        const DerivedConstants c = constants(phi);
        const LimitingDistribution d = iofp_distribution(c);
        CHECK(iofp_pdf(d, 0.0) == 0.0);
        const double m = d.m_draw;
        const double left = -std::expm1(d.q * m) / m;  // limit from below
        const double right = iofp_pdf(d, m);
        CHECK(std::abs(left - right) <= 1e-12 * right);
        // both sides equal -q / (M lambda_eff) via the root identity
        CHECK(right == doctest::Approx(-d.q / (m * d.lambda_eff)).epsilon(1e-12));
        for (int i = 0; i <= 100; ++i)
            CHECK(iofp_pdf(d, i * 3.0 * m / 100.0) >= 0.0);
    }
}

TEST_CASE("iofp pdf integrates to one and to the closed-form cdf") {
    const DerivedConstants c = constants(1.1);
    const LimitingDistribution d = iofp_distribution(c);
    const double m = d.m_draw;

    Quadrature q;
    q.abs_tol = 1e-11;
    q.split_points = {m};
    const double x_hi = m + 50.0 / d.z1;
    const double area =
        integrate([&](double x) { return iofp_pdf(d, x); }, 0.0, x_hi, q).value;
    const double tail = std::exp(d.q * (x_hi - m)) / d.phi();
    CHECK(std::abs(area + tail - 1.0) <= 1e-9);

    // cdf equals the integral of the pdf at 100 grid points
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double x = i * 2.5 * m / 100.0;
        Quadrature qi;
        qi.abs_tol = 1e-12;
        if (x > m) qi.split_points = {m};
        const double num =
            integrate([&](double u) { return iofp_pdf(d, u); }, 0.0, x, qi).value;
        worst = std::max(worst, std::abs(num - iofp_cdf(d, x)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("iofp buffer-full probability is 1/phi") {
    const LimitingDistribution d11 = iofp_distribution(constants(1.1));
    CHECK(iofp_prob_buffer_full(d11) == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
    const LimitingDistribution d2 = iofp_distribution(constants(2.0));
    CHECK(iofp_prob_buffer_full(d2) == doctest::Approx(0.5).epsilon(1e-14));
    // tail consistency: 1 - cdf(M) = 1/phi
    CHECK(1.0 - iofp_cdf(d11, d11.m_draw) ==
          doctest::Approx(1.0 / 1.1).epsilon(1e-12));
}
