#include "relaybuf/performance.hpp"

#include <algorithm>
#include <cmath>

namespace relaybuf {

double OutageResult::component(const std::string& name) const {
    for (const auto& [k, v] : components)
        if (k == name) return v;
    throw DomainError("OutageResult: no component named " + name);
}

// (1 - e^{-b g}) + b (e^{-a g} - e^{-b g}) / (a - b), evaluated through expm1
// so the a -> b limit (Erlang-2) is reached smoothly instead of through 0/0.
double sum_exponential_cdf(double a, double b, double g) {
    const double base = -std::expm1(-b * g);
    const double t = (b - a) * g;
    const double scale = b * g * std::exp(-b * g);
    if (t == 0.0) return base - scale;
    if (t > 500.0)  // e^{-a g} >> e^{-b g}; the direct form is exact enough
        return base + b * (std::exp(-a * g) - std::exp(-b * g)) / (a - b);
    return base - scale * std::expm1(t) / t;
}

namespace {

// Shared integrand of I_HSU / I_HU. With u = c_over_x/x, v = w2 g and
// s = v - u, the raw form
//   x e^{-rate x} (e^{-v} - e^{-u}) / (x w2 - c_over_x)
// collapses to -g e^{-rate x} (e^{s-v} - e^{-v}) / s, whose s -> 0 limit
// (the removable singularity at x* = c_over_x / w2) is -g e^{-rate x} e^{-v}.
double relay_mix_integrand(double x, double rate, double c_over_x, double w2,
                           double g) {
    if (x <= 0.0 || g == 0.0) return 0.0;
    const double v = w2 * g;
    const double s = g * (w2 - c_over_x / x);
    double ratio;  // (e^{s-v} - e^{-v}) / s
    if (s == 0.0)
        ratio = std::exp(-v);
    else if (std::abs(s) < 0.5)
        ratio = std::exp(-v) * std::expm1(s) / s;
    else
        ratio = (std::exp(s - v) - std::exp(-v)) / s;
    return -g * std::exp(-rate * x) * ratio;
}

struct CommonTerms {
    double p_sr_fail;   // Pr{gamma_SR < gamma_th}
    double p_sr_ok;     // complement
    double pr_nack;     // Pr{gamma_SD < gamma_th_prime}
    double p_sd_fail;   // Pr{gamma_SD < gamma_th}
    double p_mrc_full;  // Pr{V + gamma_SD < gamma_th}, V ~ Exp(W1) (full draw)
};

CommonTerms common_terms(const DerivedConstants& c) {
    CommonTerms t;
    t.p_sr_fail = -std::expm1(-c.w4 * c.gamma_th);
    t.p_sr_ok = std::exp(-c.w4 * c.gamma_th);
    t.pr_nack = c.nack_probability();
    t.p_sd_fail = -std::expm1(-c.w2 * c.gamma_th);
    t.p_mrc_full = sum_exponential_cdf(c.w1, c.w2, c.gamma_th);
    return t;
}

// Unstable branch: the buffer absorbs, M is drawn almost surely.
OutageResult outage_absorbing(const DerivedConstants& c) {
    const CommonTerms t = common_terms(c);
    OutageResult r;
    r.pr_nack = t.pr_nack;
    const double sr_term = t.p_sr_fail * t.pr_nack;
    const double mrc_term = t.p_sr_ok * t.p_mrc_full;
    r.p_out = sr_term + mrc_term;
    r.components = {{"sr_fail", sr_term}, {"mrc_fail", mrc_term}};
    return r;
}

}  // namespace

QuadResult integral_i_hsu(const DerivedConstants& c, double z1, const Quadrature& q) {
    if (!(z1 > 0.0)) throw StabilityError("integral_i_hsu: requires z1 > 0");
    if (c.gamma_th == 0.0) return {0.0, 0.0};
    const double m = c.m_draw;
    const double x_star = c.w3 / c.w2;

    Quadrature qq = q;
    qq.abs_tol = q.abs_tol / std::max(1.0, c.w2 * z1);
    if (x_star > 0.0 && x_star < m) qq.split_points.push_back(x_star);

    auto f = [&](double x) {
        return relay_mix_integrand(x, z1, c.w3, c.w2, c.gamma_th);
    };
    const QuadResult raw = integrate(f, 0.0, m, qq);
    return {c.w2 * z1 * raw.value, c.w2 * z1 * raw.error_bound};
}

OutageResult outage_hsu_ibep(const DerivedConstants& c,
                             const LimitingDistribution* dist) {
    if (classify(c) == StabilityClass::Unstable) return outage_absorbing(c);
    if (dist == nullptr)
        throw StabilityError("outage_hsu_ibep: stable chain requires its limiting law");

    const CommonTerms t = common_terms(c);
    const double z1 = dist->z1;
    const double surv_m = std::exp(-z1 * c.m_draw);  // Pr{B >= M}
    const QuadResult ihsu = integral_i_hsu(c, z1);

    const double sr_term = t.p_sr_fail * t.pr_nack;
    const double full_term = surv_m * t.p_mrc_full;
    const double partial_sd_term = (1.0 - surv_m) * t.p_sd_fail;

    OutageResult r;
    r.pr_nack = t.pr_nack;
    r.p_out = sr_term + t.p_sr_ok * (full_term + partial_sd_term + ihsu.value);
    r.quad_error = t.p_sr_ok * ihsu.error_bound;
    r.components = {{"sr_fail", sr_term},
                    {"mrc_fail", t.p_sr_ok * (full_term + partial_sd_term + ihsu.value)},
                    {"full_draw", full_term},
                    {"partial_draw_sd", partial_sd_term},
                    {"i_hsu", ihsu.value}};
    return r;
}

OutageResult outage_hsu_iofp(const DerivedConstants& c,
                             const LimitingDistribution* dist) {
    if (classify(c) == StabilityClass::Unstable) return outage_absorbing(c);
    if (dist == nullptr)
        throw StabilityError("outage_hsu_iofp: stable chain requires its limiting law");

    const CommonTerms t = common_terms(c);
    const double inv_phi = 1.0 / c.phi;  // Pr{B >= M}
    const double sr_term = t.p_sr_fail * t.pr_nack;
    const double full_term = inv_phi * t.p_mrc_full;
    const double silent_term = (1.0 - inv_phi) * t.p_sd_fail;

    OutageResult r;
    r.pr_nack = t.pr_nack;
    r.p_out = sr_term + t.p_sr_ok * (full_term + silent_term);
    r.components = {{"sr_fail", sr_term},
                    {"mrc_fail", t.p_sr_ok * (full_term + silent_term)},
                    {"full_draw", full_term},
                    {"silent_sd", silent_term}};
    return r;
}

OutageResult outage_hu(const DerivedConstants& c) {
    const CommonTerms t = common_terms(c);
    const double x_star = 2.0 * c.w3 / c.w2;

    double ihu = 0.0;
    double bound = 0.0;
    if (c.gamma_th > 0.0) {
        auto f = [&](double x) {
            return relay_mix_integrand(x, c.lambda1, 2.0 * c.w3, c.w2, c.gamma_th);
        };
        // Tail majorant for a >= 10 x*: |integrand| <= e^{-w2 g} e^{-l1 x} / (0.9 w2),
        // so the discarded mass of l1 w2 I_HU is below e^{-w2 g} e^{-l1 a} l1 w2 /
        // (0.9 w2 l1).
        auto tail_bound = [&](double a) {
            return std::exp(-c.w2 * c.gamma_th) * std::exp(-c.lambda1 * a) / 0.9;
        };
        double x_max = std::max(20.0 / c.lambda1, 10.0 * x_star);
        Quadrature q;
        q.abs_tol = 1e-10 / std::max(1.0, c.lambda1 * c.w2);
        if (x_star < x_max) q.split_points.push_back(x_star);
        QuadResult raw = integrate(f, 0.0, x_max, q);
        // Extend until the tail is negligible against the running estimate.
        double target = 1e-12 * std::max(std::abs(c.lambda1 * c.w2 * raw.value), 1e-30);
        while (tail_bound(x_max) > target) {
            const double next = 1.5 * x_max;
            Quadrature qe;
            qe.abs_tol = q.abs_tol;
            const QuadResult ext = integrate(f, x_max, next, qe);
            raw.value += ext.value;
            raw.error_bound += ext.error_bound;
            x_max = next;
            target = 1e-12 * std::max(std::abs(c.lambda1 * c.w2 * raw.value), 1e-30);
        }
        ihu = raw.value;
        bound = c.lambda1 * c.w2 * raw.error_bound + tail_bound(x_max);
    }

    const double sr_term = t.p_sr_fail * t.pr_nack;
    const double mrc_term = t.p_sr_ok * (c.lambda1 * c.w2 * ihu + t.p_sd_fail);

    OutageResult r;
    r.pr_nack = t.pr_nack;
    r.p_out = sr_term + mrc_term;
    r.quad_error = t.p_sr_ok * bound;
    r.components = {{"sr_fail", sr_term},
                    {"mrc_fail", mrc_term},
                    {"i_hu", ihu}};
    return r;
}

OutageResult outage_dt(const DerivedConstants& c) {
    OutageResult r;
    r.pr_nack = 1.0;
    r.p_out = -std::expm1(-c.w2 * c.gamma_th);
    r.components = {{"direct_fail", r.p_out}};
    return r;
}

OutageResult analytic_outage(const DerivedConstants& c, PolicyKind scheme) {
    // phi and M are mode-dependent, so buffered-scheme constants must have
    // been derived under the scheme's own signalling mode.
    if (uses_buffer(scheme) && c.mode != mode_of(scheme))
        throw ModeError("analytic_outage: constants derived under the wrong mode for " +
                        to_string(scheme));
    switch (scheme) {
        case PolicyKind::Ibep:
        case PolicyKind::Nibep: {
            if (classify(c) == StabilityClass::Unstable)
                return outage_hsu_ibep(c, nullptr);
            const LimitingDistribution d = ibep_distribution(c);
            return outage_hsu_ibep(c, &d);
        }
        case PolicyKind::Iofp:
        case PolicyKind::Niofp: {
            if (classify(c) == StabilityClass::Unstable)
                return outage_hsu_iofp(c, nullptr);
            const LimitingDistribution d = iofp_distribution(c);
            return outage_hsu_iofp(c, &d);
        }
        case PolicyKind::Hu:
            return outage_hu(c);
        case PolicyKind::Dt:
            return outage_dt(c);
    }
    throw DomainError("analytic_outage: unknown scheme");
}

double throughput(const DerivedConstants& c, double p_out, PolicyKind scheme) {
    if (scheme == PolicyKind::Dt) {
        if (!(p_out >= 0.0 && p_out <= 1.0))
            throw ConsistencyError("throughput: p_out outside [0, 1]");
        return c.rate_bpcu * (1.0 - p_out);
    }
    const double pr_nack = c.nack_probability();
    if (!(p_out >= 0.0 && p_out <= pr_nack + 1e-12))
        throw ConsistencyError("throughput: p_out outside [0, Pr{NACK}]");
    return c.rate_bpcu * c.ack_probability() +
           0.5 * c.rate_bpcu * (pr_nack - p_out);
}

AsymptoteModel outage_asymptote(const DerivedConstants& c, PolicyKind policy) {
    if (!c.incremental())
        throw ModeError("outage_asymptote: defined for incremental signalling");
    const double dsd_a = std::pow(c.geometry.d_sd, c.alpha);
    const double dsr_a = std::pow(c.geometry.d_sr, c.alpha);
    const double g = c.gamma_th;
    AsymptoteModel m;
    switch (policy) {
        case PolicyKind::Ibep:
            m.diversity_order = 2;
            m.inv_sq_coeff = dsd_a * dsr_a * g * g;
            m.inv_lin_coeff = 0.0;
            return m;
        case PolicyKind::Iofp:
            m.diversity_order = 1;
            m.inv_sq_coeff = dsd_a * dsr_a * g * g / c.phi;
            m.inv_lin_coeff = (1.0 - 1.0 / c.phi) * g * dsd_a;
            return m;
        default:
            throw ModeError("outage_asymptote: only IBEP and IOFP have asymptotes");
    }
}

double estimate_diversity_order(std::span<const std::pair<double, double>> points,
                                double fit_window_db) {
    if (points.size() < 3)
        throw DomainError("estimate_diversity_order: need at least 3 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& [snr, p] = points[i];
        if (!(snr > 0.0))
            throw DomainError("estimate_diversity_order: SNR must be > 0");
        if (i > 0 && !(snr > points[i - 1].first))
            throw DomainError("estimate_diversity_order: SNRs must be increasing");
        if (p == 0.0)
            throw DegenerateError("estimate_diversity_order: p_out = 0 at a point");
        if (!(p > 0.0 && p < 1.0))
            throw DomainError("estimate_diversity_order: p_out must lie in (0, 1)");
    }

    const double max_db = 10.0 * std::log10(points.back().first);
    std::vector<std::pair<double, double>> xy;
    for (const auto& [snr, p] : points) {
        if (10.0 * std::log10(snr) < max_db - fit_window_db) continue;
        xy.emplace_back(std::log10(snr), -std::log10(p));
    }
    if (xy.size() < 3)
        throw DomainError("estimate_diversity_order: fit window keeps < 3 points");

    double sx = 0, sy = 0;
    for (const auto& [x, y] : xy) { sx += x; sy += y; }
    const double mx = sx / xy.size();
    const double my = sy / xy.size();
    double num = 0, den = 0;
    for (const auto& [x, y] : xy) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    return num / den;
}

}  // namespace relaybuf
