#include "relaybuf/special.hpp"

#include <algorithm>
#include <cmath>

namespace relaybuf {

namespace {

constexpr double kBranchPoint = -0.36787944117144233;  // -1/e

// Series around the branch point in p = sqrt(2 (e z + 1)):
// w = -1 + p - p^2/3 + 11 p^3/72 - 43 p^4/540 + 769 p^5/17280 - 221 p^6/8505.
double branch_series(double p) {
    const double c3 = 11.0 / 72.0;
    const double c4 = -43.0 / 540.0;
    const double c5 = 769.0 / 17280.0;
    const double c6 = -221.0 / 8505.0;
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (c3 + p * (c4 + p * (c5 + p * c6)))));
}

}  // namespace

double lambert_w0(double z) {
    if (!(z >= kBranchPoint - 1e-15))
        throw DomainError("lambert_w0: argument below -1/e");
    if (z <= kBranchPoint) return -1.0;

    const double p_sq = 2.0 * (std::exp(1.0) * z + 1.0);
    if (p_sq <= 0.0) return -1.0;  // rounding right at the branch point
    const double p = std::sqrt(p_sq);
    // Near the branch point Halley's f'(w) -> 0; the series alone is already
    // far below the residual tolerance there.
    if (p < 1e-3) return branch_series(p);

    double w;
    if (z < -0.1) {
        w = branch_series(p);
    } else if (z < 4.0) {
        w = std::log1p(z);  // crude but inside Halley's basin
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    const double tol = 1e-14 * std::max(1.0, std::abs(z));
    for (int it = 0; it < 60; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::abs(f) <= tol) break;
        const double wp1 = w + 1.0;
        // Halley: w -= f / (e^w (w+1) - (w+2) f / (2 (w+1)))
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        const double next = w - f / denom;
        if (next == w) break;
        w = next;
        if (w < -1.0) w = -1.0;
    }
    return w;
}

namespace {

struct SimpsonAccumulator {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

// Classic adaptive Simpson with Richardson extrapolation. whole is the
// Simpson estimate over [a,b]; fa/fm/fb its samples.
void adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                      double b, double fb, double m, double fm, double whole,
                      double tol, int depth, SimpsonAccumulator& acc) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || depth <= 0) {
        acc.value += left + right + delta / 15.0;
        acc.error += std::abs(delta) / 15.0;
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) acc.converged = false;
        return;
    }
    adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, acc);
    adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, acc);
}

void integrate_segment(const std::function<double(double)>& f, double a, double b,
                       double tol, int max_depth, SimpsonAccumulator& acc) {
    if (a == b) return;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, max_depth, acc);
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const Quadrature& q) {
    if (!(a <= b)) throw DomainError("integrate: requires a <= b");
    if (!(q.abs_tol > 0.0)) throw DomainError("integrate: abs_tol must be > 0");

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double s : q.split_points) {
        if (!(s > a && s < b))
            throw DomainError("integrate: split point outside (a, b)");
        cuts.push_back(s);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    SimpsonAccumulator acc;
    const double seg_tol = q.abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        integrate_segment(f, cuts[i], cuts[i + 1], seg_tol, q.max_depth, acc);

    if (!acc.converged)
        throw QuadratureError("integrate: max_depth exhausted before reaching abs_tol",
                              acc.value, acc.error);
    return {acc.value, acc.error};
}

}  // namespace relaybuf
