#pragma once

#include <functional>
#include <vector>

#include "relaybuf/errors.hpp"

namespace relaybuf {

/// Principal branch W0 of the Lambert-W function, w*exp(w) = z.
///
/// Domain z >= -1/e; inputs within 1e-15 below the branch point are clamped
/// to -1/e. Residual |w*e^w - z| <= 1e-13 * max(1, |z|) and w >= -1.
/// Throws DomainError for z further below -1/e (or NaN).
double lambert_w0(double z);

/// Quadrature controls. split_points force interval subdivision at interior
/// abscissae so the estimator never straddles a patched (removable)
/// singularity of the integrand.
struct Quadrature {
    double abs_tol = 1e-10;
    int max_depth = 60;
    std::vector<double> split_points;
};

struct QuadResult {
    double value = 0.0;
    double error_bound = 0.0;
};

/// Adaptive Simpson integration of f over [a, b] with a Richardson error
/// estimate. Deterministic for fixed inputs. The integrand must be finite on
/// [a, b]; removable singularities must be patched by the caller and listed
/// in q.split_points. Throws QuadratureError (carrying the best estimate and
/// its bound) if max_depth is exhausted before reaching abs_tol.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const Quadrature& q = {});

}  // namespace relaybuf
