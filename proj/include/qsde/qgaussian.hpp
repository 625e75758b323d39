#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qsde/rng.hpp"

namespace qsde {

// Heavy-tailed stationary law P(r) = A (r0^2 / (r0^2 + r^2))^(lambda/2)
// in the (lambda, r0) parameterization, lambda = 2/(q-1). The q-mean is
// fixed at zero.
struct QGaussianParams {
    double lambda;  // tail exponent, > 1
    double r0;      // scale, > 0

    QGaussianParams(double lambda_, double r0_);

    double q() const { return 1.0 + 2.0 / lambda; }
    // sigma_q from r0 = sigma_q * sqrt((3-q)/(q-1)); defined for all
    // lambda > 1 since q < 3 there.
    double sigma_q() const;
};

// exp_q(x) = (1 + (1-q)x)^(1/(1-q)); ordinary exp in the q -> 1 limit.
// Throws std::domain_error when 1 + (1-q)x <= 0 for q != 1.
double exp_q(double x, double q);

// Normalized density of the q-Gaussian law. Evaluated through log-gamma
// so large lambda does not overflow.
double qgaussian_pdf(double x, const QGaussianParams& p);
double qgaussian_log_pdf(double x, const QGaussianParams& p);

// One draw / n i.i.d. draws. Implemented as a scaled Student-t with
// nu = lambda - 1 degrees of freedom; the densities coincide exactly.
double sample_qgaussian(const QGaussianParams& p, Rng& rng);
std::vector<double> sample_qgaussian(const QGaussianParams& p, Rng& rng,
                                     std::size_t n);

// (q, sigma_q) <-> (lambda, r0) transforms. Forward requires 1 < q < 3.
QGaussianParams params_from_q(double q, double sigma_q);
std::pair<double, double> params_to_q(const QGaussianParams& p);

}  // namespace qsde
