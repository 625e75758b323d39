#include "qsde/qgaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace qsde {

namespace {
// Band treated as the q -> 1 exponential limit. Wide enough that the
// true q-exponential inside it is indistinguishable from exp(x) to 1e-6
// over |x| <= 10.
constexpr double kQOneTolerance = 1e-7;
}

QGaussianParams::QGaussianParams(double lambda_, double r0_)
    : lambda(lambda_), r0(r0_) {
    if (!(lambda > 1.0)) {
        throw std::invalid_argument("QGaussianParams: lambda must be > 1");
    }
    if (!(r0 > 0.0)) {
        throw std::invalid_argument("QGaussianParams: r0 must be > 0");
    }
}

double QGaussianParams::sigma_q() const {
    const double qv = q();
    return r0 / std::sqrt((3.0 - qv) / (qv - 1.0));
}

double exp_q(double x, double q) {
    if (std::abs(q - 1.0) < kQOneTolerance) {
        return std::exp(x);
    }
    const double arg = (1.0 - q) * x;
    if (arg <= -1.0) {
        throw std::domain_error("exp_q: 1 + (1-q)x must be positive");
    }
    // log1p keeps the small-|1-q| regime accurate.
    return std::exp(std::log1p(arg) / (1.0 - q));
}

double qgaussian_log_pdf(double x, const QGaussianParams& p) {
    const double half = p.lambda / 2.0;
    const double log_norm = std::lgamma(half) - std::lgamma(half - 0.5) -
                            0.5 * std::log(M_PI) - std::log(p.r0);
    const double z = x / p.r0;
    return log_norm - half * std::log1p(z * z);
}

double qgaussian_pdf(double x, const QGaussianParams& p) {
    return std::exp(qgaussian_log_pdf(x, p));
}

double sample_qgaussian(const QGaussianParams& p, Rng& rng) {
    const double nu = p.lambda - 1.0;
    return p.r0 / std::sqrt(nu) * rng.student_t(nu);
}

std::vector<double> sample_qgaussian(const QGaussianParams& p, Rng& rng,
                                     std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample_qgaussian(p, rng));
    }
    return out;
}

QGaussianParams params_from_q(double q, double sigma_q) {
    if (!(q > 1.0 && q < 3.0)) {
        throw std::domain_error("params_from_q: need 1 < q < 3");
    }
    if (!(sigma_q > 0.0)) {
        throw std::invalid_argument("params_from_q: sigma_q must be > 0");
    }
    const double lambda = 2.0 / (q - 1.0);
    const double r0 = sigma_q * std::sqrt((3.0 - q) / (q - 1.0));
    return QGaussianParams(lambda, r0);
}

std::pair<double, double> params_to_q(const QGaussianParams& p) {
    return {p.q(), p.sigma_q()};
}

}  // namespace qsde
