#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qsde/rng.hpp"
#include "qsde/series.hpp"

namespace qsde {

// |x| beyond this aborts a simulation; the exponential diffusion
// restriction makes it unreachable for sane parameters.
inline constexpr double kDivergenceGuard = 1e12;

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coefficients of the two-power SDE
//   dx = (eta - lambda/2 - (x eps^eta)^2) (1+x^2)^(eta-1)
//        / (sqrt(1+x^2) eps + 1)^2 * x dt
//        + (1+x^2)^(eta/2) / (sqrt(1+x^2) eps + 1) dW ,
// reducing exactly to the single-power equation at epsilon = 0.
// r0 and sigma only enter the unscaled (physical-unit) form.
struct SdeParams {
    double eta = 2.5;
    double lambda = 3.6;
    double epsilon = 0.0;
    double r0 = 1.0;
    double sigma = 1.0;

    void validate() const;
    // Constraints under which the closed-form power-law spectrum holds:
    // eta > 1 and 4 - eta < lambda < 1 + 2 eta.
    bool spectrum_regime() const;
};

struct SolverConfig {
    double kappa = 0.01;
    std::uint64_t burn_in = 1'000'000;
    double x_init = 0.0;
    std::uint64_t seed = 0;
    double t_end = 0.0;          // stop once scaled time exceeds this
    std::uint64_t max_steps = 0; // 0 = no step cap
    // Optional mirror boundary at |x| = reflect_bound (0 disables). With
    // epsilon = 0 and lambda < 2 eta - 1 the unrestricted process escapes
    // to infinity, so long single-power runs need a reflecting wall; its
    // quasi-stationary law keeps the q-Gaussian shape for |x| well below
    // the wall.
    double reflect_bound = 0.0;

    void validate() const;
};

// A simulated path in scaled time, plus everything needed to regenerate it.
struct Trajectory {
    std::vector<double> times;   // strictly increasing
    std::vector<double> values;
    std::uint64_t seed = 0;
    SdeParams params;
    SolverConfig config;
};

double drift(double x, const SdeParams& p);
double diffusion(double x, const SdeParams& p);

// Drift implied by a diffusion coefficient b when the stationary law is
// the q-Gaussian with (lambda, r0):
//   a(x) = -(lambda/2) x/(r0^2+x^2) b(x)^2 + b(x) b'(x).
// The first overload takes the derivative analytically, the second by
// central finite difference.
double drift_from_diffusion(const std::function<double(double)>& b,
                            const std::function<double(double)>& db,
                            double lambda, double r0, double x);
double drift_from_diffusion(const std::function<double(double)>& b,
                            double lambda, double r0, double x);

// One-step state of the variable-step scheme
//   h_k     = kappa^2 (sqrt(x_k^2+1) eps + 1)^2 / (x_k^2+1)^(eta-1)
//   x_{k+1} = x_k + kappa^2 (eta - lambda/2 - (x_k eps^eta)^2) x_k
//             + kappa sqrt(x_k^2+1) n_k
//   t_{k+1} = t_k + h_k
// with n_k standard normal. The step is algebraically the Euler-Maruyama
// update of the two-power SDE under the state-dependent step h_k.
class SdeStepper {
public:
    SdeStepper(const SdeParams& p, const SolverConfig& cfg);

    // Advances one step; afterwards x()/t() are the new state and
    // last_dt() the duration the previous value was held for.
    void step();

    double x() const { return x_; }
    double t() const { return t_; }
    double last_dt() const { return last_dt_; }
    double step_size() const; // h_k at the current state

private:
    SdeParams params_;
    double kappa_;
    double kappa2_;
    double eps_pow_eta_;
    double reflect_bound_ = 0.0;
    double x_;
    double t_ = 0.0;
    double last_dt_ = 0.0;
    Rng rng_;
};

// Full path, burn-in discarded, time reset to zero at the end of burn-in.
Trajectory simulate(const SdeParams& p, const SolverConfig& cfg);

// x -> r = r0 x, t_s -> t = t_s / (sigma^2 r0^(2(eta-1))).
Trajectory rescale(const Trajectory& traj, double r0, double sigma,
                   double eta);

// Window means X_m = (1/tau) int_{m tau}^{(m+1) tau} x dt_s over
// consecutive non-overlapping windows, holding each sample constant over
// its step (left-hold).
ReturnSeries integrate_window(const Trajectory& traj, double tau);

// Streaming equivalent of simulate + integrate_window for runs too long
// to hold in memory. Produces exactly n_windows values.
ReturnSeries simulate_windows(const SdeParams& p, const SolverConfig& cfg,
                              double tau, std::size_t n_windows);

}  // namespace qsde
