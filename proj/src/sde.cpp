#include "qsde/sde.hpp"

#include <cmath>
#include <limits>

namespace qsde {

void SdeParams::validate() const {
    if (!(eta > 1.0)) {
        throw std::invalid_argument("SdeParams: eta must be > 1");
    }
    if (!std::isfinite(lambda)) {
        throw std::invalid_argument("SdeParams: lambda must be finite");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("SdeParams: epsilon must be >= 0");
    }
    if (!(r0 > 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("SdeParams: r0 and sigma must be > 0");
    }
}

bool SdeParams::spectrum_regime() const {
    return eta > 1.0 && lambda > 4.0 - eta && lambda < 1.0 + 2.0 * eta;
}

void SolverConfig::validate() const {
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("SolverConfig: kappa must be > 0");
    }
    if (!(t_end > 0.0) && max_steps == 0) {
        throw std::invalid_argument(
            "SolverConfig: need a stopping rule (t_end or max_steps)");
    }
    if (!std::isfinite(x_init)) {
        throw std::invalid_argument("SolverConfig: x_init must be finite");
    }
    if (!(reflect_bound >= 0.0)) {
        throw std::invalid_argument(
            "SolverConfig: reflect_bound must be >= 0");
    }
}

double drift(double x, const SdeParams& p) {
    const double x2p1 = 1.0 + x * x;
    const double eps_term = std::sqrt(x2p1) * p.epsilon + 1.0;
    const double restriction = x * std::pow(p.epsilon, p.eta);
    return (p.eta - p.lambda / 2.0 - restriction * restriction) *
           std::pow(x2p1, p.eta - 1.0) / (eps_term * eps_term) * x;
}

double diffusion(double x, const SdeParams& p) {
    const double x2p1 = 1.0 + x * x;
    return std::pow(x2p1, p.eta / 2.0) /
           (std::sqrt(x2p1) * p.epsilon + 1.0);
}

double drift_from_diffusion(const std::function<double(double)>& b,
                            const std::function<double(double)>& db,
                            double lambda, double r0, double x) {
    const double bx = b(x);
    return -lambda / 2.0 * x / (r0 * r0 + x * x) * bx * bx + bx * db(x);
}

double drift_from_diffusion(const std::function<double(double)>& b,
                            double lambda, double r0, double x) {
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double db = (b(x + h) - b(x - h)) / (2.0 * h);
    const double bx = b(x);
    return -lambda / 2.0 * x / (r0 * r0 + x * x) * bx * bx + bx * db;
}

SdeStepper::SdeStepper(const SdeParams& p, const SolverConfig& cfg)
    : params_(p),
      kappa_(cfg.kappa),
      kappa2_(cfg.kappa * cfg.kappa),
      eps_pow_eta_(std::pow(p.epsilon, p.eta)),
      reflect_bound_(cfg.reflect_bound),
      x_(cfg.x_init),
      rng_(cfg.seed) {
    p.validate();
    if (!(cfg.kappa > 0.0)) {
        throw std::invalid_argument("SdeStepper: kappa must be > 0");
    }
}

double SdeStepper::step_size() const {
    const double x2p1 = x_ * x_ + 1.0;
    const double eps_term = std::sqrt(x2p1) * params_.epsilon + 1.0;
    return kappa2_ * eps_term * eps_term /
           std::pow(x2p1, params_.eta - 1.0);
}

void SdeStepper::step() {
    const double h = step_size();
    const double restriction = x_ * eps_pow_eta_;
    double x_next =
        x_ +
        kappa2_ * (params_.eta - params_.lambda / 2.0 -
                   restriction * restriction) *
            x_ +
        kappa_ * std::sqrt(x_ * x_ + 1.0) * rng_.normal();
    if (reflect_bound_ > 0.0) {
        while (std::abs(x_next) > reflect_bound_) {
            x_next = std::copysign(
                2.0 * reflect_bound_ - std::abs(x_next), x_next);
        }
    }
    if (!(std::abs(x_next) < kDivergenceGuard)) {
        throw DivergenceError("SDE trajectory diverged (|x| > 1e12)");
    }
    x_ = x_next;
    t_ += h;
    last_dt_ = h;
}

namespace {

// Runs the burn-in phase of a stepper.
void run_burn_in(SdeStepper& st, std::uint64_t burn_in) {
    for (std::uint64_t k = 0; k < burn_in; ++k) {
        st.step();
    }
}

}  // namespace

Trajectory simulate(const SdeParams& p, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();

    SdeStepper st(p, cfg);
    run_burn_in(st, cfg.burn_in);

    Trajectory traj;
    traj.seed = cfg.seed;
    traj.params = p;
    traj.config = cfg;
    if (cfg.max_steps > 0) {
        traj.times.reserve(cfg.max_steps + 1);
        traj.values.reserve(cfg.max_steps + 1);
    }

    const double t_origin = st.t();
    traj.times.push_back(0.0);
    traj.values.push_back(st.x());

    std::uint64_t steps = 0;
    for (;;) {
        if (cfg.max_steps > 0 && steps >= cfg.max_steps) break;
        if (cfg.t_end > 0.0 && st.t() - t_origin >= cfg.t_end) break;
        st.step();
        ++steps;
        traj.times.push_back(st.t() - t_origin);
        traj.values.push_back(st.x());
    }
    return traj;
}

Trajectory rescale(const Trajectory& traj, double r0, double sigma,
                   double eta) {
    if (!(r0 > 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("rescale: r0 and sigma must be > 0");
    }
    const double time_factor =
        1.0 / (sigma * sigma * std::pow(r0, 2.0 * (eta - 1.0)));
    Trajectory out = traj;
    for (double& t : out.times) t *= time_factor;
    for (double& x : out.values) x *= r0;
    return out;
}

ReturnSeries integrate_window(const Trajectory& traj, double tau) {
    if (traj.times.empty()) {
        throw std::invalid_argument("integrate_window: empty trajectory");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("integrate_window: tau must be > 0");
    }
    const double span = traj.times.back() - traj.times.front();
    if (span < tau) {
        throw std::invalid_argument(
            "integrate_window: trajectory span shorter than tau");
    }

    ReturnSeries out;
    out.dt = tau;
    const std::size_t n_windows = static_cast<std::size_t>(span / tau);
    out.values.reserve(n_windows);

    const double t0 = traj.times.front();
    double window_end = t0 + tau;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        double seg_lo = traj.times[k];
        const double seg_hi = traj.times[k + 1];
        const double v = traj.values[k];
        while (seg_hi >= window_end) {
            acc += v * (window_end - seg_lo);
            out.values.push_back(acc / tau);
            seg_lo = window_end;
            window_end += tau;
            acc = 0.0;
            if (out.values.size() == n_windows) return out;
        }
        acc += v * (seg_hi - seg_lo);
    }
    return out;
}

ReturnSeries simulate_windows(const SdeParams& p, const SolverConfig& cfg,
                              double tau, std::size_t n_windows) {
    p.validate();
    if (!(cfg.kappa > 0.0)) {
        throw std::invalid_argument("simulate_windows: kappa must be > 0");
    }
    if (!(tau > 0.0) || n_windows == 0) {
        throw std::invalid_argument(
            "simulate_windows: need tau > 0 and n_windows >= 1");
    }

    SdeStepper st(p, cfg);
    run_burn_in(st, cfg.burn_in);

    ReturnSeries out;
    out.dt = tau;
    out.values.reserve(n_windows);

    const double t_origin = st.t();
    double window_end = tau;
    double acc = 0.0;
    while (out.values.size() < n_windows) {
        const double seg_start = st.t() - t_origin;
        const double v = st.x();
        st.step();
        const double seg_end = st.t() - t_origin;
        double lo = seg_start;
        while (seg_end >= window_end) {
            acc += v * (window_end - lo);
            out.values.push_back(acc / tau);
            lo = window_end;
            window_end += tau;
            acc = 0.0;
            if (out.values.size() == n_windows) return out;
        }
        acc += v * (seg_end - lo);
    }
    return out;
}

}  // namespace qsde
