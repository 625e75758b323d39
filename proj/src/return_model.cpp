#include "qsde/return_model.hpp"

#include "qsde/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qsde {

ReturnModelParams ReturnModelParams::preset_defaults() {
    ReturnModelParams p;
    p.sde.eta = 2.5;
    p.sde.lambda = 3.6;
    p.sde.epsilon = 0.01;
    p.solver.kappa = 0.01;
    p.solver.burn_in = 1'000'000;
    p.lambda2 = 5.0;
    p.r0_bar = 0.2;
    p.tau = 1e-4;
    p.ma_window = 60;
    p.modulation = {1.0, 2.5};
    return p;
}

void ReturnModelParams::validate() const {
    sde.validate();
    if (!(lambda2 > 3.0)) {
        throw std::invalid_argument(
            "ReturnModelParams: lambda2 must be > 3 (finite variance)");
    }
    if (!(r0_bar >= 0.0)) {
        throw std::invalid_argument("ReturnModelParams: r0_bar must be >= 0");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("ReturnModelParams: tau must be > 0");
    }
    if (ma_window < 2 || ma_window % 2 != 0) {
        throw std::invalid_argument(
            "ReturnModelParams: ma_window must be even and >= 2");
    }
    if (!(modulation.intercept > 0.0) || !(modulation.slope >= 0.0)) {
        throw std::invalid_argument(
            "ReturnModelParams: modulation needs intercept > 0, slope >= 0");
    }
}

double modulation_scale(double ma_value, const ReturnModelParams& params) {
    if (!std::isfinite(ma_value)) {
        throw std::invalid_argument("modulation_scale: non-finite input");
    }
    return params.modulation.intercept +
           params.modulation.slope * std::abs(ma_value);
}

GeneratedReturns generate_returns_with_modulator(
    const ReturnModelParams& params, std::size_t n_minutes,
    std::uint64_t seed) {
    params.validate();
    if (n_minutes == 0) {
        throw std::invalid_argument("generate_returns: n_minutes must be >= 1");
    }

    // Independent substreams for the background SDE and the per-minute
    // fluctuation draws.
    Rng base(seed);
    Rng draw_rng = base.substream(1);

    GeneratedReturns out;
    out.modulator.assign(n_minutes, 0.0);
    if (params.r0_bar > 0.0) {
        SolverConfig cfg = params.solver;
        cfg.seed = base.substream(0).seed();
        const ReturnSeries windows =
            simulate_windows(params.sde, cfg, params.tau, n_minutes);
        for (std::size_t m = 0; m < n_minutes; ++m) {
            out.modulator[m] = params.r0_bar * windows.values[m];
        }
    }

    out.returns.dt = 1.0;
    out.returns.meta = "synthetic seed=" + std::to_string(seed);
    out.returns.values.reserve(n_minutes);
    for (std::size_t m = 0; m < n_minutes; ++m) {
        const QGaussianParams qp(params.lambda2,
                                 modulation_scale(out.modulator[m], params));
        out.returns.values.push_back(sample_qgaussian(qp, draw_rng));
    }
    return out;
}

ReturnSeries generate_returns(const ReturnModelParams& params,
                              std::size_t n_minutes, std::uint64_t seed) {
    return generate_returns_with_modulator(params, n_minutes, seed).returns;
}

ReturnSeries normalize_returns(const ReturnSeries& series) {
    const std::size_t n = series.values.size();
    if (n < 2) {
        throw std::invalid_argument("normalize_returns: need >= 2 values");
    }
    const double mean =
        std::accumulate(series.values.begin(), series.values.end(), 0.0) /
        double(n);
    double ss = 0.0;
    for (double v : series.values) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / double(n - 1));
    if (!(sd > 0.0)) {
        throw std::invalid_argument("normalize_returns: zero variance");
    }
    ReturnSeries out = series;
    for (double& v : out.values) v /= sd;
    return out;
}

double fit_qgaussian_scale(std::span<const double> values, double lambda) {
    if (!(lambda > 1.0)) {
        throw std::invalid_argument("fit_qgaussian_scale: lambda must be > 1");
    }
    const std::size_t n = values.size();
    if (n == 0) {
        throw std::invalid_argument("fit_qgaussian_scale: empty input");
    }
    double max_abs = 0.0;
    std::size_t nonzero = 0;
    for (double v : values) {
        max_abs = std::max(max_abs, std::abs(v));
        if (v != 0.0) ++nonzero;
    }
    if (double(nonzero) <= double(n) / lambda) {
        throw std::invalid_argument(
            "fit_qgaussian_scale: too many zero observations");
    }

    // The score in r0 reduces to sum(r^2/(r0^2+r^2)) = n/lambda, whose
    // left side decreases monotonically in r0: bisect.
    const auto score = [&](double r0) {
        double s = 0.0;
        for (double v : values) {
            s += v * v / (r0 * r0 + v * v);
        }
        return s - double(n) / lambda;
    };
    double lo = max_abs * 1e-12;
    double hi = max_abs * 1e3;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (score(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return std::sqrt(lo * hi);
}

DecompositionResult decompose_empirical(const ReturnSeries& series,
                                        std::size_t ma_window,
                                        double lambda2,
                                        std::size_t n_bins) {
    if (n_bins == 0) {
        throw std::invalid_argument("decompose_empirical: n_bins must be >= 1");
    }
    const ReturnSeries ma = moving_average(series, ma_window);
    const std::size_t m = ma.values.size();
    if (m < n_bins) {
        throw std::invalid_argument(
            "decompose_empirical: series too short for the bin count");
    }

    // ma.values[i] is centered on original index i + ma_window/2.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(ma.values[a]) < std::abs(ma.values[b]);
    });

    DecompositionResult result;
    result.bins.reserve(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t begin = b * m / n_bins;
        const std::size_t end = (b + 1) * m / n_bins;
        if (begin == end) continue;
        std::vector<double> returns;
        returns.reserve(end - begin);
        double ma_sum = 0.0;
        for (std::size_t j = begin; j < end; ++j) {
            const std::size_t i = order[j];
            ma_sum += std::abs(ma.values[i]);
            returns.push_back(series.values[i + ma_window / 2]);
        }
        DecompositionBin bin;
        bin.count = returns.size();
        bin.ma_center = ma_sum / double(returns.size());
        bin.r0_fit = fit_qgaussian_scale(returns, lambda2);
        bin.underpopulated = bin.count < 1000;
        result.bins.push_back(bin);
    }

    // Population-weighted least squares of r0 on |MA|.
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (const auto& bin : result.bins) {
        const double w = double(bin.count);
        sw += w;
        swx += w * bin.ma_center;
        swy += w * bin.r0_fit;
        swxx += w * bin.ma_center * bin.ma_center;
        swxy += w * bin.ma_center * bin.r0_fit;
    }
    const double denom = sw * swxx - swx * swx;
    if (denom > 0.0) {
        result.fitted.slope = (sw * swxy - swx * swy) / denom;
        result.fitted.intercept = (swy - result.fitted.slope * swx) / sw;
    } else {
        result.fitted.slope = 0.0;
        result.fitted.intercept = swy / sw;
    }
    return result;
}

ReturnSeries aggregate_ticks(const std::vector<Tick>& ticks,
                             double bar_seconds) {
    if (ticks.empty()) {
        throw std::invalid_argument("aggregate_ticks: no ticks");
    }
    if (!(bar_seconds > 0.0)) {
        throw std::invalid_argument("aggregate_ticks: bar must be positive");
    }
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        if (!(ticks[i].price > 0.0)) {
            throw std::invalid_argument("aggregate_ticks: non-positive price");
        }
        if (i > 0 && ticks[i].timestamp < ticks[i - 1].timestamp) {
            throw std::invalid_argument(
                "aggregate_ticks: timestamps must be non-decreasing");
        }
    }

    const double origin =
        std::floor(ticks.front().timestamp / bar_seconds) * bar_seconds;
    const auto bar_of = [&](double ts) {
        return static_cast<std::size_t>((ts - origin) / bar_seconds);
    };
    const std::size_t n_bars = bar_of(ticks.back().timestamp) + 1;

    ReturnSeries out;
    out.dt = bar_seconds;
    out.values.assign(n_bars, 0.0);
    out.counts.assign(n_bars, 0.0);

    std::size_t i = 0;
    for (std::size_t b = 0; b < n_bars; ++b) {
        const double bar_end = origin + double(b + 1) * bar_seconds;
        double first = 0.0, last = 0.0;
        std::size_t count = 0;
        while (i < ticks.size() && ticks[i].timestamp < bar_end) {
            if (count == 0) first = ticks[i].price;
            last = ticks[i].price;
            ++count;
            ++i;
        }
        if (count > 0) {
            out.values[b] = std::log(last / first);
        }
        out.counts[b] = double(count);
    }
    return out;
}

}  // namespace qsde
