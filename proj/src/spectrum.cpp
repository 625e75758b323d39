#include "qsde/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace qsde {

namespace {

std::mutex fftw_plan_mutex;  // FFTW plan creation is not thread-safe

struct RealFft {
    std::size_t n;
    double* in;
    fftw_complex* out;
    fftw_plan plan;

    explicit RealFft(std::size_t n_) : n(n_) {
        in = fftw_alloc_real(n);
        out = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out,
                                    FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    void execute() { fftw_execute(plan); }
};

double sample_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

}  // namespace

SpectrumEstimate estimate_psd(const ReturnSeries& series,
                              std::size_t n_segments, Taper taper) {
    const std::size_t n = series.values.size();
    if (n_segments == 0) {
        throw std::invalid_argument("estimate_psd: n_segments must be >= 1");
    }
    if (n < 2 * n_segments) {
        throw std::invalid_argument(
            "estimate_psd: series too short for the requested segments");
    }

    // Half-overlapping segments: starts at multiples of seg_len/2.
    std::size_t seg_len = 2 * n / (n_segments + 1);
    seg_len &= ~std::size_t{1};  // even, so seg_len/2 is exact
    const std::size_t hop = seg_len / 2;

    std::vector<double> window(seg_len);
    double window_power = 0.0;
    for (std::size_t j = 0; j < seg_len; ++j) {
        window[j] =
            taper == Taper::Hann
                ? 0.5 * (1.0 - std::cos(2.0 * M_PI * (double(j) + 0.5) /
                                        double(seg_len)))
                : 1.0;
        window_power += window[j] * window[j];
    }

    const double mean = sample_mean(series.values);
    const double fs = 1.0 / series.dt;

    RealFft fft(seg_len);
    const std::size_t n_bins = seg_len / 2;  // DC excluded, Nyquist kept
    std::vector<double> power(n_bins, 0.0);

    std::size_t used = 0;
    for (std::size_t start = 0; start + seg_len <= n; start += hop) {
        for (std::size_t j = 0; j < seg_len; ++j) {
            fft.in[j] = (series.values[start + j] - mean) * window[j];
        }
        fft.execute();
        for (std::size_t k = 1; k <= n_bins; ++k) {
            const double re = fft.out[k][0];
            const double im = fft.out[k][1];
            const double scale = (k == n_bins) ? 1.0 : 2.0;  // one-sided
            power[k - 1] += scale * (re * re + im * im);
        }
        ++used;
        if (used == n_segments) break;
    }

    const double norm = 1.0 / (fs * window_power * double(used));
    SpectrumEstimate est;
    est.n_segments = used;
    est.window_label = taper == Taper::Hann ? "hann" : "rectangular";
    est.freqs.resize(n_bins);
    est.power.resize(n_bins);
    for (std::size_t k = 1; k <= n_bins; ++k) {
        est.freqs[k - 1] = double(k) * fs / double(seg_len);
        est.power[k - 1] = power[k - 1] * norm;
    }
    return est;
}

double spectral_exponent(const SdeParams& p) {
    if (!p.spectrum_regime()) {
        throw std::domain_error(
            "spectral_exponent: need eta > 1 and 4-eta < lambda < 1+2*eta");
    }
    return 1.0 + (p.lambda - 3.0) / (2.0 * (p.eta - 1.0));
}

double spectral_amplitude(const SdeParams& p) {
    const double beta = spectral_exponent(p);
    const double base = (2.0 + p.lambda - 2.0 * p.eta) / (2.0 * M_PI);
    if (!(base > 0.0) || !(beta > 0.5)) {
        throw std::domain_error(
            "spectral_amplitude: parameters outside the closed-form range");
    }
    return (p.lambda - 1.0) * std::tgamma(beta - 0.5) /
           (2.0 * std::sqrt(M_PI) * (p.eta - 1.0) *
            std::sin(M_PI * beta / 2.0)) *
           std::pow(base, beta - 1.0);
}

std::pair<double, double> theoretical_spectrum(const SdeParams& p,
                                               double f) {
    if (!(f > 0.0)) {
        throw std::domain_error("theoretical_spectrum: f must be > 0");
    }
    const double beta = spectral_exponent(p);
    const double amp = spectral_amplitude(p);
    return {beta, amp / std::pow(f, beta)};
}

PowerLawFit fit_power_law(const SpectrumEstimate& spec, double f_lo,
                          double f_hi, std::size_t bins_per_decade) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) {
        throw std::invalid_argument("fit_power_law: need 0 < f_lo < f_hi");
    }
    std::size_t inside = 0;
    for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
        if (spec.freqs[i] >= f_lo && spec.freqs[i] <= f_hi &&
            spec.power[i] > 0.0) {
            ++inside;
        }
    }
    if (inside < 10) {
        throw std::invalid_argument(
            "fit_power_law: fewer than 10 frequency bins in range");
    }

    // Equal-width bins in log10(f); each log bin contributes one point
    // (mean log f, mean log S), so high frequencies are not over-weighted.
    const double lg_lo = std::log10(f_lo);
    const double lg_hi = std::log10(f_hi);
    const std::size_t n_log_bins = std::max<std::size_t>(
        2, static_cast<std::size_t>(
               std::ceil((lg_hi - lg_lo) * double(bins_per_decade))));
    std::vector<double> sum_lf(n_log_bins, 0.0), sum_ls(n_log_bins, 0.0);
    std::vector<std::size_t> counts(n_log_bins, 0);
    for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
        const double f = spec.freqs[i];
        if (f < f_lo || f > f_hi || !(spec.power[i] > 0.0)) continue;
        auto bin = static_cast<std::size_t>((std::log10(f) - lg_lo) /
                                            (lg_hi - lg_lo) *
                                            double(n_log_bins));
        bin = std::min(bin, n_log_bins - 1);
        sum_lf[bin] += std::log10(f);
        sum_ls[bin] += std::log10(spec.power[i]);
        ++counts[bin];
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    std::vector<std::pair<double, double>> points;
    for (std::size_t b = 0; b < n_log_bins; ++b) {
        if (counts[b] == 0) continue;
        const double x = sum_lf[b] / double(counts[b]);
        const double y = sum_ls[b] / double(counts[b]);
        points.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) {
        throw std::invalid_argument(
            "fit_power_law: not enough populated log bins");
    }
    const double denom = double(m) * sxx - sx * sx;
    const double slope = (double(m) * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / double(m);

    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = y - (intercept + slope * x);
        ss += r * r;
    }

    PowerLawFit fit;
    fit.exponent = -slope;
    fit.amplitude = std::pow(10.0, intercept);
    fit.f_lo = f_lo;
    fit.f_hi = f_hi;
    fit.residual = std::sqrt(ss / double(m));
    return fit;
}

std::vector<PdfPoint> weighted_pdf(std::span<const double> values,
                                   std::span<const double> weights,
                                   const PdfBinning& binning) {
    if (values.empty()) {
        throw std::invalid_argument("weighted_pdf: empty input");
    }
    if (!weights.empty() && weights.size() != values.size()) {
        throw std::invalid_argument(
            "weighted_pdf: weights/values size mismatch");
    }
    if (binning.n_bins == 0) {
        throw std::invalid_argument("weighted_pdf: n_bins must be >= 1");
    }

    std::vector<double> xs;
    xs.reserve(values.size());
    for (double v : values) {
        xs.push_back(binning.absolute ? std::abs(v) : v);
    }

    double lo = binning.lo, hi = binning.hi;
    if (!(hi > lo)) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (double v : xs) {
            if (binning.log_bins && !(v > 0.0)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) {
            throw std::invalid_argument(
                "weighted_pdf: degenerate value range");
        }
    }
    if (binning.log_bins && !(lo > 0.0)) {
        throw std::invalid_argument(
            "weighted_pdf: log binning needs a positive lower edge");
    }

    std::vector<double> edges(binning.n_bins + 1);
    for (std::size_t b = 0; b <= binning.n_bins; ++b) {
        const double frac = double(b) / double(binning.n_bins);
        edges[b] = binning.log_bins
                       ? lo * std::pow(hi / lo, frac)
                       : lo + (hi - lo) * frac;
    }

    std::vector<double> mass(binning.n_bins, 0.0);
    std::vector<std::size_t> counts(binning.n_bins, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        total += w;
        const double v = xs[i];
        if (v < lo || v > hi) continue;
        if (binning.log_bins && !(v > 0.0)) continue;
        double pos = binning.log_bins
                         ? std::log(v / lo) / std::log(hi / lo)
                         : (v - lo) / (hi - lo);
        auto bin = static_cast<std::size_t>(pos * double(binning.n_bins));
        bin = std::min(bin, binning.n_bins - 1);
        mass[bin] += w;
        ++counts[bin];
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("weighted_pdf: total weight is zero");
    }

    std::vector<PdfPoint> out;
    out.reserve(binning.n_bins);
    for (std::size_t b = 0; b < binning.n_bins; ++b) {
        const double width = edges[b + 1] - edges[b];
        const double center = binning.log_bins
                                  ? std::sqrt(edges[b] * edges[b + 1])
                                  : 0.5 * (edges[b] + edges[b + 1]);
        out.push_back({center, mass[b] / (total * width), counts[b]});
    }
    return out;
}

std::vector<PdfPoint> estimate_pdf(const ReturnSeries& series,
                                   const PdfBinning& binning) {
    return weighted_pdf(series.values, {}, binning);
}

std::vector<PdfPoint> trajectory_pdf(const Trajectory& traj,
                                     const PdfBinning& binning) {
    if (traj.values.size() < 2) {
        throw std::invalid_argument("trajectory_pdf: too few samples");
    }
    // Each value x_k is held over [t_k, t_{k+1}); weight by the duration.
    std::vector<double> weights(traj.values.size() - 1);
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        weights[k] = traj.times[k + 1] - traj.times[k];
    }
    return weighted_pdf(
        std::span<const double>(traj.values.data(), traj.values.size() - 1),
        weights, binning);
}

ReturnSeries moving_average(const ReturnSeries& series, std::size_t n) {
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument(
            "moving_average: window must be even and >= 2");
    }
    if (series.values.size() < n) {
        throw std::invalid_argument(
            "moving_average: window exceeds series length");
    }
    const auto& v = series.values;
    ReturnSeries out;
    out.dt = series.dt;
    out.meta = series.meta;
    out.values.reserve(v.size() - n + 1);
    // Window at index t covers {t - n/2, ..., t + n/2 - 1}.
    double acc = std::accumulate(v.begin(), v.begin() + n, 0.0);
    out.values.push_back(acc / double(n));
    for (std::size_t start = 1; start + n <= v.size(); ++start) {
        acc += v[start + n - 1] - v[start - 1];
        out.values.push_back(acc / double(n));
    }
    return out;
}

double correlate(const ReturnSeries& a, const ReturnSeries& b) {
    const std::size_t n = a.values.size();
    if (n != b.values.size() || n < 2) {
        throw std::invalid_argument(
            "correlate: series must have equal length >= 2");
    }
    const double ma = sample_mean(a.values);
    const double mb = sample_mean(b.values);
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.values[i] - ma;
        const double db = b.values[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw std::invalid_argument("correlate: zero-variance input");
    }
    return sab / std::sqrt(saa * sbb);
}

double tail_exponent_hill(std::span<const double> values,
                          double top_fraction) {
    if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
        throw std::invalid_argument(
            "tail_exponent_hill: top_fraction in (0, 1] required");
    }
    std::vector<double> mags;
    mags.reserve(values.size());
    for (double v : values) {
        const double m = std::abs(v);
        if (m > 0.0) mags.push_back(m);
    }
    const auto k = static_cast<std::size_t>(
        std::floor(double(mags.size()) * top_fraction));
    if (k < 2 || k >= mags.size()) {
        throw std::invalid_argument(
            "tail_exponent_hill: too few tail samples");
    }
    std::nth_element(mags.begin(), mags.begin() + k, mags.end(),
                     std::greater<>());
    const double x_k = mags[k];
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        s += std::log(mags[i] / x_k);
    }
    // Hill index alpha estimates the survival exponent; the density
    // falls off one power faster.
    return double(k) / s + 1.0;
}

}  // namespace qsde
