#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsde/sde.hpp"
#include "qsde/series.hpp"

namespace qsde {

enum class Taper { Hann, Rectangular };

// One-sided averaged-periodogram estimate. Frequencies are in cycles per
// unit of the series' time step; the DC bin is excluded.
struct SpectrumEstimate {
    std::vector<double> freqs;
    std::vector<double> power;
    std::size_t n_segments = 0;
    std::string window_label;
};

struct PowerLawFit {
    double exponent = 0.0;   // fitted beta, S ~ A / f^beta
    double amplitude = 0.0;  // fitted A
    double f_lo = 0.0;
    double f_hi = 0.0;
    double residual = 0.0;   // rms log10 residual over the fitted bins
};

// Welch estimate over half-overlapping tapered segments.
SpectrumEstimate estimate_psd(const ReturnSeries& series,
                              std::size_t n_segments,
                              Taper taper = Taper::Hann);

// Closed-form exponent beta = 1 + (lambda-3)/(2(eta-1)) and amplitude of
// S(f) = A / f^beta; valid for eta > 1, 4-eta < lambda < 1+2 eta.
double spectral_exponent(const SdeParams& p);
double spectral_amplitude(const SdeParams& p);
std::pair<double, double> theoretical_spectrum(const SdeParams& p, double f);

// Least-squares line on (log f, log S) after equal-width log re-binning.
PowerLawFit fit_power_law(const SpectrumEstimate& spec, double f_lo,
                          double f_hi, std::size_t bins_per_decade = 20);

struct PdfBinning {
    std::size_t n_bins = 50;
    bool log_bins = false;
    bool absolute = false;
    double lo = 0.0;  // lo == hi: infer range from the data
    double hi = 0.0;
};

struct PdfPoint {
    double center;
    double density;
    std::size_t count;
};

// Normalized histogram density; sum(density * bin_width) equals the
// fraction of samples inside the binned range.
std::vector<PdfPoint> estimate_pdf(const ReturnSeries& series,
                                   const PdfBinning& binning);

// Same, with per-sample weights (used for duration-weighted trajectory
// histograms, where each value is weighted by the time it was held).
std::vector<PdfPoint> weighted_pdf(std::span<const double> values,
                                   std::span<const double> weights,
                                   const PdfBinning& binning);

// Duration-weighted density of a variable-step trajectory.
std::vector<PdfPoint> trajectory_pdf(const Trajectory& traj,
                                     const PdfBinning& binning);

// Centered mean over n points (n even), window {t-n/2, ..., t+n/2-1};
// edges trimmed, output length = input length - n + 1.
ReturnSeries moving_average(const ReturnSeries& series, std::size_t n);

// Pearson correlation coefficient.
double correlate(const ReturnSeries& a, const ReturnSeries& b);

// Density power-law exponent of the upper tail (Hill index + 1), from
// the top `top_fraction` of |values|.
double tail_exponent_hill(std::span<const double> values,
                          double top_fraction);

}  // namespace qsde
