#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qsde/qgaussian.hpp"
#include "qsde/sde.hpp"
#include "qsde/series.hpp"

namespace qsde {

struct ModulationLine {
    double intercept = 1.0;
    double slope = 2.5;
};

// Double-stochastic return model: the two-power SDE provides a slowly
// diffusing background X which sets the scale of per-minute q-Gaussian
// fluctuations through r0(X) = intercept + slope * |X|.
struct ReturnModelParams {
    SdeParams sde;          // background process coefficients
    SolverConfig solver;    // background integration settings
    double lambda2 = 5.0;   // exponent of the fast fluctuation layer
    double r0_bar = 0.2;    // background scale multiplying X
    double tau = 1e-4;      // scaled-time length of one minute
    std::size_t ma_window = 60;
    ModulationLine modulation;

    static ReturnModelParams preset_defaults();
    void validate() const;
};

double modulation_scale(double ma_value, const ReturnModelParams& params);

// Simulates the background SDE, integrates it into per-minute windows
// X_m (scaled by r0_bar), and draws each minute's return from the
// q-Gaussian with scale r0(X_m). Deterministic per seed.
ReturnSeries generate_returns(const ReturnModelParams& params,
                              std::size_t n_minutes, std::uint64_t seed);

// As generate_returns, but also returns the per-minute modulator X_m.
struct GeneratedReturns {
    ReturnSeries returns;
    std::vector<double> modulator;
};
GeneratedReturns generate_returns_with_modulator(
    const ReturnModelParams& params, std::size_t n_minutes,
    std::uint64_t seed);

// Divides by the sample standard deviation (unit sample variance out).
ReturnSeries normalize_returns(const ReturnSeries& series);

struct DecompositionBin {
    double ma_center = 0.0;   // mean |MA| of the bin
    double r0_fit = 0.0;      // maximum-likelihood q-Gaussian scale
    std::size_t count = 0;
    bool underpopulated = false;  // fewer than 1000 points
};

struct DecompositionResult {
    std::vector<DecompositionBin> bins;
    ModulationLine fitted;  // weighted regression of r0 on |MA|
};

// Empirical analogue of the modulation line: moving-average the series,
// group returns into equal-population |MA| bins, fit the q-Gaussian
// scale per bin at fixed lambda2, and regress the fitted scales on |MA|.
DecompositionResult decompose_empirical(const ReturnSeries& series,
                                        std::size_t ma_window,
                                        double lambda2,
                                        std::size_t n_bins = 20);

// Maximum-likelihood scale of a q-Gaussian with fixed exponent lambda.
double fit_qgaussian_scale(std::span<const double> values, double lambda);

struct Tick {
    double timestamp;  // epoch seconds
    double price;
};

// Sums tick-by-tick log returns into fixed-duration bars. A bar's return
// is log(last/first) over trades inside the bar; empty bars carry 0.
// Also emits trade counts per bar.
ReturnSeries aggregate_ticks(const std::vector<Tick>& ticks,
                             double bar_seconds);

}  // namespace qsde
