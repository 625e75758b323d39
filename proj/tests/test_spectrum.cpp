#include "qsde/spectrum.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qsde/qgaussian.hpp"

using namespace qsde;

namespace {

ReturnSeries white_noise(std::size_t n, std::uint64_t seed) {
    ReturnSeries s;
    s.dt = 1.0;
    Rng rng(seed);
    s.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(rng.normal());
    return s;
}

double series_variance(const ReturnSeries& s) {
    double mean = 0.0;
    for (double v : s.values) mean += v;
    mean /= double(s.values.size());
    double var = 0.0;
    for (double v : s.values) var += (v - mean) * (v - mean);
    return var / double(s.values.size());
}

}  // namespace

TEST_CASE("white noise gives a flat spectrum at the white level") {
    const auto s = white_noise(1 << 20, 3);
    const auto psd = estimate_psd(s, 64);
    // One-sided white level: 2 sigma^2 dt.
    double mean_power = 0.0;
    for (double p : psd.power) mean_power += p;
    mean_power /= double(psd.power.size());
    CHECK(mean_power == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Parseval: integrated spectrum equals the variance") {
    const auto s = white_noise(1 << 18, 9);
    for (Taper taper : {Taper::Hann, Taper::Rectangular}) {
        const auto psd = estimate_psd(s, 32, taper);
        const double df = psd.freqs[1] - psd.freqs[0];
        double total = 0.0;
        for (double p : psd.power) total += p * df;
        CHECK(total == doctest::Approx(series_variance(s)).epsilon(0.03));
    }
}

TEST_CASE("sinusoid peaks at its frequency") {
    ReturnSeries s;
    s.dt = 1.0;
    const double f0 = 0.125;
    for (std::size_t i = 0; i < (1 << 14); ++i) {
        s.values.push_back(std::sin(2.0 * M_PI * f0 * double(i)));
    }
    const auto psd = estimate_psd(s, 8);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < psd.power.size(); ++k) {
        if (psd.power[k] > psd.power[peak]) peak = k;
    }
    CHECK(psd.freqs[peak] == doctest::Approx(f0).epsilon(0.01));
}

TEST_CASE("estimate_psd rejects too-short input") {
    const auto s = white_noise(16, 1);
    CHECK_THROWS_AS(estimate_psd(s, 16), std::invalid_argument);
}

TEST_CASE("closed-form spectrum") {
    SdeParams p;
    p.eta = 2.5;
    p.lambda = 3.6;
    CHECK(spectral_exponent(p) == doctest::Approx(1.2));
    CHECK(spectral_amplitude(p) == doctest::Approx(0.417).epsilon(0.005));
    const auto [beta, s1] = theoretical_spectrum(p, 10.0);
    CHECK(beta == doctest::Approx(1.2));
    CHECK(s1 == doctest::Approx(spectral_amplitude(p) / std::pow(10.0, 1.2)));

    SdeParams unit = p;
    unit.lambda = 3.0;
    CHECK(spectral_exponent(unit) == doctest::Approx(1.0));

    SdeParams bad = p;
    bad.lambda = 9.0;  // above 1 + 2 eta
    CHECK_THROWS_AS(spectral_exponent(bad), std::domain_error);
    CHECK_THROWS_AS(theoretical_spectrum(p, 0.0), std::domain_error);
}

TEST_CASE("fit_power_law recovers exact power laws") {
    SpectrumEstimate spec;
    for (double f = 0.01; f <= 10.0; f *= 1.05) {
        spec.freqs.push_back(f);
        spec.power.push_back(std::pow(f, -1.5));
    }
    const auto fit = fit_power_law(spec, 0.01, 10.0);
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(fit.amplitude == doctest::Approx(1.0).epsilon(1e-8));

    for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
        spec.power[i] = 3.0 / spec.freqs[i];
    }
    const auto fit2 = fit_power_law(spec, 0.01, 10.0);
    CHECK(fit2.exponent == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit2.amplitude == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("fit_power_law recovers the closed-form spectrum") {
    SdeParams p;
    p.eta = 2.5;
    p.lambda = 3.6;
    SpectrumEstimate spec;
    for (double f = 1e-3; f <= 1e2; f *= 1.03) {
        const auto [beta, s] = theoretical_spectrum(p, f);
        (void)beta;
        spec.freqs.push_back(f);
        spec.power.push_back(s);
    }
    const auto fit = fit_power_law(spec, 1e-3, 1e2);
    CHECK(fit.exponent == doctest::Approx(spectral_exponent(p)).epsilon(1e-8));
    CHECK(fit.amplitude ==
          doctest::Approx(spectral_amplitude(p)).epsilon(1e-8));
}

TEST_CASE("fit_power_law needs enough bins") {
    SpectrumEstimate spec;
    for (double f = 1.0; f <= 5.0; f += 1.0) {
        spec.freqs.push_back(f);
        spec.power.push_back(1.0 / f);
    }
    CHECK_THROWS_AS(fit_power_law(spec, 1.0, 5.0), std::invalid_argument);
}

TEST_CASE("uniform draws give unit density") {
    ReturnSeries s;
    Rng rng(17);
    for (int i = 0; i < 1'000'000; ++i) s.values.push_back(rng.uniform());
    PdfBinning binning;
    binning.n_bins = 10;
    binning.lo = 0.0;
    binning.hi = 1.0;
    const auto pdf = estimate_pdf(s, binning);
    REQUIRE(pdf.size() == 10);
    for (const auto& p : pdf) {
        CHECK(p.density == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("histogram of q-Gaussian samples matches the density") {
    const QGaussianParams qp(5.0, 1.0);
    ReturnSeries s;
    Rng rng(8);
    s.values = sample_qgaussian(qp, rng, 1'000'000);
    PdfBinning binning;
    binning.n_bins = 40;
    binning.lo = -4.0;
    binning.hi = 4.0;
    const auto pdf = estimate_pdf(s, binning);
    for (const auto& p : pdf) {
        if (p.count < 5000) continue;
        CHECK(p.density ==
              doctest::Approx(qgaussian_pdf(p.center, qp)).epsilon(0.05));
    }
}

TEST_CASE("log-binned absolute-value density integrates to ~1") {
    const QGaussianParams qp(3.6, 1.0);
    ReturnSeries s;
    Rng rng(21);
    s.values = sample_qgaussian(qp, rng, 200'000);
    PdfBinning binning;
    binning.n_bins = 60;
    binning.log_bins = true;
    binning.absolute = true;
    const auto pdf = estimate_pdf(s, binning);
    // Reconstruct edges from geometric centers to integrate.
    double total = 0.0;
    const double ratio = pdf[1].center / pdf[0].center;
    for (const auto& p : pdf) {
        const double width = p.center * (std::sqrt(ratio) - 1.0 / std::sqrt(ratio));
        total += p.density * width;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("estimate_pdf rejects empty input") {
    ReturnSeries s;
    CHECK_THROWS_AS(estimate_pdf(s, PdfBinning{}), std::invalid_argument);
}

TEST_CASE("moving average windows") {
    ReturnSeries s;
    s.values = {1.0, 2.0, 3.0, 4.0};
    const auto ma = moving_average(s, 2);
    REQUIRE(ma.values.size() == 3);
    CHECK(ma.values[0] == doctest::Approx(1.5));
    CHECK(ma.values[1] == doctest::Approx(2.5));
    CHECK(ma.values[2] == doctest::Approx(3.5));

    ReturnSeries constant;
    constant.values.assign(100, 4.2);
    for (double v : moving_average(constant, 10).values) {
        CHECK(v == doctest::Approx(4.2));
    }

    CHECK_THROWS_AS(moving_average(s, 3), std::invalid_argument);
    CHECK_THROWS_AS(moving_average(s, 6), std::invalid_argument);
}

TEST_CASE("moving average is linear") {
    Rng rng(4);
    ReturnSeries a, b;
    for (int i = 0; i < 500; ++i) {
        a.values.push_back(rng.normal());
        b.values.push_back(rng.normal());
    }
    const double alpha = 2.5;
    ReturnSeries combo;
    for (int i = 0; i < 500; ++i) {
        combo.values.push_back(alpha * a.values[i] + b.values[i]);
    }
    const auto ma_combo = moving_average(combo, 20);
    const auto ma_a = moving_average(a, 20);
    const auto ma_b = moving_average(b, 20);
    for (std::size_t i = 0; i < ma_combo.values.size(); ++i) {
        CHECK(ma_combo.values[i] ==
              doctest::Approx(alpha * ma_a.values[i] + ma_b.values[i]));
    }
}

TEST_CASE("correlation coefficient") {
    ReturnSeries a = white_noise(10'000, 13);
    ReturnSeries b = a;
    CHECK(correlate(a, b) == doctest::Approx(1.0));
    for (double& v : b.values) v = -v;
    CHECK(correlate(a, b) == doctest::Approx(-1.0));
    const ReturnSeries c = white_noise(10'000, 14);
    CHECK(std::abs(correlate(a, c)) < 0.05);

    ReturnSeries flat;
    flat.values.assign(100, 1.0);
    CHECK_THROWS_AS(correlate(a, flat), std::invalid_argument);
    ReturnSeries shorter = a;
    shorter.values.resize(10);
    CHECK_THROWS_AS(correlate(a, shorter), std::invalid_argument);
}

TEST_CASE("Hill estimator on Pareto samples") {
    // Survival exponent alpha = 3 => density exponent 4.
    Rng rng(99);
    std::vector<double> draws;
    for (int i = 0; i < 1'000'000; ++i) {
        draws.push_back(std::pow(rng.uniform(), -1.0 / 3.0));
    }
    CHECK(tail_exponent_hill(draws, 0.01) == doctest::Approx(4.0).epsilon(0.05));
    CHECK_THROWS_AS(tail_exponent_hill(draws, 0.0), std::invalid_argument);
}

TEST_CASE("integration preserves the low-frequency spectrum") {
    SdeParams p;
    p.eta = 2.5;
    p.lambda = 3.6;
    p.epsilon = 0.01;
    SolverConfig cfg;
    cfg.seed = 6;
    cfg.burn_in = 100'000;
    cfg.max_steps = 4'000'000;
    const Trajectory traj = simulate(p, cfg);
    const ReturnSeries fine = integrate_window(traj, 1e-4);
    const ReturnSeries coarse = integrate_window(traj, 1e-3);
    ReturnSeries fine_abs = fine, coarse_abs = coarse;
    for (double& v : fine_abs.values) v = std::abs(v);
    for (double& v : coarse_abs.values) v = std::abs(v);
    const auto psd_fine = estimate_psd(fine_abs, 16);
    const auto psd_coarse = estimate_psd(coarse_abs, 16);
    // Compare slopes well below 1/tau of the coarser series.
    const double f_lo = 0.5, f_hi = 30.0;
    const auto fit_fine = fit_power_law(psd_fine, f_lo, f_hi);
    const auto fit_coarse = fit_power_law(psd_coarse, f_lo, f_hi);
    CHECK(fit_fine.exponent ==
          doctest::Approx(fit_coarse.exponent).epsilon(0.2));
}
