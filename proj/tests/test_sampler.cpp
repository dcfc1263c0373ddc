#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "entrogas/sampler.hpp"
#include "oracles.hpp"

using namespace entrogas;

namespace {

// composite Simpson on [a, b] with 2k panels
template <class F>
double simpson(F f, double a, double b, int k = 2000)
{
    const double h = (b - a) / (2 * k);
    double s = f(a) + f(b);
    for (int i = 1; i < 2 * k; ++i)
        s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

// Marchenko-Pastur CDF via x = s^2, which removes the 1/sqrt(x) edge
double mp_cdf_quad(double x)
{
    if (x <= 0) return 0;
    if (x >= 4) return 1;
    return simpson([](double s) { return std::sqrt(4 - s * s) / std::numbers::pi; }, 0, std::sqrt(x));
}

double semicircle_cdf_quad(double x, double beta)
{
    const double r = std::sqrt(2 / beta);
    if (x <= 1 - r) return 0;
    if (x >= 1 + r) return 1;
    // x = 1 - r cos(theta) flattens the square-root edge
    const double th = std::acos((1 - x) / r);
    return simpson([&](double t) { return beta / std::numbers::pi * r * r * std::sin(t) * std::sin(t); }, 0, th);
}

} // namespace

TEST_CASE("reference cdfs against quadrature")
{
    for (double x : {0.01, 0.3, 1.0, 2.2, 3.9})
        CHECK(std::abs(wishart_cdf(x) - mp_cdf_quad(x)) < 1e-10);
    CHECK(wishart_cdf(-1) == 0.0);
    CHECK(wishart_cdf(5) == 1.0);
    for (double x : {0.4, 0.8, 1.0, 1.3, 1.6})
        CHECK(std::abs(semicircle_cdf(x, 4) - semicircle_cdf_quad(x, 4)) < 1e-10);
    CHECK_THROWS_AS(semicircle_cdf(1, 0), Error);
}

TEST_CASE("sample_induced")
{
    const auto q = sample_induced(2, 100000, 3);
    double mean = 0;
    for (const auto& s : q)
        mean += purity(s);
    mean /= q.size();
    CHECK(std::abs(mean - oracle::mean_purity_qubit()) < 0.005);
    CHECK(std::abs(oracle::mean_purity_qubit() - 0.8) < 1e-6);

    const auto big = sample_induced(64, 1500, 7);
    for (const auto& s : big) {
        CHECK(s.n() == 64);
        CHECK(std::abs(std::accumulate(s.values().begin(), s.values().end(), 0.0) - 1) < 1e-12);
        CHECK(s.min() >= 0);
    }
    const auto st = spectra_stats(big, 0, 5, 100);
    CHECK(st.histogram.total() == 1500 * 64);
    CHECK(ks_distance(st.histogram, mp_cdf_quad) < 0.05);

    // per-draw streams make the output independent of the worker count
    const auto a = sample_induced(8, 50, 11, 1), b = sample_induced(8, 50, 11, 3);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].values() == b[i].values());
    CHECK(sample_induced(8, 1, 12)[0].values() != a[0].values());
    CHECK_THROWS_AS(sample_induced(1, 10, 0), Error);
    CHECK_THROWS_AS(sample_induced(4, 0, 0), Error);
}

TEST_CASE("metropolis matches Wishart and the induced measure at beta = 0")
{
    MetropolisConfig c;
    c.n = 64;
    c.sweeps = 4000;
    c.chains = 2;
    c.seed = 5;
    const auto m = metropolis_run(c);
    CHECK(m.histogram.total() == m.samples * 64);
    CHECK(m.samples == 2 * (4000 - 800));
    CHECK(ks_distance(m.histogram, mp_cdf_quad) < 0.05);
    const auto ind = spectra_stats(sample_induced(64, 800, 9), 0, 5, 100);
    CHECK(ks_distance(m.histogram, ind.histogram) < 0.05);
    CHECK(m.acceptance >= 0.3);
    CHECK(m.acceptance <= 0.5);
    CHECK(m.weight_drift < 1e-8);
    CHECK(m.trace_error < 1e-12);
    // mean purity of the induced measure is 2n / (n^2 + 1)
    CHECK(std::abs(m.purity_mean - 128.0 / 4097.0) < 5e-4);
}

TEST_CASE("metropolis semicircle at beta = 4")
{
    const auto m = metropolis_run(64, 4.0, 3, 4000, 2);
    CHECK(ks_distance(m.histogram, [](double x) { return semicircle_cdf_quad(x, 4.0); }) < 0.07);
    CHECK(ks_distance(m.histogram, mp_cdf_quad) > 0.1);
}

TEST_CASE("detailed balance at n = 3")
{
    // marginal of one eigenvalue under Vandermonde^2 on the 2-simplex, by brute-force grid
    const int g = 600;
    std::vector<double> marg(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double a = (i + 0.5) / g, b = (j + 0.5) / g, c = 1 - a - b;
            if (c <= 0) continue;
            const double v = (a - b) * (a - c) * (b - c);
            marg[i] += v * v;
        }
    const double tot = std::accumulate(marg.begin(), marg.end(), 0.0);
    auto cdf = [&](double x) {
        const double lam = x / 3;
        double s = 0;
        for (int i = 0; i < g && (i + 1.0) / g <= lam + 1e-12; ++i)
            s += marg[i];
        return s / tot;
    };
    MetropolisConfig c;
    c.n = 3;
    c.sweeps = 200000;
    c.seed = 4;
    c.hist_lo = 0;
    c.hist_hi = 3;
    c.bins = 30;
    const auto m = metropolis_run(c);
    CHECK(m.histogram.underflow == 0);
    CHECK(m.histogram.overflow == 0);
    CHECK(ks_distance(m.histogram, cdf) < 0.01);
}

TEST_CASE("evaporation of the largest eigenvalue")
{
    double prev = 0;
    for (double b : {-1.0, -2.5, -4.0}) {
        MetropolisConfig c;
        c.n = 16;
        c.beta = b;
        c.alpha = 2;
        c.sweeps = 6000;
        c.hist_hi = 16;
        const auto m = metropolis_run(c);
        CHECK(m.max_mean > prev);
        prev = m.max_mean;
    }
    CHECK(prev > 0.8);
}

TEST_CASE("metropolis determinism and validation")
{
    MetropolisConfig c;
    c.n = 10;
    c.sweeps = 500;
    c.chains = 3;
    c.seed = 8;
    c.threads = 1;
    const auto a = metropolis_run(c);
    c.threads = 3;
    const auto b = metropolis_run(c);
    CHECK(a.histogram.counts == b.histogram.counts);
    CHECK(a.purity_mean == b.purity_mean);
    c.seed = 9;
    CHECK(metropolis_run(c).histogram.counts != a.histogram.counts);
    c.alpha = 4;
    CHECK_THROWS_AS(metropolis_run(c), Error);
    c.alpha = 3;
    c.sweeps = 0;
    CHECK_THROWS_AS(metropolis_run(c), Error);
}

TEST_CASE("ks_distance")
{
    // draws from the reference by inverse transform of the angle variable
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    Histogram h(0, 5, 100);
    for (int i = 0; i < 100000; ++i) {
        const double p = u(rng);
        double lo = 0, hi = std::numbers::pi / 2;
        for (int k = 0; k < 60; ++k) {
            const double t = 0.5 * (lo + hi);
            ((2 * t + std::sin(2 * t)) / std::numbers::pi < p ? lo : hi) = t;
        }
        h.add(4 * std::sin(lo) * std::sin(lo));
    }
    CHECK(ks_distance(h, mp_cdf_quad) < 0.01);

    Histogram one(0, 2, 1);
    for (int i = 0; i < 10; ++i)
        one.add(1.0);
    CHECK(ks_distance(one, wishart_cdf) == doctest::Approx(1 - wishart_cdf(2.0)).epsilon(1e-14));

    // semicircle samples against the Wishart reference
    Histogram sc(0, 5, 100);
    for (int i = 0; i < 100000; ++i) {
        const double p = u(rng);
        double lo = 0, hi = 2;
        for (int k = 0; k < 60; ++k) {
            const double t = 0.5 * (lo + hi);
            (semicircle_cdf(t, 4) < p ? lo : hi) = t;
        }
        sc.add(lo);
    }
    CHECK(ks_distance(sc, wishart_cdf) > 0.1);
    CHECK(ks_distance(sc, h) > 0.1);

    CHECK_THROWS_AS(ks_distance(Histogram(0, 1, 4), wishart_cdf), Error);
    CHECK_THROWS_AS(ks_distance(Histogram(0, 1, 4), Histogram(0, 1, 5)), Error);
}
