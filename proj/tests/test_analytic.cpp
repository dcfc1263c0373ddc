#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "entrogas/analytic.hpp"
#include "oracles.hpp"

using namespace entrogas;

namespace {

const BranchKind kAll[] = {BranchKind::StableSemicircle, BranchKind::StableWishart,
                           BranchKind::SeparableSea,     BranchKind::MetaWishartProlong,
                           BranchKind::MetaTwoSidedLow,  BranchKind::MetaTwoSidedHigh,
                           BranchKind::MetaSymmetric};

double random_beta(BranchKind k, std::mt19937_64& rng)
{
    const auto& w = branch_window(k);
    double lo = w.beta_lo, hi = w.beta_hi;
    if (!std::isfinite(hi)) hi = lo + 40.0;
    if (!std::isfinite(lo)) lo = hi - 40.0;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace

TEST_CASE("delta_of_beta anchors")
{
    CHECK(delta_of_beta(2, BranchKind::StableWishart) == doctest::Approx(1).epsilon(1e-14));
    CHECK(delta_of_beta(0, BranchKind::StableWishart) == doctest::Approx(2).epsilon(1e-14));
    CHECK(delta_of_beta(-2.0 / 27.0, BranchKind::StableWishart) == doctest::Approx(3).epsilon(1e-14));
    CHECK(delta_of_beta(8, BranchKind::StableSemicircle) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(delta_of_beta(3, BranchKind::StableWishart), Error);
    CHECK_THROWS_AS(delta_of_beta(1, BranchKind::StableSemicircle), Error);
    CHECK_THROWS_AS(delta_of_beta(-0.5, BranchKind::MetaTwoSidedLow), Error);
}

TEST_CASE("Wishart inversion matches the cubic solved by Cardano")
{
    for (int i = 0; i <= 200; ++i) {
        const double beta = kBetaG + (2.0 - kBetaG) * i / 200.0;
        const double d = delta_of_beta(beta, BranchKind::StableWishart);
        const double o = oracle::cubic_delta(beta);
        // the fold at beta_g limits accuracy to sqrt(eps)
        CHECK(std::abs(d - o) < (i == 0 ? 1e-7 : 1e-9));
        CHECK(std::abs(beta * d * d * d / 4 + d / 2 - 1) < 1e-12);
    }
    CHECK(delta_of_beta(1.0, BranchKind::StableWishart) == doctest::Approx(1.1795090246).epsilon(1e-10));
}

TEST_CASE("radical form agrees away from beta = 0")
{
    for (double beta : {1.9, 1.0, 0.5, 0.02, -0.011, -0.05, -0.07}) {
        if (std::abs(beta) < 0.01) continue;
        CHECK(wishart_delta_radical(beta) ==
              doctest::Approx(delta_of_beta(beta, BranchKind::StableWishart)).epsilon(1e-8));
    }
}

TEST_CASE("beta_of_delta anchors")
{
    CHECK(beta_of_delta(3, BranchKind::StableWishart) == doctest::Approx(-2.0 / 27).epsilon(1e-15));
    CHECK(beta_of_delta(1, BranchKind::MetaSymmetric) == -2.0);
    CHECK(beta_of_delta(1, BranchKind::MetaTwoSidedHigh) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(beta_of_delta(2 + std::numbers::sqrt2, BranchKind::MetaTwoSidedLow) ==
          doctest::Approx(-1.5 + std::numbers::sqrt2).epsilon(1e-12));
    CHECK(beta_of_delta(3, BranchKind::MetaTwoSidedLow) == doctest::Approx(-2.0 / 27).epsilon(1e-15));
}

TEST_CASE("two-sided inversion round trips and is monotone")
{
    for (auto k : {BranchKind::MetaTwoSidedLow, BranchKind::MetaTwoSidedHigh}) {
        const auto& w = branch_window(k);
        double prev = NAN;
        for (int i = 0; i <= 100; ++i) {
            const double d = w.delta_lo + (w.delta_hi - w.delta_lo) * i / 100.0;
            const double b = beta_of_delta(d, k);
            if (i > 0) {
                const bool rising = b > prev;
                CHECK(rising == (k == BranchKind::MetaTwoSidedHigh));
            }
            prev = b;
            const double back = delta_of_beta(b, k);
            // sqrt singularity at the fold
            CHECK(std::abs(back - d) < (i == 100 ? 1e-6 : 1e-8));
        }
    }
}

TEST_CASE("thermo anchor values")
{
    CHECK(thermo(0, BranchKind::StableWishart).u == doctest::Approx(2).epsilon(1e-14));
    const auto w2 = thermo(2, BranchKind::StableWishart);
    const auto s2 = thermo(2, BranchKind::StableSemicircle);
    CHECK(w2.u == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(s2.u == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(w2.s == doctest::Approx(-0.25 - std::log(2.0)).epsilon(1e-14));
    CHECK(s2.s == doctest::Approx(-0.25 - std::log(2.0)).epsilon(1e-14));
    CHECK(w2.betaf == doctest::Approx(s2.betaf).epsilon(1e-14));
    CHECK(thermo(kBetaG, BranchKind::StableWishart).u == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(thermo(4, BranchKind::StableSemicircle).u == doctest::Approx(1.125).epsilon(1e-15));
    const auto sp = thermo_separable(-3.0, SeaVariant::Spike);
    const double mu = 0.5 + 0.5 * std::sqrt(1 - 2.0 / 3.0);
    CHECK(sp.u == doctest::Approx(mu * mu).epsilon(1e-14));
    CHECK(sp.s == doctest::Approx(std::log(1 - mu) - 0.5).epsilon(1e-14));
    CHECK(sp.zeta == doctest::Approx(-2 * -3.0 * mu).epsilon(1e-14));
    CHECK(sp.zeta == doctest::Approx(1 / (1 - mu)).epsilon(1e-12));
}

TEST_CASE("branch continuity at the junctions")
{
    auto same = [](const ThermoPoint& a, const ThermoPoint& b) {
        CHECK(std::abs(a.u - b.u) < 1e-10);
        CHECK(std::abs(a.s - b.s) < 1e-10);
        CHECK(std::abs(a.betaf - b.betaf) < 1e-10);
    };
    same(thermo(2, BranchKind::StableSemicircle), thermo(2, BranchKind::StableWishart));
    same(thermo(kBetaG, BranchKind::StableWishart), thermo(kBetaG, BranchKind::MetaTwoSidedLow));
    same(thermo(-2, BranchKind::MetaTwoSidedHigh), thermo(-2, BranchKind::MetaSymmetric));
    same(thermo(kBetaTurn, BranchKind::MetaTwoSidedHigh), thermo(kBetaTurn, BranchKind::MetaTwoSidedLow));
    same(thermo(0, BranchKind::MetaWishartProlong), thermo(0, BranchKind::StableWishart));
}

TEST_CASE("betaf equals beta u minus s on every branch")
{
    std::mt19937_64 rng(3);
    for (auto k : kAll)
        for (int i = 0; i < 100; ++i) {
            const auto p = thermo(random_beta(k, rng), k);
            CHECK(std::abs(p.betaf - (p.beta * p.u - p.s)) < 1e-10);
        }
    for (auto v : {SeaVariant::Bare, SeaVariant::Spike, SeaVariant::Stable})
        for (double b : {-2.0, -2.5, -7.0}) {
            const auto p = thermo_separable(b, v);
            CHECK(std::abs(p.betaf - (p.beta * p.u - p.s)) < 1e-10);
        }
}

TEST_CASE("densities normalize and have unit first moment")
{
    std::mt19937_64 rng(5);
    for (auto k : kAll)
        for (int i = 0; i < 100; ++i) {
            const auto p = thermo(random_beta(k, rng), k);
            // numerators are polynomials of degree <= 3 in x
            auto num = [&](double x) { return density(p, x) * std::sqrt(1 - x * x); };
            const double norm = oracle::chebyshev_integral(num);
            const double first = oracle::chebyshev_integral([&](double x) { return (p.m + p.delta * x) * num(x); });
            CHECK(std::abs(norm - 1) < 1e-8);
            CHECK(std::abs(first - 1) < 1e-8);
            const double qn = integrate_arcsine(num);
            CHECK(std::abs(qn - 1) < 1e-8);
            for (int j = -99; j <= 99; ++j) CHECK(density(p, j / 100.0) >= -1e-12);
        }
}

TEST_CASE("density anchors")
{
    CHECK(density(thermo(2, BranchKind::StableSemicircle), 0) == doctest::Approx(2 / std::numbers::pi));
    CHECK(density(thermo(0, BranchKind::StableWishart), 0) == doctest::Approx(1 / std::numbers::pi));
    CHECK(density(thermo_separable(-1, SeaVariant::Bare), 0) == doctest::Approx(1 / std::numbers::pi));
    CHECK(density(thermo(-3, BranchKind::MetaSymmetric), 0) == 0.0);
    const auto g = thermo(kBetaG, BranchKind::StableWishart);
    for (double x : {0.5, 0.9, 0.999}) {
        const double ref = 2 / (3 * std::numbers::pi) * std::sqrt(std::pow(1 - x, 3) / (1 + x));
        CHECK(density(g, x) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK_THROWS_AS(density(g, 1.0), Error);
}

TEST_CASE("detached eigenvalue and critical set")
{
    CHECK(mu_of_beta(-2) == 0.5);
    CHECK(mu_of_beta(-1e12) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(mu_of_beta(-1.5), Error);
    const auto cs = critical_points();
    CHECK(cs.beta_plus == 2.0);
    CHECK(cs.beta_g == -2.0 / 27.0);
    CHECK(std::abs(cs.mu_minus - 0.71533) < 1e-4);
    CHECK(std::abs(cs.beta_minus + 2.45541) < 1e-4);
    CHECK(std::abs(cs.beta_minus + 1 / (2 * cs.mu_minus * (1 - cs.mu_minus))) < 1e-10);
    CHECK(std::abs(mu_of_beta(cs.beta_minus) - cs.mu_minus) < 1e-8);
}

TEST_CASE("first-order transition ordering and latent heat")
{
    const auto cs = critical_points();
    for (double b : {-2.46, -3.0, -5.0, -20.0})
        CHECK(thermo_separable(b, SeaVariant::Spike).betaf < 0.5);
    for (double b : {-2.0, -2.2, -2.45})
        CHECK(thermo_separable(b, SeaVariant::Spike).betaf > 0.5);
    const double sl = std::log(1 - cs.mu_minus) - 0.5, sr = -0.5;
    const double ul = cs.mu_minus * cs.mu_minus, ur = 0.0;
    CHECK(std::abs((sl - sr) / (ul - ur) - cs.beta_minus) < 1e-8);
    CHECK(std::abs(sl + 1.75643) < 1e-5);
    CHECK(thermo_separable(-3.0).mu.has_value());
    CHECK(!thermo_separable(-2.2).mu.has_value());
}

TEST_CASE("entropy of energy")
{
    CHECK(entropy_of_energy(1.25, EnergyRegime::ScaledByN) == doctest::Approx(-std::log(2.0) - 0.25));
    CHECK(entropy_of_energy(std::nextafter(1.25, 2.0), EnergyRegime::ScaledByN) ==
          doctest::Approx(-std::log(2.0) - 0.25));
    CHECK(entropy_of_energy(2, EnergyRegime::ScaledByN) == doctest::Approx(-0.5).epsilon(1e-14));
    const auto cs = critical_points();
    const double u0 = cs.mu_minus * cs.mu_minus;
    CHECK(entropy_of_energy(u0, EnergyRegime::Finite) == doctest::Approx(std::log(1 - cs.mu_minus) - 0.5));
    auto s = [](double u) { return entropy_of_energy(u, EnergyRegime::Finite); };
    const double h = 1e-5;
    // second-order one-sided differences
    const double dl = (3 * s(u0) - 4 * s(u0 - h) + s(u0 - 2 * h)) / (2 * h);
    const double dr = (-3 * s(u0) + 4 * s(u0 + h) - s(u0 + 2 * h)) / (2 * h);
    CHECK(std::abs(s(u0) - s(std::nextafter(u0, 0.0))) < 1e-12);
    CHECK(std::abs(dl - dr) < 1e-6);
    CHECK_THROWS_AS(entropy_of_energy(0.5, EnergyRegime::ScaledByN), Error);
    CHECK_THROWS_AS(entropy_of_energy(1.0, EnergyRegime::Finite), Error);
}

TEST_CASE("entropy and volume of purity")
{
    const auto cs = critical_points();
    for (int n : {10, 50, 1000}) {
        CHECK(entropy_of_purity(2.0 / n, n) == doctest::Approx(cs.beta_minus * 2.0 / n - 0.5));
        CHECK(std::abs(entropy_of_purity(std::nextafter(2.0 / n, 0.0), n) + 0.5) < 1e-9);
        CHECK(entropy_of_purity(cs.mu_minus * cs.mu_minus, n) ==
              doctest::Approx(std::log(1 - cs.mu_minus) - 0.5).epsilon(1e-12));
    }
    CHECK(entropy_of_purity(1 - 1e-12, 10) < -10);
    CHECK_THROWS_AS(entropy_of_purity(0.05, 10), Error);
    CHECK(volume_of_purity(2.0 / 50, 50) == doctest::Approx(2500 * (cs.beta_minus * 2 / 50 - 0.5)));
    const double p0 = cs.mu_minus * cs.mu_minus;
    CHECK(std::abs(volume_of_purity(std::nextafter(p0, 0.0), 50) - volume_of_purity(p0, 50)) < 1e-9 * 2500);
    // the largest log-volume on a fine grid sits at the typical purity 2/n
    double best = -1e300, arg = 0;
    for (int i = 1; i < 20000; ++i) {
        const double p = 1.0 / 50 + (1 - 1.0 / 50) * i / 20000.0;
        const double v = volume_of_purity(p, 50);
        if (v > best) best = v, arg = p;
    }
    CHECK(std::abs(arg - 2.0 / 50) < 1e-4);
}

TEST_CASE("extreme eigenvalues")
{
    for (int n : {4, 50}) {
        auto [lo, hi] = lambda_extremes(1.25 / n, n);
        CHECK(std::abs(lo) < 1e-15);
        CHECK(lambda_extremes(2.0 / n, n).second == doctest::Approx(4.0 / n));
        CHECK(lambda_extremes(1.0 / n, n).first == doctest::Approx(1.0 / n));
        for (int i = 0; i < 100; ++i) {
            const double p = 1.0 / n + (1 - 1.0 / n) * i / 100.0;
            CHECK((lambda_extremes(p, n).first > 0) == (p < 1.25 / n));
        }
        (void)hi;
    }
    CHECK(lambda_extremes(0.64, 10).second == doctest::Approx(0.8));
    CHECK_THROWS_AS(lambda_extremes(1.0, 10), Error);
}

TEST_CASE("planar map series matches the closed-form count")
{
    const auto s = planar_map_series(9);
    const std::vector<std::int64_t> expect{2, 1, 2, 6, 22, 91, 408, 1938, 9614, 49335};
    CHECK(s == expect);
    CHECK(planar_map_series(0) == std::vector<std::int64_t>{2});
    const auto t = planar_map_series(16);
    for (int k = 0; k <= 16; ++k) CHECK(t[k] == oracle::nonseparable_maps(k));
    CHECK_THROWS_AS(planar_map_series(17), Error);
}

TEST_CASE("expansion near beta_plus")
{
    const auto r = critical_expansion_check(CriticalSide::BetaPlus);
    CHECK(std::abs(r.first_derivative_jump) < 1e-6);
    CHECK(std::abs(r.second_derivative_jump - 0.125) < 1e-3);
}

TEST_CASE("expansion near beta_g")
{
    const auto r = critical_expansion_check(CriticalSide::BetaG);
    const double c = 81 * std::numbers::sqrt2 / 5;
    CHECK(std::abs(r.exponent - 2.5) < 0.05);
    CHECK(std::abs(r.coefficient + c) < 0.02 * c);
    CHECK(std::abs(r.exponent_physical - 2.5) < 0.05);
    CHECK(std::abs(r.coefficient_physical - c) < 0.02 * c);
}

TEST_CASE("stable branch selector keeps the scaling explicit")
{
    CHECK(stable_branch(3, Scaling::Alpha3) == BranchKind::StableSemicircle);
    CHECK(stable_branch(1, Scaling::Alpha3) == BranchKind::StableWishart);
    CHECK(stable_branch(-3, Scaling::Alpha2) == BranchKind::SeparableSea);
    CHECK_THROWS_AS(stable_branch(-1, Scaling::Alpha3), Error);
    CHECK_THROWS_AS(stable_branch(1, Scaling::Alpha2), Error);
}
