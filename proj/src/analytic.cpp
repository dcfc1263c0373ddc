#include "entrogas/analytic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace entrogas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

[[noreturn]] void out_of_branch(BranchKind kind, double v, const char* what)
{
    throw Error(ErrorCode::OutOfBranch,
                std::string(what) + " = " + std::to_string(v) + " outside " + to_string(kind) + " window");
}

double sigma(BranchKind kind) { return kind == BranchKind::MetaTwoSidedLow ? 1.0 : -1.0; }

// beta(delta) - beta_g on the Wishart curve without cancellation near delta = 3
double wishart_excess(double d) { return 2.0 * (d - 3.0) * (d - 3.0) * (d + 6.0) / (27.0 * d * d * d); }

// Two-sided sheets parametrized by angle: delta = 2 + sqrt2 cos t, sqrt(D) = sqrt2 sin t.
// The fold at delta = 2 + sqrt2 (t = 0) is regular in t.
struct TwoSidedPoint {
    double delta, w;
};

TwoSidedPoint two_sided_at(double t)
{
    return {2.0 + std::numbers::sqrt2 * std::cos(t), std::numbers::sqrt2 * std::sin(t)};
}

double two_sided_beta(double d, double w, double sg) { return -1.0 / (d * d) + sg * w / (d * d * d); }

double root_d(double d) { return std::sqrt(std::max(0.0, -d * d + 4.0 * d - 2.0)); }

ThermoPoint two_sided_thermo(double beta, double d, double w, BranchKind kind)
{
    const double sg = sigma(kind);
    ThermoPoint p;
    p.beta = beta;
    p.kind = kind;
    p.m = d;
    p.delta = d;
    p.u = 2.0 * d - 3.0 * d * d / 8.0 - sg * d * w / 8.0;
    p.s = -2.0 + 15.0 / (4.0 * d) - 15.0 / (8.0 * d * d) + sg * w / (8.0 * d) + std::log(d / 2.0);
    p.betaf = 2.5 - 25.0 / (4.0 * d) + 17.0 / (8.0 * d * d) - sg * (3.0 / (8.0 * d) - 2.0 / (d * d)) * w -
              std::log(d / 2.0);
    p.zeta = -2.0 * beta * p.m - 4.0 * (1.0 - p.m) / (d * d);
    return p;
}

ThermoPoint wishart_thermo(double beta, double d, BranchKind kind)
{
    ThermoPoint p;
    p.beta = beta;
    p.kind = kind;
    p.m = d;
    p.delta = d;
    p.u = 1.5 * d - 0.25 * d * d;
    p.s = -2.25 + 5.0 / d - 3.0 / (d * d) + std::log(d / 2.0);
    p.betaf = 9.0 / (d * d) - 9.0 / d + 2.75 - std::log(d / 2.0);
    p.zeta = -2.0 * beta * p.m - 4.0 * (1.0 - p.m) / (d * d);
    return p;
}

ThermoPoint semicircle_thermo(double beta)
{
    ThermoPoint p;
    p.beta = beta;
    p.kind = BranchKind::StableSemicircle;
    p.m = 1.0;
    p.delta = std::sqrt(2.0 / beta);
    p.u = 1.0 + 1.0 / (2.0 * beta);
    p.s = -0.25 - 0.5 * std::log(2.0 * beta);
    p.betaf = beta + 0.75 + 0.5 * std::log(2.0 * beta);
    p.zeta = -2.0 * beta;
    return p;
}

ThermoPoint symmetric_thermo(double beta)
{
    ThermoPoint p;
    p.beta = beta;
    p.kind = BranchKind::MetaSymmetric;
    p.m = 1.0;
    p.delta = std::sqrt(-2.0 / beta);
    p.u = 1.0 - 1.5 / beta;
    p.s = -0.5 * std::log(-2.0 * beta) - 0.25;
    p.betaf = -1.25 + beta + 0.5 * std::log(-2.0 * beta);
    p.zeta = -2.0 * beta;
    return p;
}

double two_sided_angle(double beta, BranchKind kind)
{
    const double sg = sigma(kind);
    const double t_hi = kind == BranchKind::MetaTwoSidedLow ? std::numbers::pi / 4 : 3.0 * std::numbers::pi / 4;
    const BranchWindow& w = branch_window(kind);
    // beta_hi end of Low and beta_lo end of High sit at t_hi; the fold at t = 0
    if (kind == BranchKind::MetaTwoSidedLow && beta >= w.beta_hi) return t_hi;
    if (kind == BranchKind::MetaTwoSidedHigh && beta <= w.beta_lo) return t_hi;
    if (kind == BranchKind::MetaTwoSidedLow ? beta <= kBetaTurn : beta >= kBetaTurn) return 0.0;
    auto g = [&](double t) {
        auto q = two_sided_at(t);
        return two_sided_beta(q.delta, q.w, sg) - beta;
    };
    return bracket_root(g, 0.0, t_hi, 0.0);
}

} // namespace

const std::vector<BranchWindow>& branch_table()
{
    static const std::vector<BranchWindow> table = {
        {BranchKind::StableSemicircle, 2.0, kInf, 0.0, 1.0},
        {BranchKind::StableWishart, kBetaG, 2.0, 1.0, 3.0},
        {BranchKind::SeparableSea, -kInf, 0.0, 2.0, 2.0},
        {BranchKind::MetaWishartProlong, kBetaG, 0.0, 2.0, 3.0},
        {BranchKind::MetaTwoSidedLow, kBetaTurn, kBetaG, 3.0, kDeltaTurn},
        {BranchKind::MetaTwoSidedHigh, -2.0, kBetaTurn, 1.0, kDeltaTurn},
        {BranchKind::MetaSymmetric, -kInf, -2.0, 0.0, 1.0},
    };
    return table;
}

const BranchWindow& branch_window(BranchKind kind)
{
    for (const auto& w : branch_table())
        if (w.kind == kind) return w;
    throw Error(ErrorCode::OutOfBranch, "unknown branch");
}

bool in_window(double beta, BranchKind kind)
{
    const auto& w = branch_window(kind);
    return std::isfinite(beta) && beta >= w.beta_lo - kSlack && beta <= w.beta_hi + kSlack;
}

double delta_of_beta(double beta, BranchKind kind)
{
    if (!in_window(beta, kind)) out_of_branch(kind, beta, "beta");
    switch (kind) {
    case BranchKind::StableSemicircle:
        return std::sqrt(2.0 / std::max(beta, 2.0));
    case BranchKind::MetaSymmetric:
        return std::sqrt(-2.0 / std::min(beta, -2.0));
    case BranchKind::SeparableSea:
        return 2.0;
    case BranchKind::StableWishart:
    case BranchKind::MetaWishartProlong: {
        const double lo = kind == BranchKind::StableWishart ? 1.0 : 2.0;
        const double excess = beta - kBetaG;
        if (excess <= 0.0) return 3.0;
        if (kind == BranchKind::StableWishart && beta >= 2.0) return 1.0;
        if (kind == BranchKind::MetaWishartProlong && beta >= 0.0) return 2.0;
        return bracket_root([&](double d) { return wishart_excess(d) - excess; }, lo, 3.0, 0.0);
    }
    case BranchKind::MetaTwoSidedLow:
    case BranchKind::MetaTwoSidedHigh:
        return two_sided_at(two_sided_angle(beta, kind)).delta;
    }
    out_of_branch(kind, beta, "beta");
}

double beta_of_delta(double delta, BranchKind kind)
{
    const auto& w = branch_window(kind);
    if (!(delta >= w.delta_lo - kSlack && delta <= w.delta_hi + kSlack) ||
        (w.delta_lo == 0.0 && delta <= 0.0))
        out_of_branch(kind, delta, "delta");
    switch (kind) {
    case BranchKind::StableSemicircle: return 2.0 / (delta * delta);
    case BranchKind::MetaSymmetric: return -2.0 / (delta * delta);
    case BranchKind::SeparableSea: return 0.0;
    case BranchKind::StableWishart:
    case BranchKind::MetaWishartProlong: return 4.0 / (delta * delta * delta) - 2.0 / (delta * delta);
    case BranchKind::MetaTwoSidedLow:
    case BranchKind::MetaTwoSidedHigh: return two_sided_beta(delta, root_d(delta), sigma(kind));
    }
    out_of_branch(kind, delta, "delta");
}

double wishart_delta_radical(double beta)
{
    using C = std::complex<double>;
    const C b(beta, 0.0);
    const C r = std::sqrt(C(-beta / kBetaG, 0.0)) + std::sqrt(C(1.0 - beta / kBetaG, 0.0));
    const C t = std::pow(r, 1.0 / 3.0);
    const C d = (1.0 / b) * std::sqrt(2.0 * b / 3.0) * (t - 1.0 / t);
    return std::abs(d.real());
}

ThermoPoint thermo_at_delta(double delta, BranchKind kind)
{
    const double beta = beta_of_delta(delta, kind);
    switch (kind) {
    case BranchKind::StableSemicircle: return semicircle_thermo(beta);
    case BranchKind::MetaSymmetric: return symmetric_thermo(beta);
    case BranchKind::SeparableSea: return thermo_separable(0.0, SeaVariant::Bare);
    case BranchKind::StableWishart:
    case BranchKind::MetaWishartProlong: return wishart_thermo(beta, delta, kind);
    case BranchKind::MetaTwoSidedLow:
    case BranchKind::MetaTwoSidedHigh: return two_sided_thermo(beta, delta, root_d(delta), kind);
    }
    out_of_branch(kind, delta, "delta");
}

ThermoPoint thermo(double beta, BranchKind kind)
{
    if (!in_window(beta, kind)) out_of_branch(kind, beta, "beta");
    switch (kind) {
    case BranchKind::StableSemicircle: return semicircle_thermo(std::max(beta, 2.0));
    case BranchKind::MetaSymmetric: return symmetric_thermo(std::min(beta, -2.0));
    case BranchKind::SeparableSea: return thermo_separable(beta, SeaVariant::Stable);
    case BranchKind::StableWishart:
    case BranchKind::MetaWishartProlong: return wishart_thermo(beta, delta_of_beta(beta, kind), kind);
    case BranchKind::MetaTwoSidedLow:
    case BranchKind::MetaTwoSidedHigh: {
        auto q = two_sided_at(two_sided_angle(beta, kind));
        return two_sided_thermo(beta, q.delta, q.w, kind);
    }
    }
    out_of_branch(kind, beta, "beta");
}

ThermoPoint thermo_separable(double beta, SeaVariant variant)
{
    if (!(beta <= 0.0)) out_of_branch(BranchKind::SeparableSea, beta, "beta");
    if (variant == SeaVariant::Stable)
        variant = beta <= critical_points().beta_minus ? SeaVariant::Spike : SeaVariant::Bare;
    ThermoPoint p;
    p.beta = beta;
    p.kind = BranchKind::SeparableSea;
    p.m = 2.0;
    p.delta = 2.0;
    if (variant == SeaVariant::Bare) {
        p.u = 0.0;
        p.s = -0.5;
        p.betaf = 0.5;
        p.zeta = 1.0;
        return p;
    }
    const double mu = mu_of_beta(beta);
    p.mu = mu;
    p.u = mu * mu;
    p.s = std::log1p(-mu) - 0.5;
    p.betaf = beta * mu * mu - std::log1p(-mu) + 0.5;
    p.zeta = -2.0 * beta * mu;
    return p;
}

double density(const ThermoPoint& p, double x)
{
    if (!(std::abs(x) < 1.0))
        throw Error(ErrorCode::DomainError, "density needs |x| < 1");
    const double r = std::sqrt((1.0 - x) * (1.0 + x));
    const double pi = std::numbers::pi;
    const double d = p.delta;
    switch (p.kind) {
    case BranchKind::StableSemicircle:
        return 2.0 / pi * r;
    case BranchKind::StableWishart:
    case BranchKind::MetaWishartProlong:
        return 2.0 / (pi * d) * (1.0 - x) / r * (1.0 + (2.0 - d) * x);
    case BranchKind::MetaTwoSidedLow:
    case BranchKind::MetaTwoSidedHigh: {
        const double sg = sigma(p.kind);
        const double w = root_d(d);
        return (0.5 * (d + sg * w) + 2.0 * (1.0 - d) * x + (d - sg * w) * x * x) / (pi * d * r);
    }
    case BranchKind::MetaSymmetric:
        return 2.0 * x * x / (pi * r);
    case BranchKind::SeparableSea:
        return (1.0 - 2.0 * x * (p.m - 1.0) / d) / (pi * r);
    }
    throw Error(ErrorCode::OutOfBranch, "unknown branch");
}

double mu_of_beta(double beta)
{
    if (!(beta <= -2.0)) out_of_branch(BranchKind::SeparableSea, beta, "beta (spike)");
    return 0.5 + 0.5 * std::sqrt(1.0 + 2.0 / beta);
}

CriticalSet critical_points()
{
    static const CriticalSet cs = [] {
        const double mu = bracket_root([](double m) { return m / (2.0 * (1.0 - m)) + std::log1p(-m); }, 0.1, 0.999);
        return CriticalSet{kBetaPlus, kBetaG, -1.0 / (2.0 * mu * (1.0 - mu)), mu};
    }();
    return cs;
}

double entropy_of_energy(double u, EnergyRegime regime)
{
    if (regime == EnergyRegime::ScaledByN) {
        if (!(u > 1.0 && u <= 2.0))
            throw Error(ErrorCode::DomainError, "scaled energy must lie in (1, 2]");
        if (u <= 1.25) return 0.5 * std::log(u - 1.0) - 0.25;
        const double d = 3.0 - std::sqrt(9.0 - 4.0 * u);
        return -2.25 + 5.0 / d - 3.0 / (d * d) + std::log(d / 2.0);
    }
    if (!(u > 0.0 && u < 1.0))
        throw Error(ErrorCode::DomainError, "finite energy must lie in (0, 1)");
    const auto cs = critical_points();
    if (u < cs.mu_minus * cs.mu_minus) return cs.beta_minus * u - 0.5;
    return std::log1p(-std::sqrt(u)) - 0.5;
}

double entropy_of_purity(double pi, int n)
{
    if (n < 1 || !(pi > 1.0 / n && pi < 1.0))
        throw Error(ErrorCode::DomainError, "purity must lie in (1/n, 1)");
    const double nn = n;
    const auto cs = critical_points();
    if (pi <= 1.25 / nn) return 0.5 * std::log(nn * pi - 1.0) - 0.25;
    if (pi < 2.0 / nn) return entropy_of_energy(nn * pi, EnergyRegime::ScaledByN);
    if (pi < cs.mu_minus * cs.mu_minus) return cs.beta_minus * pi - 0.5;
    return std::log1p(-std::sqrt(pi)) - 0.5;
}

double volume_of_purity(double pi, int n)
{
    return static_cast<double>(n) * n * entropy_of_purity(pi, n);
}

std::pair<double, double> lambda_extremes(double pi, int n)
{
    if (n < 1 || !(pi >= 1.0 / n && pi < 1.0))
        throw Error(ErrorCode::DomainError, "purity must lie in [1/n, 1)");
    const double nn = n;
    if (pi <= 1.25 / nn) {
        const double r = 2.0 * std::sqrt(std::max(0.0, nn * pi - 1.0));
        return {(1.0 - r) / nn, (1.0 + r) / nn};
    }
    if (pi <= 2.0 / nn) return {0.0, 2.0 / nn * (3.0 - 2.0 * std::sqrt(2.25 - nn * pi))};
    return {0.0, std::sqrt(pi)};
}

std::vector<std::int64_t> planar_map_series(int order)
{
    if (order < 0) throw Error(ErrorCode::DomainError, "order must be non-negative");
    if (order > 16) throw Error(ErrorCode::OrderTooLarge, "order above 16");
    using Q = boost::multiprecision::cpp_rational;
    using Series = std::vector<Q>;
    const int K = order + 1;

    auto mul = [K](const Series& a, const Series& b) {
        Series c(K, Q(0));
        for (int i = 0; i < K; ++i) {
            if (a[i] == 0) continue;
            for (int j = 0; i + j < K; ++j)
                c[i + j] += a[i] * b[j];
        }
        return c;
    };
    // x = -2 beta(2 + e) as a series in e: 4/d^3 - 2/d^2 with (1 + e/2)^(-k) expanded binomially
    auto inv_pow = [K](int k) {
        Series s(K + 1, Q(0));
        Q c(1);
        for (int j = 0; j <= K; ++j) {
            s[j] = c;
            c = c * Q(-(k + j)) / Q(2 * (j + 1));
        }
        return s;
    };
    const Series a = inv_pow(3), b = inv_pow(2);
    Series x_of_e(K + 1, Q(0));
    for (int j = 0; j <= K; ++j)
        x_of_e[j] = -2 * (Q(1) / 2 * a[j] - Q(1) / 2 * b[j]);
    const Q c1 = x_of_e[1];

    // fixed point e = (x - sum_{k>=2} c_k e^k) / c1, one order gained per pass
    Series e(K, Q(0));
    Series xs(K, Q(0));
    if (K > 1) xs[1] = 1;
    for (int pass = 0; pass < K; ++pass) {
        Series acc(K, Q(0));
        Series ep = e;
        for (int k = 2; k < K; ++k) {
            ep = mul(ep, e);
            for (int j = 0; j < K; ++j)
                acc[j] += x_of_e[k] * ep[j];
        }
        for (int j = 0; j < K; ++j)
            e[j] = (xs[j] - acc[j]) / c1;
    }

    Series e2 = mul(e, e);
    std::vector<std::int64_t> out(K);
    for (int j = 0; j < K; ++j) {
        Q r = (j == 0 ? Q(2) : Q(0)) + e[j] / 2 - e2[j] / 4;
        if (boost::multiprecision::denominator(r) != 1)
            throw Error(ErrorCode::NoConvergence, "non-integer series coefficient");
        out[j] = static_cast<std::int64_t>(boost::multiprecision::numerator(r));
    }
    return out;
}

namespace {

double fit_derivative(double sign, const std::function<double(double)>& s, int deriv, double& rms)
{
    const int pts = 48, deg = 4;
    const double hmin = 1e-4, hmax = 2e-2;
    Eigen::MatrixXd A(pts, deg + 1);
    Eigen::VectorXd y(pts);
    for (int i = 0; i < pts; ++i) {
        const double h = hmin * std::pow(hmax / hmin, double(i) / (pts - 1));
        const double t = sign * h / hmax;
        for (int k = 0; k <= deg; ++k)
            A(i, k) = std::pow(t, k);
        y(i) = s(kBetaPlus + sign * h);
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    rms = std::sqrt((A * c - y).squaredNorm() / pts);
    return deriv == 1 ? c(1) / hmax : 2.0 * c(2) / (hmax * hmax);
}

struct PowerFit {
    double exponent, coefficient, rms;
};

// ln|R| = ln A + p ln h + c sqrt(h), with R the remainder after the regular part
PowerFit fit_gravity_side(double side)
{
    const int pts = 40;
    const long double c0 = 0.75L - std::log(1.5L);
    const long double ug = 2.25L;
    const long double f2 = -81.0L / 16.0L;
    Eigen::MatrixXd A(pts, 3);
    Eigen::VectorXd y(pts);
    double sgn = 0.0;
    for (int i = 0; i < pts; ++i) {
        const long double e = 0.01L * std::pow(10.0L, static_cast<long double>(i) / (pts - 1));
        const long double d = 3.0L + side * e;
        const long double h = 2.0L * e * e * (d + 6.0L) / (27.0L * d * d * d);
        const long double bf = 9.0L / (d * d) - 9.0L / d + 2.75L - std::log(d / 2.0L);
        const long double r = bf - c0 - ug * h - f2 * h * h;
        sgn = r < 0 ? -1.0 : 1.0;
        A(i, 0) = 1.0;
        A(i, 1) = static_cast<double>(std::log(h));
        A(i, 2) = static_cast<double>(std::sqrt(h));
        y(i) = static_cast<double>(std::log(std::abs(r)));
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    return {c(1), sgn * std::exp(c(0)), std::sqrt((A * c - y).squaredNorm() / pts)};
}

} // namespace

ExpansionReport critical_expansion_check(CriticalSide side)
{
    ExpansionReport rep;
    rep.side = side;
    if (side == CriticalSide::BetaPlus) {
        auto left = [](double b) { return thermo(b, BranchKind::StableWishart).s; };
        auto right = [](double b) { return thermo(b, BranchKind::StableSemicircle).s; };
        double r1, r2, r3, r4;
        const double d1l = fit_derivative(-1.0, left, 1, r1), d1r = fit_derivative(1.0, right, 1, r2);
        const double d2l = fit_derivative(-1.0, left, 2, r3), d2r = fit_derivative(1.0, right, 2, r4);
        rep.first_derivative_jump = d1r - d1l;
        rep.second_derivative_jump = d2r - d2l;
        rep.residual = std::max({r1, r2, r3, r4});
        return rep;
    }
    const auto beyond = fit_gravity_side(1.0);
    const auto physical = fit_gravity_side(-1.0);
    rep.exponent = beyond.exponent;
    rep.coefficient = beyond.coefficient;
    rep.exponent_physical = physical.exponent;
    rep.coefficient_physical = physical.coefficient;
    rep.residual = std::max(beyond.rms, physical.rms);
    return rep;
}

BranchKind stable_branch(double beta, Scaling scaling)
{
    if (scaling == Scaling::Alpha2) {
        if (beta <= 0.0) return BranchKind::SeparableSea;
        throw Error(ErrorCode::OutOfBranch, "positive beta in the O(1) purity scaling has no stable O(1) branch");
    }
    if (beta >= kBetaPlus) return BranchKind::StableSemicircle;
    if (beta >= kBetaG) return BranchKind::StableWishart;
    throw Error(ErrorCode::OutOfBranch, "below beta_g the stable phase lives in the O(1) purity scaling");
}

} // namespace entrogas
