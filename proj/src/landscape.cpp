#include "entrogas/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace entrogas {

double DomainSpec::gamma1_plus(double d) const { return 1.0 + 0.5 * d * (1.0 - 0.5 * beta * d * d); }
double DomainSpec::gamma1_minus(double d) const { return 1.0 - 0.5 * d * (1.0 - 0.5 * beta * d * d); }

double DomainSpec::gamma2_plus(double d) const
{
    return 1.0 + d * d * std::sqrt(std::max(0.0, -beta * (1.0 + 0.5 * beta * d * d)));
}

double DomainSpec::gamma2_minus(double d) const
{
    return 1.0 - d * d * std::sqrt(std::max(0.0, -beta * (1.0 + 0.5 * beta * d * d)));
}

double DomainSpec::delta_star() const
{
    return beta < 0.0 ? std::sqrt(-2.0 / (3.0 * beta)) : std::numeric_limits<double>::infinity();
}

double DomainSpec::delta_max() const
{
    return beta == 0.0 ? std::numeric_limits<double>::infinity() : std::sqrt(2.0 / std::abs(beta));
}

double DomainSpec::h_plus(double d) const { return d <= delta_star() ? gamma1_plus(d) : gamma2_plus(d); }
double DomainSpec::h_minus(double d) const { return d <= delta_star() ? gamma1_minus(d) : gamma2_minus(d); }

double phi_general(double m, double delta, double beta, double x)
{
    if (!(std::abs(x) < 1.0) || !(delta > 0.0))
        throw Error(ErrorCode::DomainError, "phi_general needs |x| < 1 and delta > 0");
    const double bd2 = beta * delta * delta;
    const double num = 1.0 + 0.5 * bd2 + 2.0 * (1.0 - m) * x / delta - bd2 * x * x;
    return num / (std::numbers::pi * std::sqrt((1.0 - x) * (1.0 + x)));
}

DensityRoots density_roots(double m, double delta, double beta)
{
    DensityRoots r;
    const double bd2 = beta * delta * delta;
    const double k = (1.0 - m) / delta;
    r.Delta = k * k + bd2 * (1.0 + 0.5 * bd2);
    if (r.Delta < 0.0) {
        r.complex = true;
        return r;
    }
    const double sq = std::sqrt(r.Delta);
    const double a = (k - sq) / bd2, b = (k + sq) / bd2;
    r.x_minus = std::min(a, b);
    r.x_plus = std::max(a, b);
    return r;
}

bool feasible(double m, double delta, double beta, double tol)
{
    if (!(delta >= 0.0) || !(m >= delta - tol)) return false;
    if (delta == 0.0) return std::abs(m - 1.0) <= tol;
    const DomainSpec dom(beta);
    if (beta != 0.0 && delta > dom.delta_max() * (1.0 + tol)) return false;
    const double d = std::min(delta, dom.delta_max());
    return m <= dom.h_plus(d) + tol && m >= dom.h_minus(d) - tol;
}

namespace {

double surface(double m, double d, double beta)
{
    const double k = 1.0 - m;
    return beta - beta * k * k + 2.0 * k * k / (d * d) + 0.5 * beta * d * d - beta * beta * d * d * d * d / 16.0 -
           std::log(d / 2.0);
}

double golden_min(const std::function<double(double)>& f, double a, double b, double& xmin)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if (fc <= fd) {
        xmin = c;
        return fc;
    }
    xmin = d;
    return fd;
}

struct Candidate {
    double m, delta, betaf;
    SaddleLocation loc;
    bool exact;
};

// Golden section cannot resolve a flat valley beyond ~sqrt(eps); a closed-form
// candidate that agrees to roundoff and sits within that valley wins.
bool better(const Candidate& c, const Candidate& best)
{
    const double tie = 1e-12 * (1.0 + std::abs(best.betaf));
    if (std::abs(c.betaf - best.betaf) <= tie) {
        const double dist = std::hypot(c.m - best.m, c.delta - best.delta);
        if (c.exact != best.exact && dist < 1e-3) return c.exact;
        if (c.exact && best.exact && dist < 1e-7) return false;
        if (std::abs(c.betaf - best.betaf) <= 1e-14 * (1.0 + std::abs(best.betaf))) return c.delta < best.delta;
    }
    return c.betaf < best.betaf;
}

} // namespace

double free_energy_surface(double m, double delta, double beta)
{
    if (!(delta > 0.0) || !feasible(m, delta, beta, 1e-10))
        throw Error(ErrorCode::Infeasible, "point outside the feasible domain");
    return surface(m, delta, beta);
}

std::pair<double, double> free_energy_gradient(double m, double d, double beta)
{
    const double k = 1.0 - m;
    return {2.0 * k * (beta - 2.0 / (d * d)),
            -4.0 * k * k / (d * d * d) + beta * d - 0.25 * beta * beta * d * d * d - 1.0 / d};
}

const char* to_string(SaddleLocation l)
{
    switch (l) {
    case SaddleLocation::Interior: return "Interior";
    case SaddleLocation::UpperBoundary: return "UpperBoundary";
    case SaddleLocation::LowerBoundary: return "LowerBoundary";
    case SaddleLocation::CornerRight: return "CornerRight";
    case SaddleLocation::CornerCut: return "CornerCut";
    }
    return "Unknown";
}

SaddleSolution minimize_landscape(double beta)
{
    if (beta == 0.0 || !std::isfinite(beta))
        throw Error(ErrorCode::InvalidParams, "minimize_landscape needs a finite beta != 0");
    const DomainSpec dom(beta);
    const double dmax = dom.delta_max();
    const double dmin = 1e-4 * dmax;
    const int grid = 256;

    std::vector<Candidate> cands;
    auto consider = [&](double m, double d, SaddleLocation loc, bool exact) {
        if (!(d > 0.0) || !feasible(m, d, beta, 1e-10)) return;
        cands.push_back({m, d, surface(m, d, beta), loc, exact});
    };

    // exact corners
    consider(1.0, dmax, SaddleLocation::CornerRight, true);
    auto cut_up = [&](double d) { return dom.h_plus(d) - d; };
    auto cut_lo = [&](double d) { return dom.h_minus(d) - d; };
    std::vector<double> ds(grid);
    for (int i = 0; i < grid; ++i)
        ds[i] = dmin + (dmax - dmin) * i / (grid - 1);
    for (int i = 0; i + 1 < grid; ++i) {
        if (cut_up(ds[i]) * cut_up(ds[i + 1]) < 0.0) {
            const double d = bracket_root(cut_up, ds[i], ds[i + 1], 0.0);
            consider(d, d, SaddleLocation::CornerCut, true);
        }
        if (cut_lo(ds[i]) * cut_lo(ds[i + 1]) < 0.0) {
            const double d = bracket_root(cut_lo, ds[i], ds[i + 1], 0.0);
            consider(d, d, SaddleLocation::LowerBoundary, true);
        }
    }

    struct Arc {
        std::function<double(double)> m_of;
        std::function<bool(double)> valid;
        SaddleLocation loc;
        bool is_cut;
    };
    // derivative of the surface along m = delta
    auto cut_slope = [&](double d) {
        auto [gm, gd] = free_energy_gradient(d, d, beta);
        return gm + gd;
    };
    const Arc arcs[] = {
        {[&](double d) { return dom.h_plus(d); }, [&](double d) { return dom.h_plus(d) >= d; },
         SaddleLocation::UpperBoundary, false},
        {[&](double d) { return dom.h_minus(d); }, [&](double d) { return dom.h_minus(d) >= d; },
         SaddleLocation::LowerBoundary, false},
        {[](double d) { return d; }, [&](double d) { return dom.h_minus(d) <= d && d <= dom.h_plus(d); },
         SaddleLocation::LowerBoundary, true},
    };
    const double inf = std::numeric_limits<double>::infinity();
    for (const auto& arc : arcs) {
        auto f = [&](double d) { return arc.valid(d) ? surface(arc.m_of(d), d, beta) : inf; };
        std::vector<double> fs(grid);
        for (int i = 0; i < grid; ++i)
            fs[i] = f(ds[i]);
        // refine every discrete local minimum; the two-sided range has a double well
        for (int i = 0; i < grid; ++i) {
            if (!std::isfinite(fs[i])) continue;
            const bool left_ok = i == 0 || fs[i] <= fs[i - 1];
            const bool right_ok = i == grid - 1 || fs[i] <= fs[i + 1];
            if (!left_ok || !right_ok) continue;
            double a = ds[std::max(i - 1, 0)], b = ds[std::min(i + 1, grid - 1)];
            // shrink the bracket to the valid part
            if (!arc.valid(a)) a = bracket_root([&](double d) { return arc.valid(d) ? 1.0 : -1.0; }, a, ds[i], 0.0);
            if (!arc.valid(b)) b = bracket_root([&](double d) { return arc.valid(d) ? 1.0 : -1.0; }, ds[i], b, 0.0);
            double x;
            golden_min(f, a, b, x);
            bool exact = false;
            if (arc.is_cut && cut_slope(a) < 0.0 && cut_slope(b) > 0.0) {
                x = bracket_root(cut_slope, a, b, 0.0);
                exact = true;
            }
            consider(arc.m_of(x), x, arc.loc, exact);
        }
    }

    if (cands.empty()) throw Error(ErrorCode::NoConvergence, "no feasible boundary point found");
    const Candidate* best = &cands.front();
    for (const auto& c : cands)
        if (better(c, *best)) best = &c;
    const double k = 1.0 - best->m;
    return {best->m, best->delta, beta, best->betaf,
            -2.0 * beta * best->m - 4.0 * k / (best->delta * best->delta), best->loc};
}

double sea_reduced_free_energy(double m, double delta, double beta)
{
    if (!(beta < 0.0)) throw Error(ErrorCode::DomainError, "sea reduced free energy needs beta < 0");
    const double tol = 1e-12;
    if (!(delta > 0.0) || m < std::max(delta, 1.0 - 0.5 * delta) - tol || m > 1.0 + 0.5 * delta + tol)
        throw Error(ErrorCode::Infeasible, "point outside the zero-temperature triangle");
    return 2.0 * (m - 1.0) * (m - 1.0) / (delta * delta) - std::log(delta / 2.0);
}

} // namespace entrogas
