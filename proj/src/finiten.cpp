#include "entrogas/finiten.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "entrogas/analytic.hpp"

namespace entrogas {

const char* to_string(Basin b) { return b == Basin::Sea ? "Sea" : "Spike"; }

namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double objective(const std::vector<double>& l, double beta, int n)
{
    const double c = 2.0 / (static_cast<double>(n) * n);
    double quad = 0.0, logs = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        quad += l[i] * l[i];
        for (std::size_t j = i + 1; j < l.size(); ++j)
            logs += std::log(std::abs(l[i] - l[j]));
    }
    return beta * quad - c * logs;
}

void gradient_hessian(const std::vector<double>& l, double beta, int n, Eigen::VectorXd& g, Eigen::MatrixXd& h)
{
    const int k = static_cast<int>(l.size());
    const double c = 2.0 / (static_cast<double>(n) * n);
    g.resize(k);
    h.setZero(k, k);
    for (int i = 0; i < k; ++i) {
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double inv = 1.0 / (l[i] - l[j]);
            s1 += inv;
            s2 += inv * inv;
            h(i, j) = -c * inv * inv;
        }
        g(i) = 2.0 * beta * l[i] - c * s1;
        h(i, i) = 2.0 * beta + c * s2;
    }
}

// Orthonormal basis of {v : sum v = 0} in R^k from the Householder reflector taking e1 to 1/sqrt(k).
Eigen::MatrixXd zero_sum_basis(int k)
{
    Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(double(k)));
    v(0) -= 1.0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k);
    const double vv = v.squaredNorm();
    if (vv > 0.0) p -= 2.0 * v * v.transpose() / vv;
    return p.rightCols(k - 1);
}

struct NewtonOutcome {
    std::vector<double> lam;
    double f = 0.0;
    double residual = 0.0;
    double zeta = 0.0;
    double slope_top = 0.0;
    bool on_wall = false;
    int iterations = 0;
};

// Active-set Newton on the simplex, eigenvalues kept in descending order.
// The smallest eigenvalue may sit exactly on the wall lambda = 0.
NewtonOutcome newton_simplex(std::vector<double> lam, double beta, int n, bool fix_top, int max_iters, double tol)
{
    const int k = static_cast<int>(lam.size());
    const int lo = fix_top ? 1 : 0;
    bool active = lam.back() == 0.0;
    double target = 0.0;
    for (int i = lo; i < k; ++i)
        target += lam[i];

    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double f = objective(lam, beta, n);
    NewtonOutcome out;
    Eigen::MatrixXd z_full = zero_sum_basis(k - lo), z_wall = zero_sum_basis(k - lo - 1);

    for (int it = 0; it <= max_iters; ++it) {
        gradient_hessian(lam, beta, n, g, h);
        const int hi = active ? k - 1 : k;
        const int m = hi - lo;
        const Eigen::VectorXd gf = g.segment(lo, m);
        const double zeta = gf.mean();
        if (active && g(k - 1) - zeta < 0.0) {
            active = false;
            continue;
        }
        const double res = (gf.array() - zeta).abs().maxCoeff();
        out.residual = res;
        out.zeta = zeta;
        out.slope_top = fix_top ? g(0) - zeta : 0.0;
        out.iterations = it;
        if (res < tol || it == max_iters) break;

        const Eigen::MatrixXd& z = active ? z_wall : z_full;
        const Eigen::MatrixXd hr = z.transpose() * h.block(lo, lo, m, m) * z;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
        Eigen::VectorXd w = es.eigenvalues().cwiseAbs();
        const double floor = 1e-12 * std::max(1e-300, w.maxCoeff());
        w = w.cwiseMax(floor);
        const Eigen::VectorXd rg = es.eigenvectors().transpose() * (z.transpose() * gf);
        const Eigen::VectorXd dr = -(es.eigenvectors() * rg.cwiseQuotient(w));
        Eigen::VectorXd d = Eigen::VectorXd::Zero(k);
        d.segment(lo, m) = z * dr;

        double smax = 1.0;
        bool hit = false;
        if (!active && d(k - 1) < 0.0) {
            const double s0 = -lam[k - 1] / d(k - 1);
            if (s0 <= smax) {
                smax = s0;
                hit = true;
            }
        }
        for (int i = 0; i + 1 < k; ++i) {
            const double rate = d(i) - d(i + 1);
            if (rate < 0.0) {
                const double s = 0.9 * (lam[i] - lam[i + 1]) / -rate;
                if (s < smax) {
                    smax = s;
                    hit = false;
                }
            }
        }

        const double slope = g.dot(d);
        double step = smax;
        std::vector<double> trial(k);
        bool accepted = false;
        for (int ls = 0; ls < 80; ++ls) {
            for (int i = 0; i < k; ++i)
                trial[i] = lam[i] + step * d(i);
            if (hit && step == smax) trial[k - 1] = 0.0;
            bool ordered = trial[k - 1] >= 0.0;
            for (int i = 0; ordered && i + 1 < k; ++i)
                ordered = trial[i] > trial[i + 1];
            if (ordered) {
                const double ft = objective(trial, beta, n);
                if (ft <= f + 1e-4 * step * slope) {
                    f = ft;
                    accepted = true;
                    break;
                }
                // predicted decrease below the roundoff of f: judge the step by the residual instead
                if (-step * slope < 1e-11 * (1.0 + std::abs(f))) {
                    Eigen::VectorXd gt;
                    Eigen::MatrixXd ht;
                    gradient_hessian(trial, beta, n, gt, ht);
                    const int hi_t = (hit ? k - 1 : hi);
                    const Eigen::VectorXd gtf = gt.segment(lo, hi_t - lo);
                    if ((gtf.array() - gtf.mean()).abs().maxCoeff() < res) {
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (hit && step == smax) active = true;
        // hold the free trace fixed against drift
        double sum = 0.0;
        for (int i = lo; i < k; ++i)
            sum += trial[i];
        const int nfree = active ? k - 1 - lo : k - lo;
        const double corr = (target - sum) / nfree;
        for (int i = lo; i < lo + nfree; ++i)
            trial[i] += corr;
        lam = trial;
        f = objective(lam, beta, n);
    }
    out.lam = lam;
    out.f = f;
    out.on_wall = active;
    return out;
}

double mp_quantile(double p)
{
    const double t = bracket_root([p](double t) { return (2.0 * t + std::sin(2.0 * t)) / std::numbers::pi - p; }, 0.0,
                                  std::numbers::pi / 2, 1e-15);
    const double s = std::sin(t);
    return 4.0 * s * s;
}

// Marchenko-Pastur quantiles at (i + 1/2)/k, descending, unit sum
std::vector<double> sea_profile(int k)
{
    std::vector<double> v(k);
    for (int i = 0; i < k; ++i)
        v[k - 1 - i] = mp_quantile((i + 0.5) / k);
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v)
        x /= s;
    return v;
}

void jitter(std::vector<double>& v, std::size_t from, double amount, std::uint64_t seed)
{
    std::uint64_t st = seed;
    std::mt19937_64 rng(splitmix64(st));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double before = 0.0, after = 0.0;
    for (std::size_t i = from; i < v.size(); ++i) {
        before += v[i];
        v[i] *= 1.0 + amount * u(rng);
        after += v[i];
    }
    for (std::size_t i = from; i < v.size(); ++i)
        v[i] *= before / after;
    std::sort(v.begin() + static_cast<std::ptrdiff_t>(from), v.end(), std::greater<double>());
}

Basin classify(double mu, int n) { return mu * (n - 1) / (1.0 - mu) > 8.0 ? Basin::Spike : Basin::Sea; }

Spectrum to_spectrum(std::vector<double> v)
{
    for (auto& x : v)
        x = std::max(x, 0.0);
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v)
        x /= s;
    double r = 1.0;
    for (std::size_t i = 1; i < v.size(); ++i)
        r -= v[i];
    v[0] = r;
    return Spectrum(std::move(v));
}

void check_config(const FiniteNConfig& c)
{
    if (c.n < 2 || !(c.grad_tol > 0.0) || c.max_iters < 1 || !std::isfinite(c.beta))
        throw Error(ErrorCode::InvalidParams, "finite-N config needs n >= 2, grad_tol > 0, max_iters >= 1");
}

// starting point for a fixed top eigenvalue mu
std::vector<double> fixed_top_init(int n, double mu)
{
    std::vector<double> v(n);
    v[0] = mu;
    auto sea = sea_profile(n - 1);
    if (sea.front() * (1.0 - mu) < 0.9 * mu) {
        for (int i = 1; i < n; ++i)
            v[i] = sea[i - 1] * (1.0 - mu);
        return v;
    }
    // r_i = mu (1 - i/n)^a with the exponent fixed by the trace
    auto total = [&](double a) {
        double s = 0.0;
        for (int i = 1; i < n; ++i)
            s += mu * std::pow(1.0 - double(i) / n, a);
        return s - (1.0 - mu);
    };
    double hi = 1.0;
    while (total(hi) > 0.0)
        hi *= 2.0;
    const double a = bracket_root(total, 0.0, hi, 1e-14);
    for (int i = 1; i < n; ++i)
        v[i] = mu * std::pow(1.0 - double(i) / n, a);
    return v;
}

ProfilePoint profile_point(const FiniteNConfig& c, double mu, const std::vector<double>* warm)
{
    ProfilePoint p{mu, 0.0, 0.0, false, ""};
    if (!(mu > 1.0 / c.n && mu < 1.0)) {
        p.error = "mu outside (1/n, 1)";
        return p;
    }
    std::vector<double> init;
    if (warm && (*warm)[1] * (1.0 - mu) / (1.0 - (*warm)[0]) < 0.99 * mu) {
        init = *warm;
        const double scale = (1.0 - mu) / (1.0 - init[0]);
        init[0] = mu;
        for (std::size_t i = 1; i < init.size(); ++i)
            init[i] *= scale;
    } else {
        init = fixed_top_init(c.n, mu);
    }
    auto r = newton_simplex(init, c.beta, c.n, true, c.max_iters, c.grad_tol);
    p.betaf_n = r.f - std::log(double(c.n));
    p.slope = r.slope_top;
    p.converged = r.residual < c.grad_tol;
    if (!p.converged) p.error = "NoConvergence";
    return p;
}

} // namespace

double free_energy_n(const Spectrum& s, double beta)
{
    const auto& v = s.values();
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] - v[i + 1] < 1e-300)
            throw Error(ErrorCode::CollidingEigenvalues, "coincident eigenvalues");
    return objective(v, beta, static_cast<int>(v.size()));
}

std::vector<double> free_energy_n_gradient(const Spectrum& s, double beta)
{
    free_energy_n(s, beta);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    gradient_hessian(s.values(), beta, static_cast<int>(s.n()), g, h);
    return {g.data(), g.data() + g.size()};
}

LocalMinimum minimize_basin(const FiniteNConfig& c, Basin basin)
{
    check_config(c);
    if (basin == Basin::Spike && !(c.beta < 0.0))
        throw Error(ErrorCode::InvalidParams, "the spike basin needs beta < 0");
    std::vector<double> init;
    if (basin == Basin::Sea) {
        init = sea_profile(c.n);
        jitter(init, 0, c.jitter, c.seed);
    } else {
        const double mu0 = 0.7;
        init.push_back(mu0);
        for (double x : sea_profile(c.n - 1))
            init.push_back(x * (1.0 - mu0));
        jitter(init, 1, c.jitter, c.seed);
    }
    auto r = newton_simplex(init, c.beta, c.n, false, c.max_iters, c.grad_tol);
    if (!(r.residual < c.grad_tol))
        throw Error(ErrorCode::NoConvergence,
                    "finite-N minimization stalled with residual " + std::to_string(r.residual));
    const double mu = r.lam.front();
    const Basin got = classify(mu, c.n);
    return LocalMinimum{to_spectrum(r.lam), mu,        r.f - std::log(double(c.n)), got, r.residual,
                        got != basin,      r.on_wall, r.iterations};
}

FiniteNResult analyze_finite_n(const FiniteNConfig& c)
{
    FiniteNResult res{c.n, c.beta, {}, 0};
    res.minima.push_back(minimize_basin(c, Basin::Sea));
    if (c.beta < 0.0) {
        auto spike = minimize_basin(c, Basin::Spike);
        if (!spike.escaped) res.minima.push_back(std::move(spike));
    }
    // a sea run that escaped duplicates the spike minimum
    if (res.minima.front().escaped && res.minima.size() > 1) res.minima.erase(res.minima.begin());
    for (std::size_t i = 1; i < res.minima.size(); ++i)
        if (res.minima[i].betaf_n < res.minima[res.global].betaf_n) res.global = i;
    return res;
}

std::vector<ProfilePoint> profile_mu(const FiniteNConfig& c, const std::vector<double>& mu_grid)
{
    check_config(c);
    std::vector<ProfilePoint> out;
    out.reserve(mu_grid.size());
    for (double mu : mu_grid)
        out.push_back(profile_point(c, mu, nullptr));
    return out;
}

std::vector<ProfileMinimum> profile_minima(const FiniteNConfig& c, const std::vector<double>& mu_grid)
{
    const auto pts = profile_mu(c, mu_grid);
    std::vector<ProfileMinimum> mins;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!pts[i].converged || !pts[i + 1].converged) continue;
        if (!(pts[i].slope < 0.0 && pts[i + 1].slope > 0.0)) continue;
        const double mu = bracket_root([&](double m) { return profile_point(c, m, nullptr).slope; }, pts[i].mu,
                                       pts[i + 1].mu, 1e-9);
        mins.push_back({mu, profile_point(c, mu, nullptr).betaf_n});
    }
    return mins;
}

double find_crossing(int n, std::uint64_t seed)
{
    if (n < 10) throw Error(ErrorCode::InvalidParams, "find_crossing needs n >= 10");
    auto spike_wins = [&](double beta) {
        FiniteNConfig c;
        c.n = n;
        c.beta = beta;
        c.seed = seed;
        const auto spike = minimize_basin(c, Basin::Spike);
        if (spike.escaped) return false;
        const auto sea = minimize_basin(c, Basin::Sea);
        return sea.escaped || spike.betaf_n < sea.betaf_n;
    };
    double prev = -1.0;
    if (spike_wins(prev)) throw Error(ErrorCode::NoCrossing, "spike already global at beta = -1");
    for (double b = -1.05; b >= -6.0 - 1e-12; b -= 0.05) {
        if (spike_wins(b)) {
            double lo = b, hi = prev;
            while (hi - lo > 1e-3) {
                const double mid = 0.5 * (lo + hi);
                (spike_wins(mid) ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = b;
    }
    throw Error(ErrorCode::NoCrossing, "no exchange of stability in [-6, -1]");
}

bool spike_well_present(int n, double beta)
{
    FiniteNConfig c;
    c.n = n;
    c.beta = beta;
    const int pts = 36;
    const double a = 0.3, b = 0.98;
    std::vector<double> grid(pts), slope(pts);
    for (int i = 0; i < pts; ++i) {
        grid[i] = a + (b - a) * i / (pts - 1);
        auto p = profile_point(c, grid[i], nullptr);
        if (!p.converged) throw Error(ErrorCode::NoConvergence, "profile point failed at mu = " + std::to_string(grid[i]));
        slope[i] = p.slope;
        if (slope[i] < 0.0) return true;
    }
    // the dip is narrow just after birth: refine around the smallest grid slope
    const auto it = std::min_element(slope.begin(), slope.end());
    const auto i = static_cast<int>(it - slope.begin());
    double l = grid[std::max(i - 1, 0)], r = grid[std::min(i + 1, pts - 1)];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto s = [&](double mu) { return profile_point(c, mu, nullptr).slope; };
    double x1 = r - gr * (r - l), x2 = l + gr * (r - l);
    double f1 = s(x1), f2 = s(x2);
    for (int k = 0; k < 30; ++k) {
        if (std::min(f1, f2) < 0.0) return true;
        if (f1 < f2) {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - gr * (r - l);
            f1 = s(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + gr * (r - l);
            f2 = s(x2);
        }
    }
    return std::min(f1, f2) < 0.0;
}

namespace {

double bisect_birth(const std::function<bool(double)>& present)
{
    double prev = -1.0;
    if (present(prev)) throw Error(ErrorCode::NoBirth, "spike well already present at beta = -1");
    for (double b = -1.1; b >= -6.0 - 1e-12; b -= 0.1) {
        if (present(b)) {
            double lo = b, hi = prev;
            while (hi - lo > 1e-3) {
                const double mid = 0.5 * (lo + hi);
                (present(mid) ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = b;
    }
    throw Error(ErrorCode::NoBirth, "no spike well in [-6, -1]");
}

} // namespace

double find_birth(int n)
{
    if (n < 10) throw Error(ErrorCode::InvalidParams, "find_birth needs n >= 10");
    return bisect_birth([n](double b) { return spike_well_present(n, b); });
}

double find_birth_by_existence(int n)
{
    if (n < 10) throw Error(ErrorCode::InvalidParams, "find_birth needs n >= 10");
    return bisect_birth([n](double b) {
        FiniteNConfig c;
        c.n = n;
        c.beta = b;
        return !minimize_basin(c, Basin::Spike).escaped;
    });
}

double mu_theory_curve(int n, double beta)
{
    if (beta <= critical_points().beta_minus) return mu_of_beta(beta);
    const double b = beta / n;
    const double nn = n;
    if (b >= kBetaPlus) return (1.0 + std::sqrt(2.0 / b)) / nn;
    if (b >= kBetaG) return 2.0 / nn * delta_of_beta(b, BranchKind::StableWishart);
    if (b >= kBetaTurn) return 2.0 / nn * delta_of_beta(b, BranchKind::MetaTwoSidedLow);
    return 2.0 / nn * delta_of_beta(std::max(b, -2.0), BranchKind::MetaTwoSidedHigh);
}

} // namespace entrogas
