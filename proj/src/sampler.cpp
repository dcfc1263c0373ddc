#include "entrogas/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace entrogas {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t x)
{
    std::uint64_t z = x + kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// independent stream k of a master seed
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t k)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ (k * kGolden + 1)));
}

Spectrum induced_draw(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m(i, j) = {g(rng), g(rng)};
    const Eigen::MatrixXcd h = m * m.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
    for (auto& x : v)
        x = std::max(x, 0.0);
    const double tr = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v)
        x /= tr;
    return Spectrum(std::move(v));
}

struct ChainResult {
    Histogram hist;
    long long samples = 0;
    double purity_sum = 0.0, purity_sq = 0.0, max_sum = 0.0;
    long long accepts = 0, proposals = 0;
    double step = 0.0;
    double drift = 0.0;
    double trace_error = 0.0;
};

ChainResult run_chain(const MetropolisConfig& c, int chain)
{
    const int n = c.n;
    const double bn = c.beta * std::pow(double(n), c.alpha);
    auto rng = stream(c.seed, static_cast<std::uint64_t>(chain));
    auto init_rng = stream(c.seed ^ 0x5DEECE66Dull, static_cast<std::uint64_t>(chain));
    std::vector<double> l = induced_draw(n, init_rng).values();
    double lw = gibbs_log_weight(l, c.beta, c.alpha);

    ChainResult r;
    r.hist = Histogram(c.hist_lo, c.hist_hi, static_cast<std::size_t>(c.bins));
    double step = 0.1 / n;
    std::uniform_int_distribution<int> pick(0, n - 1), pick_other(0, n - 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const long long burn = c.sweeps / 5;
    long long window_acc = 0, window_prop = 0, since_check = 0;
    for (long long sweep = 0; sweep < c.sweeps; ++sweep) {
        const bool burning = sweep < burn;
        for (int k = 0; k < n; ++k) {
            const int i = pick(rng);
            int j = pick_other(rng);
            if (j >= i) ++j;
            const double eps = step * (2.0 * unit(rng) - 1.0);
            const double li = l[i] + eps, lj = l[j] - eps;
            ++window_prop;
            if (!burning) ++r.proposals;
            if (li > 0.0 && li < 1.0 && lj > 0.0 && lj < 1.0) {
                double d = -bn * (li * li + lj * lj - l[i] * l[i] - l[j] * l[j]);
                double lg = 0.0;
                for (int q = 0; q < n; ++q) {
                    if (q == i || q == j) continue;
                    lg += std::log(std::abs(li - l[q]) / std::abs(l[i] - l[q])) +
                          std::log(std::abs(lj - l[q]) / std::abs(l[j] - l[q]));
                }
                lg += std::log(std::abs(li - lj) / std::abs(l[i] - l[j]));
                d += 2.0 * lg;
                if (d >= 0.0 || std::log(unit(rng)) < d) {
                    l[i] = li;
                    l[j] = lj;
                    lw += d;
                    ++window_acc;
                    if (!burning) ++r.accepts;
                }
            }
            if (++since_check == 10000) {
                since_check = 0;
                const double full = gibbs_log_weight(l, c.beta, c.alpha);
                r.drift = std::max(r.drift, std::abs(full - lw));
                const double s = std::accumulate(l.begin(), l.end(), 0.0);
                r.trace_error = std::max(r.trace_error, std::abs(s - 1.0));
                for (auto& x : l)
                    x /= s;
                lw = gibbs_log_weight(l, c.beta, c.alpha);
            }
        }
        if (burning && (sweep + 1) % 10 == 0) {
            const double rate = double(window_acc) / double(window_prop);
            if (rate > 0.5) step *= 1.15;
            if (rate < 0.3) step *= 0.85;
            step = std::min(step, 0.5);
            window_acc = window_prop = 0;
        }
        if (!burning) {
            double p = 0.0, mx = 0.0;
            for (double x : l) {
                r.hist.add(n * x);
                p += x * x;
                mx = std::max(mx, x);
            }
            ++r.samples;
            r.purity_sum += p;
            r.purity_sq += p * p;
            r.max_sum += mx;
        }
    }
    r.step = step;
    return r;
}

void finish(SampleStats& s, double psum, double psq, double msum)
{
    if (s.samples == 0) return;
    const double k = double(s.samples);
    s.purity_mean = psum / k;
    s.purity_var = s.samples > 1 ? std::max(0.0, (psq - psum * psum / k) / (k - 1.0)) : 0.0;
    s.max_mean = msum / k;
}

} // namespace

std::vector<Spectrum> sample_induced(int n, int count, std::uint64_t seed, unsigned threads)
{
    if (n < 2 || count < 1) throw Error(ErrorCode::InvalidParams, "sample_induced needs n >= 2 and count >= 1");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(count));
    parallel_for(out.size(), threads, [&](std::size_t k) {
        auto rng = stream(seed, k);
        out[k] = induced_draw(n, rng).values();
    });
    std::vector<Spectrum> res;
    res.reserve(out.size());
    for (auto& v : out)
        res.emplace_back(std::move(v));
    return res;
}

double gibbs_log_weight(const std::vector<double>& l, double beta, int alpha)
{
    double q = 0.0, lg = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        q += l[i] * l[i];
        for (std::size_t j = i + 1; j < l.size(); ++j)
            lg += std::log(std::abs(l[i] - l[j]));
    }
    return -beta * std::pow(double(l.size()), alpha) * q + 2.0 * lg;
}

SampleStats metropolis_run(const MetropolisConfig& c)
{
    if (c.n < 2 || c.sweeps < 1 || c.chains < 1 || (c.alpha != 2 && c.alpha != 3) || c.bins < 1 ||
        !(c.hist_hi > c.hist_lo) || !std::isfinite(c.beta * std::pow(double(c.n), c.alpha)))
        throw Error(ErrorCode::InvalidParams, "metropolis_run: need n >= 2, sweeps >= 1, alpha in {2, 3}, finite beta");
    std::vector<ChainResult> chains(static_cast<std::size_t>(c.chains));
    parallel_for(chains.size(), c.threads, [&](std::size_t k) { chains[k] = run_chain(c, static_cast<int>(k)); });

    SampleStats s;
    s.histogram = Histogram(c.hist_lo, c.hist_hi, static_cast<std::size_t>(c.bins));
    double psum = 0, psq = 0, msum = 0;
    long long acc = 0, prop = 0;
    for (const auto& r : chains) {
        s.histogram.merge(r.hist);
        s.samples += r.samples;
        psum += r.purity_sum;
        psq += r.purity_sq;
        msum += r.max_sum;
        acc += r.accepts;
        prop += r.proposals;
        s.step_scale += r.step / c.chains;
        s.weight_drift = std::max(s.weight_drift, r.drift);
        s.trace_error = std::max(s.trace_error, r.trace_error);
    }
    s.acceptance = prop ? double(acc) / double(prop) : 0.0;
    finish(s, psum, psq, msum);
    return s;
}

SampleStats metropolis_run(int n, double beta, int alpha, long long sweeps, std::uint64_t seed)
{
    MetropolisConfig c;
    c.n = n;
    c.beta = beta;
    c.alpha = alpha;
    c.sweeps = sweeps;
    c.seed = seed;
    return metropolis_run(c);
}

SampleStats spectra_stats(const std::vector<Spectrum>& spectra, double lo, double hi, int bins)
{
    SampleStats s;
    s.histogram = Histogram(lo, hi, static_cast<std::size_t>(bins));
    double psum = 0, psq = 0, msum = 0;
    for (const auto& sp : spectra) {
        const double n = double(sp.n());
        for (double x : sp.values())
            s.histogram.add(n * x);
        const double p = purity(sp);
        psum += p;
        psq += p * p;
        msum += sp.max();
    }
    s.samples = static_cast<long long>(spectra.size());
    s.acceptance = 1.0;
    finish(s, psum, psq, msum);
    return s;
}

double ks_distance(const Histogram& h, const std::function<double(double)>& cdf)
{
    const long long tot = h.total();
    if (tot == 0) throw Error(ErrorCode::EmptyHistogram, "empty histogram");
    long long below = h.underflow;
    double d = 0.0;
    for (std::size_t k = 0; k <= h.bins(); ++k) {
        d = std::max(d, std::abs(double(below) / double(tot) - cdf(h.edge(k))));
        if (k < h.bins()) below += h.counts[k];
    }
    return d;
}

double ks_distance(const Histogram& a, const Histogram& b)
{
    if (a.bins() != b.bins() || a.lo != b.lo || a.hi != b.hi)
        throw Error(ErrorCode::InvalidParams, "histogram layouts differ");
    const long long ta = a.total(), tb = b.total();
    if (ta == 0 || tb == 0) throw Error(ErrorCode::EmptyHistogram, "empty histogram");
    long long ca = a.underflow, cb = b.underflow;
    double d = std::abs(double(ca) / double(ta) - double(cb) / double(tb));
    for (std::size_t k = 0; k < a.bins(); ++k) {
        ca += a.counts[k];
        cb += b.counts[k];
        d = std::max(d, std::abs(double(ca) / double(ta) - double(cb) / double(tb)));
    }
    return d;
}

double wishart_cdf(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 4.0) return 1.0;
    const double t = std::asin(std::sqrt(x / 4.0));
    return (2.0 * t + std::sin(2.0 * t)) / std::numbers::pi;
}

double semicircle_cdf(double x, double beta)
{
    if (!(beta > 0.0)) throw Error(ErrorCode::DomainError, "semicircle needs beta > 0");
    const double r = std::sqrt(2.0 / beta);
    const double y = (x - 1.0) / r;
    if (y <= -1.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return 0.5 + (y * std::sqrt(1.0 - y * y) + std::asin(y)) / std::numbers::pi;
}

} // namespace entrogas
