#include "entrogas/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace entrogas {

const char* to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OutOfBranch: return "OutOfBranch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CollidingEigenvalues: return "CollidingEigenvalues";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::NoBirth: return "NoBirth";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorCode::BasinEscape: return "BasinEscape";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

Spectrum::Spectrum(std::vector<double> values) : v_(std::move(values))
{
    if (v_.empty())
        throw Error(ErrorCode::InvalidSpectrum, "empty spectrum");
    double sum = 0.0;
    for (double x : v_) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw Error(ErrorCode::InvalidSpectrum, "negative or non-finite eigenvalue");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw Error(ErrorCode::InvalidSpectrum, "trace differs from 1");
    std::sort(v_.begin(), v_.end(), std::greater<double>());
}

double purity(const Spectrum& s)
{
    double p = 0.0;
    for (double x : s.values())
        p += x * x;
    return p;
}

double bracket_root(const RealFn& f, double lo, double hi, double tol)
{
    double a = std::min(lo, hi), b = std::max(lo, hi);
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!(fa * fb < 0.0))
        throw Error(ErrorCode::NoSignChange, "f has the same sign at both ends of the bracket");

    bool last_bisect = true;
    double prev_width = b - a;
    for (int it = 0; it < 200; ++it) {
        double width = b - a;
        double mid = a + 0.5 * width;
        if (width <= tol || mid <= a || mid >= b)
            return std::abs(fa) < std::abs(fb) ? a : b;

        // secant only when the previous step shrank the bracket well enough
        double x = mid;
        if (last_bisect || width < 0.5 * prev_width) {
            double xs = b - fb * (b - a) / (fb - fa);
            double guard = 0.01 * width;
            if (std::isfinite(xs) && xs > a + guard && xs < b - guard)
                x = xs;
        }
        last_bisect = (x == mid);
        prev_width = width;

        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    throw Error(ErrorCode::NoConvergence, "bracket_root exceeded 200 iterations");
}

double integrate(const RealFn& f, double a, double b, double tol)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

double integrate_arcsine(const RealFn& g, double tol)
{
    const double h = std::numbers::pi / 2;
    return integrate([&](double t) { return g(std::sin(t)); }, -h, h, tol);
}

Histogram::Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins, 0)
{
    if (bins == 0 || !(hi_ > lo_))
        throw Error(ErrorCode::InvalidParams, "histogram needs bins > 0 and hi > lo");
}

long long Histogram::total() const
{
    long long t = underflow + overflow;
    for (long long c : counts)
        t += c;
    return t;
}

void Histogram::add(double x)
{
    if (x < lo) {
        ++underflow;
        return;
    }
    auto i = static_cast<std::size_t>((x - lo) / width());
    if (i >= counts.size()) {
        if (x > hi) {
            ++overflow;
            return;
        }
        i = counts.size() - 1;
    }
    ++counts[i];
}

void Histogram::merge(const Histogram& o)
{
    if (o.counts.size() != counts.size() || o.lo != lo || o.hi != hi)
        throw Error(ErrorCode::InvalidParams, "histogram layouts differ");
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] += o.counts[i];
    underflow += o.underflow;
    overflow += o.overflow;
}

const char* to_string(BranchKind k)
{
    switch (k) {
    case BranchKind::StableSemicircle: return "StableSemicircle";
    case BranchKind::StableWishart: return "StableWishart";
    case BranchKind::SeparableSea: return "SeparableSea";
    case BranchKind::MetaWishartProlong: return "MetaWishartProlong";
    case BranchKind::MetaTwoSidedLow: return "MetaTwoSidedLow";
    case BranchKind::MetaTwoSidedHigh: return "MetaTwoSidedHigh";
    case BranchKind::MetaSymmetric: return "MetaSymmetric";
    }
    return "Unknown";
}

std::optional<BranchKind> branch_from_string(const std::string& s)
{
    for (auto k : {BranchKind::StableSemicircle, BranchKind::StableWishart, BranchKind::SeparableSea,
                   BranchKind::MetaWishartProlong, BranchKind::MetaTwoSidedLow,
                   BranchKind::MetaTwoSidedHigh, BranchKind::MetaSymmetric})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

unsigned thread_budget()
{
    if (const char* e = std::getenv("ENTROGAS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job)
{
    const auto w = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads ? threads : thread_budget(), count)));
    if (w == 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i; (i = next++) < count;)
                    job(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace entrogas
