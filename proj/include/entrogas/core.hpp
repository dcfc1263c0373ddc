#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace entrogas {

enum class ErrorCode {
    NoSignChange,
    NoConvergence,
    OutOfBranch,
    DomainError,
    OrderTooLarge,
    Infeasible,
    CollidingEigenvalues,
    NoCrossing,
    NoBirth,
    InvalidParams,
    EmptyHistogram,
    InvalidSpectrum,
    BasinEscape,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Eigenvalues of a unit-trace density matrix, kept in descending order.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> values);

    std::size_t n() const noexcept { return v_.size(); }
    const std::vector<double>& values() const noexcept { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }
    double max() const { return v_.front(); }
    double min() const { return v_.back(); }

private:
    std::vector<double> v_;
};

double purity(const Spectrum& s);

using RealFn = std::function<double(double)>;

// Bisection with secant refinement. Bit-reproducible for a given input.
double bracket_root(const RealFn& f, double lo, double hi, double tol = 1e-12);

// Integral over (-1,1) of g(x)/sqrt(1-x^2) evaluated as the integral of g(sin t) over (-pi/2,pi/2).
double integrate_arcsine(const RealFn& g, double tol = 1e-9);

// ENTROGAS_THREADS if set and positive, else the hardware concurrency
unsigned thread_budget();
// job(i) for i in [0, count) on up to `threads` workers (0 = thread_budget()); rethrows the first failure
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);
// Plain adaptive integral on [a,b].
double integrate(const RealFn& f, double a, double b, double tol = 1e-9);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<long long> counts;
    long long underflow = 0;
    long long overflow = 0;

    Histogram() = default;
    Histogram(double lo, double hi, std::size_t bins);

    std::size_t bins() const noexcept { return counts.size(); }
    double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
    double edge(std::size_t i) const { return lo + width() * static_cast<double>(i); }
    long long total() const;
    void add(double x);
    void merge(const Histogram& other);
};

enum class BranchKind {
    StableSemicircle,
    StableWishart,
    SeparableSea,
    MetaWishartProlong,
    MetaTwoSidedLow,
    MetaTwoSidedHigh,
    MetaSymmetric,
};

const char* to_string(BranchKind k);
std::optional<BranchKind> branch_from_string(const std::string& s);

struct BranchDensity {
    BranchKind kind;
    double beta;
    double m;
    double delta;
    std::optional<double> mu;
    double a() const { return m - delta; }
    double b() const { return m + delta; }
};

struct ThermoPoint {
    double beta = 0.0;
    BranchKind kind = BranchKind::StableWishart;
    double u = 0.0;
    double s = 0.0;
    double betaf = 0.0;
    double m = 0.0;
    double delta = 0.0;
    std::optional<double> mu;
    double zeta = 0.0;

    BranchDensity density() const { return {kind, beta, m, delta, mu}; }
};

struct CriticalSet {
    double beta_plus;
    double beta_g;
    double beta_minus;
    double mu_minus;
};

} // namespace entrogas
