#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "entrogas/core.hpp"

namespace entrogas {

// Trace-normalized eigenvalues of G G^dagger with G an n x n complex Ginibre matrix.
// Draw k uses its own stream, so the result does not depend on the thread count.
std::vector<Spectrum> sample_induced(int n, int count, std::uint64_t seed, unsigned threads = 0);

// -beta N^alpha sum l^2 + 2 sum_{i<j} ln|l_i - l_j|
double gibbs_log_weight(const std::vector<double>& l, double beta, int alpha);

struct MetropolisConfig {
    int n = 64;
    double beta = 0.0;
    int alpha = 3;
    long long sweeps = 10000; // per chain; one sweep is n proposals
    std::uint64_t seed = 0;
    int chains = 1;
    unsigned threads = 0;
    // histogram of the scaled eigenvalues x = n lambda
    double hist_lo = 0.0;
    double hist_hi = 5.0;
    int bins = 100;
};

struct SampleStats {
    Histogram histogram;
    long long samples = 0; // recorded spectra
    double purity_mean = 0.0;
    double purity_var = 0.0;
    double max_mean = 0.0; // mean largest eigenvalue
    double acceptance = 0.0;
    double step_scale = 0.0; // after adaptation, averaged over chains
    double weight_drift = 0.0; // worst incremental vs recomputed log-weight gap
    double trace_error = 0.0; // worst |sum lambda - 1| seen before each renormalization
};

SampleStats metropolis_run(const MetropolisConfig& config);
SampleStats metropolis_run(int n, double beta, int alpha, long long sweeps, std::uint64_t seed);

// histogram of n lambda plus purity statistics for a batch of spectra
SampleStats spectra_stats(const std::vector<Spectrum>& spectra, double lo, double hi, int bins);

// sup |F_emp - F| over the bin edges
double ks_distance(const Histogram& h, const std::function<double(double)>& cdf);
// two-sample version; layouts must match
double ks_distance(const Histogram& a, const Histogram& b);

// reference CDFs in the scaled variable x = n lambda
double wishart_cdf(double x);
double semicircle_cdf(double x, double beta);

} // namespace entrogas
