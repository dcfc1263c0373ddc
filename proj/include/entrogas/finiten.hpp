#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entrogas/core.hpp"

namespace entrogas {

struct FiniteNConfig {
    int n = 30;
    double beta = -1.0; // O(1) purity scaling
    int max_iters = 500;
    double grad_tol = 1e-9;
    std::uint64_t seed = 0;
    double jitter = 0.01;
};

enum class Basin { Sea, Spike };
const char* to_string(Basin b);

struct LocalMinimum {
    Spectrum spectrum;
    double mu;
    double betaf_n; // beta f_N - ln N
    Basin basin;
    double kkt_residual;
    bool escaped; // converged into the other basin
    bool on_wall; // smallest eigenvalue pinned at zero
    int iterations;
};

struct FiniteNResult {
    int n;
    double beta;
    std::vector<LocalMinimum> minima;
    std::size_t global;
};

// beta sum l^2 - (2/N^2) sum_{i<j} ln|l_i - l_j|
double free_energy_n(const Spectrum& s, double beta);
std::vector<double> free_energy_n_gradient(const Spectrum& s, double beta);

LocalMinimum minimize_basin(const FiniteNConfig& config, Basin basin);
// both basins; escaped runs are dropped and duplicates merged
FiniteNResult analyze_finite_n(const FiniteNConfig& config);

struct ProfilePoint {
    double mu;
    double betaf_n;
    double slope; // d(beta f_N)/d mu from the envelope theorem
    bool converged;
    std::string error;
};

std::vector<ProfilePoint> profile_mu(const FiniteNConfig& config, const std::vector<double>& mu_grid);

struct ProfileMinimum {
    double mu;
    double betaf_n;
};
// local minima of the profile, refined between grid points
std::vector<ProfileMinimum> profile_minima(const FiniteNConfig& config, const std::vector<double>& mu_grid);

double find_crossing(int n, std::uint64_t seed = 0);

// Profile-based detector: the envelope slope turns negative somewhere in mu >= 0.3.
bool spike_well_present(int n, double beta);
double find_birth(int n);
// Independent detector: a minimization started at mu = 0.7 stays in the spike basin.
double find_birth_by_existence(int n);

double mu_theory_curve(int n, double beta);

} // namespace entrogas
