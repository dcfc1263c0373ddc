#pragma once

#include <utility>

#include "entrogas/core.hpp"

namespace entrogas {

// Feasible region of the (delta, m) plane at fixed beta.
struct DomainSpec {
    double beta;

    explicit DomainSpec(double b) : beta(b) {}

    double gamma1_plus(double delta) const;
    double gamma1_minus(double delta) const;
    // only defined for beta < 0 and |beta| delta^2 <= 2
    double gamma2_plus(double delta) const;
    double gamma2_minus(double delta) const;
    // tangency of Gamma2 with Gamma1; infinite for beta >= 0
    double delta_star() const;
    // right end of the domain, sqrt(2/|beta|)
    double delta_max() const;
    double h_plus(double delta) const;
    double h_minus(double delta) const;
    std::pair<double, double> corner_right() const { return {delta_max(), 1.0}; }
};

double phi_general(double m, double delta, double beta, double x);

struct DensityRoots {
    double x_minus = 0.0;
    double x_plus = 0.0;
    double Delta = 0.0;
    bool complex = false;
};

DensityRoots density_roots(double m, double delta, double beta);

bool feasible(double m, double delta, double beta, double tol = 1e-12);

double free_energy_surface(double m, double delta, double beta);
std::pair<double, double> free_energy_gradient(double m, double delta, double beta);

enum class SaddleLocation { Interior, UpperBoundary, LowerBoundary, CornerRight, CornerCut };
const char* to_string(SaddleLocation l);

struct SaddleSolution {
    double m;
    double delta;
    double beta;
    double betaf;
    double zeta;
    SaddleLocation location;
};

SaddleSolution minimize_landscape(double beta);

double sea_reduced_free_energy(double m, double delta, double beta);

} // namespace entrogas
