#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "entrogas/core.hpp"

namespace entrogas {

inline constexpr double kBetaPlus = 2.0;
inline constexpr double kBetaG = -2.0 / 27.0;
// -3/2 + sqrt(2): where the two-sided branches meet at delta = 2 + sqrt(2)
inline constexpr double kBetaTurn = -1.5 + 1.4142135623730950488;
inline constexpr double kDeltaTurn = 2.0 + 1.4142135623730950488;

struct BranchWindow {
    BranchKind kind;
    double beta_lo, beta_hi;
    double delta_lo, delta_hi;
};

const std::vector<BranchWindow>& branch_table();
const BranchWindow& branch_window(BranchKind kind);
bool in_window(double beta, BranchKind kind);

double delta_of_beta(double beta, BranchKind kind);
double beta_of_delta(double delta, BranchKind kind);

// Closed radical form of the Wishart inversion; |Re| of the principal value.
double wishart_delta_radical(double beta);

enum class SeaVariant { Stable, Bare, Spike };

ThermoPoint thermo(double beta, BranchKind kind);
ThermoPoint thermo_at_delta(double delta, BranchKind kind);
ThermoPoint thermo_separable(double beta, SeaVariant variant = SeaVariant::Stable);

double density(const ThermoPoint& point, double x);

double mu_of_beta(double beta);
CriticalSet critical_points();

enum class EnergyRegime { ScaledByN, Finite };
double entropy_of_energy(double u, EnergyRegime regime);
double entropy_of_purity(double pi, int n);
double volume_of_purity(double pi, int n);
std::pair<double, double> lambda_extremes(double pi, int n);

std::vector<std::int64_t> planar_map_series(int order);

enum class CriticalSide { BetaPlus, BetaG };

struct ExpansionReport {
    CriticalSide side;
    double first_derivative_jump = 0.0;
    double second_derivative_jump = 0.0;
    double exponent = 0.0;
    double coefficient = 0.0;
    // same fit on the delta < 3 side of the fold
    double exponent_physical = 0.0;
    double coefficient_physical = 0.0;
    double residual = 0.0;
};

ExpansionReport critical_expansion_check(CriticalSide side);

enum class Scaling { Alpha3, Alpha2 };
BranchKind stable_branch(double beta, Scaling scaling);

} // namespace entrogas
