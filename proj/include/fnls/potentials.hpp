#pragma once

#include <vector>

#include "fnls/field.hpp"
#include "fnls/grid.hpp"

namespace fnls {

struct SolverConfig;  // solvers.hpp

enum class PotentialKind { zero, periodic_power, samples };

// Periodic potential with unit period per axis, vanishing exactly on the
// lattice x0 + Z^d and behaving like kappa*|x-x0|^p at the well:
//   V(x) = kappa * (sum_i sin^2(pi(x_i - x0_i))/pi^2)^(p/2).
struct PotentialSpec {
    PotentialKind kind = PotentialKind::zero;
    double kappa = 1.0;
    double p = 2.0;
    std::vector<double> x0;       // well location, unit-cell coords in [0,1)
    std::vector<cplx> samples;    // kind == samples only
};

void validate_potential_spec(const PotentialSpec& spec, int dim, double s);

// Grid compatibility: L integral and N divisible by L, so the unit cell
// holds an integer number of samples.
int cells_per_period(const PotentialSpec& spec, const Grid& grid);

// x0 snapped to the nearest grid point in unit-cell coordinates (keeps
// min V = 0 exact); second member is the snap distance.
std::pair<std::vector<double>, double> snapped_x0(const PotentialSpec& spec, const Grid& grid);

// All well positions x0 + z inside the torus, absolute coordinates.
std::vector<std::vector<double>> well_positions(const PotentialSpec& spec, const Grid& grid);

Field sample_potential(const PotentialSpec& spec, const Grid& grid);

struct V3Fit {
    double p_hat = 0.0;
    double kappa_hat = 0.0;
    int n_points = 0;
};

// Log-log fit of V against |x - x0| over [2h, 0.1]; recovers (p, kappa).
V3Fit validate_v3(const PotentialSpec& spec, const Grid& grid);

struct SpectralBottomReport {
    double value = 0.0;      // inf sigma((-Delta)^s + V) estimate
    double residual = 0.0;   // ||((-Delta)^s + V)phi - value*phi|| / ||phi||
    long iterations = 0;
    bool converged = false;
    Field eigenfield;
};

// Rayleigh-quotient minimization by the mass-normalized gradient flow with
// the nonlinearity switched off.
SpectralBottomReport spectral_bottom(const Field& V, double s, const SolverConfig& cfg);

struct V2Report {
    bool holds = false;      // min V strictly below the spectral bottom
    double min_v = 0.0;
    double bottom = 0.0;
    double margin = 0.0;
    double residual = 0.0;
};

V2Report validate_v2(const Field& V, double s, const SolverConfig& cfg);

}  // namespace fnls
