#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fnls/field.hpp"
#include "fnls/functionals.hpp"
#include "fnls/grid.hpp"

namespace fnls {

enum class InitKind { gaussian, file, lattice_multistart };

struct InitSpec {
    InitKind kind = InitKind::gaussian;
    double width = 1.0;
    std::vector<double> center;  // empty -> origin
    std::string path;            // kind == file
    int count = 2;               // random starts for lattice_multistart
};

struct SolverConfig {
    double dt = 0.5;
    double tol_grad = 1e-8;     // constrained-gradient residual
    double tol_energy = 1e-10;  // relative energy change over 50 steps (stall)
    long max_iter = 200000;
    double petviashvili_gamma = 0.0;  // <= 1 selects the default (alpha+1)/alpha
    InitSpec init;
    std::uint64_t rng_seed = 1;

    // flow details
    double nonlinear_coeff = 1.0;  // 0 turns the flow into the linear eigensolver
    double divergence_energy_floor = -1e6;
    double divergence_top_octave = 1e-3;
    bool check_gradient = true;
    bool keep_real_nonnegative = true;
    long residual_check_every = 25;
    int max_well_starts = 4;
    bool narrow_well_starts = true;  // add a concentrated seed per well

    // Multistart sets this to the incumbent energy: a run that cannot
    // plausibly descend below it is abandoned early.
    double abandon_energy = std::numeric_limits<double>::infinity();
};

struct SolveReport {
    bool converged = false;
    long iterations = 0;
    double residual = 0.0;
    EnergyBreakdown energy;
    double mass_value = 0.0;
    double boundary_tail = 0.0;
    double top_octave = 0.0;
    bool diverged = false;
    bool stalled = false;
    bool energy_monotone = true;
    double multiplier = 0.0;          // Rayleigh-type Lagrange multiplier
    double grad_check_max_rel = 0.0;  // finite-difference consistency check
    int grid_n = 0;
    double grid_length = 0.0;
    double final_dt = 0.0;
    std::string note;
};

// Fixed-point iteration with power-law stabilizing factor for
// (-Delta)^s u + u = |u|^alpha u. Output recentered (peak at origin),
// real and nonnegative.
std::pair<Field, SolveReport> petviashvili(const Grid& grid, double s, double alpha,
                                           const SolverConfig& cfg);

// Semi-implicit mass-normalized descent for
//   E(u) = 1/2||(-D)^{s/2}u||^2 + 1/2 int V|u|^2 - (alpha+2)^{-1}||u||^{a+2}_{a+2}
// on the sphere ||u||^2 = a. Steps that would raise the energy are retried
// with a halved dt; runaway focusing trips the divergence detectors.
std::pair<Field, SolveReport> normalized_gradient_flow(const Grid& grid, double s,
                                                       double alpha, const Field* V,
                                                       double a, const SolverConfig& cfg,
                                                       const Field* init = nullptr);

struct StartOutcome {
    double energy = 0.0;
    bool converged = false;
    bool diverged = false;
};

struct MultistartResult {
    Field minimizer;
    SolveReport report;
    std::vector<StartOutcome> starts;
    int best_start = -1;
    bool all_diverged = false;
};

// Gradient flow from Gaussians at well positions plus seeded random smooth
// starts (plus any caller-provided warm starts); keeps the lowest converged
// energy.
MultistartResult multistart_minimize(const Grid& grid, double s, double alpha,
                                     const Field* V, double a, const SolverConfig& cfg,
                                     const std::vector<std::vector<double>>* wells = nullptr,
                                     const std::vector<Field>* extra_starts = nullptr);

struct TestFunctionResult {
    Field u_tau;
    EnergyBreakdown energy;
    double mass_value = 0.0;
};

// Mass-a concentration profile: A * tau^{d/2} * phi(x - x0) Q0(tau(x - x0))
// with Q0 = Q/||Q||, phi a C^2 quintic cutoff (1 on |x|<=L/8, 0 on |x|>=L/4)
// and A fixed so mass == a exactly. E(u_tau) is a certified upper bound on
// the constrained infimum.
TestFunctionResult test_function_energy(double a, double tau,
                                        const std::vector<double>& x0, const Field& Q,
                                        const Field* V, double s, double alpha,
                                        const Grid& grid);

enum class WitnessVerdict { unbounded_below, inconclusive };

struct WitnessReport {
    WitnessVerdict verdict = WitnessVerdict::inconclusive;
    double slope = 0.0;
    std::string branch;  // "dilation" or "concentration"
    std::vector<double> dilation_energies;
    std::vector<double> concentration_energies;
    std::string note;
};

// Probes E along the L^2-preserving dilation family and (at the
// mass-critical exponent) along the concentration family; certifies
// "unbounded-below" from a strictly decreasing, negative, power-law tail.
WitnessReport unboundedness_witness(const Grid& grid, double s, double alpha,
                                    const Field* V, double a, const SolverConfig& cfg);

// Density peak with parabolic sub-grid refinement; throws on flat fields.
std::vector<double> density_peak(const Field& u);

// C^2 quintic blend: 1 on r <= r_in, 0 on r >= r_out.
double cutoff_profile(double r, double r_in, double r_out);

}  // namespace fnls
