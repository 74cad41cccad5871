#pragma once

#include <string>
#include <vector>

#include "fnls/field.hpp"
#include "fnls/grid.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

// Mass sweep a -> a* at the mass-critical exponent alpha = 4s/d.
struct SweepConfig {
    int dim = 1;
    double s = 0.5;
    PotentialSpec potential;
    std::vector<int> schedule_j = {2, 3, 4, 5, 6, 7, 8, 9, 10};  // a = a*(1 - 2^-j)
    std::vector<double> masses;  // explicit override of the schedule
    SolverConfig solver;

    int grid_n = 1024;
    double grid_length = 16.0;
    int max_grid_n = 8192;

    int q_grid_n = 32768;         // reference ground-state grid: the schedule
                                  // masses inherit its critical-mass accuracy,
                                  // so the torus must be large
    double q_grid_length = 1024.0;

    bool continuation = true;  // warm-start each mass from the previous minimizer
    int threads = 1;
};

struct SweepRecord {
    double a = 0.0;
    double beta = 0.0;     // 1 - (a/a*)^{2s/d}
    double eps = 0.0;      // ||(-Delta)^{s/2} u_a||^{-1/s}
    double energy = 0.0;   // I(a) estimate
    double kinetic = 0.0;
    double potential_integral = 0.0;  // int V |u_a|^2
    double nonlinear = 0.0;
    std::vector<double> x_a;  // unit-cell part of the peak
    std::vector<long> z_a;    // lattice part
    double profile_l2 = 0.0;
    double profile_hs = 0.0;
    int grid_n = 0;
    double grid_len = 0.0;
    bool converged = false;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;  // log of the fitted constant
    double r2 = 0.0;
};

struct SweepSummary {
    double a_star = 0.0;
    double lambda0_predicted = 0.0;
    double lambda0_fitted = 0.0;
    FitResult energy_fit;   // slope ~ p/(2s+p), exp(intercept) = C2
    FitResult kinetic_fit;  // slope ~ -2s/(2s+p)
    double c3 = 0.0;        // sup of (2*kin/a) * beta^{2s/(2s+p)}
    double c4 = 0.0;        // inf of ||u||^{4s/d+2} / a^{2s/d+1} * beta^{2s/(2s+p)}
    bool partial = false;
    std::string note;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    SweepSummary summary;
    Field q_reference;
    Field last_profile;  // w_a of the last converged record
};

// lambda0 = (kappa*p/d * int |x|^p Q0^2 dx)^{1/(2s+p)} with Q0 = Q/||Q||;
// the moment uses grid quadrature over |x| <= L/4 plus an analytic tail from
// the fitted decay exponent. A tail correction above 10% is an error.
double lambda0(double kappa, double p, double s, const Field& Q);

// Same moment with the tail bookkeeping exposed (for diagnostics/tests).
struct MomentReport {
    double moment = 0.0;
    double tail_correction = 0.0;
    double decay_exponent = 0.0;
};
MomentReport weighted_moment(double p, const Field& Q);

struct RecenterResult {
    Field centered;
    std::vector<double> x_a;  // in [0,1)^d
    std::vector<long> z_a;
};

// Density-peak recentering with the peak position split as x_a + z_a in
// unit-cell coordinates.
RecenterResult recenter_and_split(const Field& u_a);

// w_a(x) = beta^{d/(2(2s+p))} u_a(beta^{1/(2s+p)} x): the L^2-critical
// rescaling is exactly the dilation by lambda = beta^{1/(2s+p)}.
Field rescaled_profile(const Field& u_centered, double beta, double p, double s);

// Least squares of log(I(a)/a) on log(beta_a) over the last (up to) 5
// converged records; refuses non-monotone energies.
FitResult fit_energy_exponent(const std::vector<SweepRecord>& records);

struct KineticFit {
    FitResult fit;  // slope ~ -2s/(2s+p)
    double c3 = 0.0;
    double c4 = 0.0;
    double alpha = 0.0;
};
KineticFit fit_kinetic_exponent(const std::vector<SweepRecord>& records, double s, double p);

struct EnergyLimitResult {
    double limit_estimate = 0.0;  // last I(a)/a
    bool decreasing = false;
    bool bounded = false;  // last value below margin * C2 * beta^{p/(2s+p)}
    bool passes = false;
};
EnergyLimitResult critical_energy_limit(const std::vector<SweepRecord>& records,
                                        double half_min_v, double p, double s, double c2,
                                        double margin = 2.0);

SweepResult run_sweep(const SweepConfig& cfg);

// CSV with the exact column contract (one record per row).
std::string sweep_csv(const std::vector<SweepRecord>& records, int dim);

}  // namespace fnls
