#pragma once

#include <optional>
#include <vector>

#include "fnls/field.hpp"
#include "fnls/grid.hpp"

namespace fnls {

// Largest admissible nonlinearity exponent: 4s/(d-2s) when d > 2s, else
// unbounded. Throws when alpha falls outside (0, s*).
double alpha_supremum(int dim, double s);
void require_admissible_alpha(int dim, double s, double alpha);

struct EnergyBreakdown {
    double kinetic = 0.0;    // (1/2) ||(-Delta)^{s/2} u||^2
    double potential = 0.0;  // (1/2) int V |u|^2
    double nonlinear = 0.0;  // (alpha+2)^{-1} ||u||_{alpha+2}^{alpha+2}
    double total = 0.0;      // kinetic + potential - nonlinear
};

// V == nullptr means zero potential.
EnergyBreakdown energy(const Field& u, const Field* V, double s, double alpha);

// Scale-invariant Weinstein quotient; its infimum over nonzero fields is
// 1/C_opt for the sharp interpolation inequality.
double weinstein(const Field& u, double s, double alpha);

struct GnConstant {
    double from_weinstein = 0.0;  // 1 / J(Q_alpha)
    double closed_form = 0.0;     // explicit expression in ||Q_alpha||_{L^2}
    double rel_disagreement = 0.0;
};

// Both routes to the sharp constant; throws NotGroundState when they
// disagree by more than 1e-2 (a non-converged input).
struct NotGroundState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
GnConstant gn_constant(const Field& Q_alpha, double s, double alpha);

struct PohozaevReport {
    double r1 = 0.0;  // residual of ||(-D)^{s/2}Q||^2 = d*a/(2s(a+2)) ||Q||_{a+2}^{a+2}
    double r2 = 0.0;  // residual of ||(-D)^{s/2}Q||^2 = d*a/(4s-(d-2s)a) ||Q||_2^2
    double half_norm_sq = 0.0;
    double mass_sq = 0.0;     // ||Q||_{L^2}^2
    double lp_power = 0.0;    // ||Q||_{alpha+2}^{alpha+2}
    bool ground_state_like = false;
};

PohozaevReport pohozaev_check(const Field& Q_alpha, double s, double alpha);

// a* = ||Q||_{L^2}^2 for the mass-critical ground state.
double critical_mass(const Field& Q);

// Largest mass any ball of radius R captures (max over grid centers of the
// circular convolution of |u|^2 with the ball indicator).
double concentration_function(const Field& u, double R);

struct DecayFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    int n_points = 0;
    double curvature = 0.0;     // quadratic coefficient of the log-log fit
    bool non_power_law = false; // |curvature| > 0.1 (e.g. Gaussian steepening)
};

// Least-squares slope of log(max_angle |Q|) vs log|x| over radius bins of
// width h inside [r_lo, r_hi]; a ground state should give about -(d+2s).
DecayFit decay_fit(const Field& Q, double r_lo, double r_hi);

// Radially symmetric decreasing rearrangement on the grid: the multiset of
// |u| values reassigned to cells sorted by distance from the origin.
Field rearrange_decreasing(const Field& u);

}  // namespace fnls
