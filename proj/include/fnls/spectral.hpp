#pragma once

#include <optional>
#include <vector>

#include "fnls/fft.hpp"
#include "fnls/field.hpp"
#include "fnls/grid.hpp"

namespace fnls {

// Fourier symbol |k|^{2s} in FFT layout. The zero mode carries 0; the
// m = -N/2 bucket uses |k| of its positive counterpart.
struct FracMultiplier {
    Grid grid;
    double s = 0.5;
    std::vector<double> symbol;
};

FracMultiplier make_frac_multiplier(const Grid& grid, double s);

// (-Delta)^s u via the Fourier multiplier |k|^{2s}; s in (0,1], s = 1 being
// the classical-limit cross-check.
Field frac_laplacian(const Field& u, double s);
Field frac_laplacian(const Field& u, const FracMultiplier& mult);

// || (-Delta)^{s/2} u ||_{L^2}^2 = L^dim * sum |k|^{2s} |u_hat(k)|^2.
double half_frac_norm_sq(const Field& u, double s);
double half_frac_norm_sq(const std::vector<cplx>& coeff, const FracMultiplier& mult);

// Periodic rectangle-rule quadrature.
double mass(const Field& u);
double lp_norm(const Field& u, double q);
cplx inner(const Field& u, const Field& v);

// (I + tau*(-Delta)^s)^{-1} u by Fourier division; contraction in L^2.
Field resolvent_apply(const Field& u, double s, double tau);

struct DilateInfo {
    bool aliasing_risk = false;
    double top_octave_before = 0.0;
    double top_octave_after = 0.0;
};

// u_lambda(x) = lambda^{d/2} u(lambda x) by trigonometric interpolation at
// the stretched sample points. Flags (does not block) aliasing risk when
// lambda > 1 pushes energy into the top octave.
Field dilate(const Field& u, double lambda, DilateInfo* info = nullptr);

// Circular translation u(. - offset) by a Fourier phase factor; exact for
// lattice offsets. offset has one entry per axis.
Field shift(const Field& u, const std::vector<double>& offset);

// Energy fraction carried by modes with per-axis |m| >= N/4 (top octave);
// the resolution certificate requires this to be < 1e-8.
double top_octave_fraction(const Field& u);
double top_octave_fraction(const std::vector<cplx>& coeff, const Grid& grid);

// Mass fraction outside the ball |x| <= L/4; records how much of the field
// touches the torus boundary.
double boundary_tail_fraction(const Field& u);

// Smallest |k| radius containing all but `tail` of the spectral energy.
double effective_bandwidth(const Field& u, double tail = 1e-12);

// Evaluate the trigonometric interpolant of a sampled line at fractional
// sample positions (index units, periodic). Core of dilate/resampling.
std::vector<cplx> trig_interpolate_line(const std::vector<cplx>& line,
                                        const std::vector<double>& index_targets);

// Evaluate a field's interpolant on the tensor product of per-axis physical
// coordinates (arbitrary counts; coordinates wrap periodically). Row-major
// output of size prod(axis_coords[a].size()).
std::vector<cplx> interpolate_tensor(const Field& u,
                                     const std::vector<std::vector<double>>& axis_coords);

// Same-grid resampling convenience (each coordinate set must have N entries).
Field resample_tensor(const Field& u, const std::vector<std::vector<double>>& axis_coords);

// Spectral embedding onto a finer grid with the same side length (zero
// padding in Fourier space; exact for band-limited fields).
Field regrid(const Field& u, const Grid& fine);

// Constructors used across solvers and tests.
Field constant_field(const Grid& grid, cplx value);
Field make_gaussian(const Grid& grid, double width,
                    const std::vector<double>& center, double amplitude = 1.0);
Field single_mode(const Grid& grid, const std::vector<int>& mode);

// Rescale so that mass(u) == a exactly (up to rounding).
void scale_to_mass(Field& u, double a);

}  // namespace fnls
