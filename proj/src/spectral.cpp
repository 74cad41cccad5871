#include "fnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fnls {

namespace {

void require_s(double s, bool allow_one) {
    if (!(s > 0.0) || s > 1.0 || (!allow_one && s == 1.0))
        throw std::invalid_argument("fractional order s must lie in (0,1" +
                                    std::string(allow_one ? "]" : ")"));
}

}  // namespace

FracMultiplier make_frac_multiplier(const Grid& grid, double s) {
    require_s(s, true);
    FracMultiplier mult{grid, s, std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < mult.symbol.size(); ++i) {
        double k2 = grid.wavenumber_sq(i);
        mult.symbol[i] = k2 == 0.0 ? 0.0 : std::pow(k2, s);
    }
    return mult;
}

Field frac_laplacian(const Field& u, const FracMultiplier& mult) {
    if (!(u.grid == mult.grid))
        throw std::invalid_argument("frac_laplacian: multiplier grid mismatch");
    auto coeff = forward_fft(u);
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] *= mult.symbol[i];
    return inverse_fft(coeff, u.grid, u.is_real_hint);
}

Field frac_laplacian(const Field& u, double s) {
    return frac_laplacian(u, make_frac_multiplier(u.grid, s));
}

double half_frac_norm_sq(const std::vector<cplx>& coeff, const FracMultiplier& mult) {
    double vol = 1.0;
    for (int a = 0; a < mult.grid.dim; ++a) vol *= mult.grid.length;
    double sum = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i)
        sum += mult.symbol[i] * std::norm(coeff[i]);
    return vol * sum;
}

double half_frac_norm_sq(const Field& u, double s) {
    auto mult = make_frac_multiplier(u.grid, s);
    return half_frac_norm_sq(forward_fft(u), mult);
}

double mass(const Field& u) {
    double sum = 0.0;
    for (const auto& v : u.values) sum += std::norm(v);
    return sum * u.grid.cell_volume();
}

double lp_norm(const Field& u, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lp_norm: q must be >= 1");
    double sum = 0.0;
    for (const auto& v : u.values) sum += std::pow(std::abs(v), q);
    return std::pow(sum * u.grid.cell_volume(), 1.0 / q);
}

cplx inner(const Field& u, const Field& v) {
    u.check_layout(v, "inner");
    cplx sum{0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i)
        sum += u.values[i] * std::conj(v.values[i]);
    return sum * u.grid.cell_volume();
}

Field resolvent_apply(const Field& u, double s, double tau) {
    require_s(s, true);
    if (!(tau > 0)) throw std::invalid_argument("resolvent_apply: tau must be positive");
    auto mult = make_frac_multiplier(u.grid, s);
    auto coeff = forward_fft(u);
    for (std::size_t i = 0; i < coeff.size(); ++i)
        coeff[i] /= 1.0 + tau * mult.symbol[i];
    return inverse_fft(coeff, u.grid, u.is_real_hint);
}

namespace {

int next_pow2(int v) {
    int p = 1;
    while (p < v) p *= 2;
    return p;
}

// Chirp phase t^2 * delta / 2 reduced mod 2*pi before polar().
cplx chirp(double delta_half, long t) {
    const double two_pi = 2.0 * std::numbers::pi;
    return std::polar(1.0, std::fmod(delta_half * static_cast<double>(t) *
                                     static_cast<double>(t), two_pi));
}

// Bluestein evaluation of G_j = sum_k P_k e^{i delta j k}, j = 0..count-1.
std::vector<cplx> chirp_z(const std::vector<cplx>& p, double delta, std::size_t count) {
    const int kk = static_cast<int>(p.size());
    const int sz = next_pow2(kk + static_cast<int>(count));
    const double dh = 0.5 * delta;
    Grid gs{1, sz, static_cast<double>(sz)};
    Field fa(gs), fb(gs);
    for (int k = 0; k < kk; ++k)
        fa.values[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] * chirp(dh, k);
    for (long t = -(kk - 1); t < static_cast<long>(count); ++t) {
        const std::size_t idx = static_cast<std::size_t>((t + sz) % sz);
        fb.values[idx] = std::conj(chirp(dh, t));
    }
    auto ca = forward_fft(fa);
    auto cb = forward_fft(fb);
    for (int i = 0; i < sz; ++i)
        ca[static_cast<std::size_t>(i)] *= cb[static_cast<std::size_t>(i)] * static_cast<double>(sz);
    Field conv = inverse_fft(ca, gs);
    std::vector<cplx> out(count);
    for (std::size_t j = 0; j < count; ++j)
        out[j] = conv.values[j] * chirp(dh, static_cast<long>(j));
    return out;
}

}  // namespace

// Evaluate the interpolant at uniformly spaced fractional positions
// idx0 + j*didx (index units) in O(n log n) via the chirp-z transform.
std::vector<cplx> trig_resample_affine(const std::vector<cplx>& line, double idx0,
                                       double didx, std::size_t count) {
    const int n = static_cast<int>(line.size());
    Grid g1{1, n, static_cast<double>(n)};
    Field tmp(g1);
    tmp.values = line;
    auto coeff = forward_fft(tmp);

    const int m_max = n / 2 - 1;
    const cplx c_nyq = coeff[static_cast<std::size_t>(n / 2)];
    const double theta0 = 2.0 * std::numbers::pi * idx0 / n;
    const double delta = 2.0 * std::numbers::pi * didx / n;

    // P_k = c_{k - m_max} e^{i (k - m_max) theta0}, so that
    // u(theta_j) = e^{-i j m_max delta} e^{-i m_max theta0} ... folded below.
    std::vector<cplx> p(static_cast<std::size_t>(2 * m_max + 1));
    for (int k = 0; k <= 2 * m_max; ++k) {
        const int m = k - m_max;
        const std::size_t idx = static_cast<std::size_t>(m >= 0 ? m : m + n);
        p[static_cast<std::size_t>(k)] = coeff[idx] * std::polar(1.0, m * theta0);
    }
    auto g = chirp_z(p, delta, count);
    std::vector<cplx> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double theta = theta0 + static_cast<double>(j) * delta;
        const cplx unfold =
            std::polar(1.0, -m_max * (static_cast<double>(j) * delta));
        out[j] = g[j] * unfold + c_nyq * std::cos(0.5 * n * theta);
    }
    return out;
}

std::vector<cplx> trig_interpolate_line(const std::vector<cplx>& line,
                                        const std::vector<double>& index_targets) {
    const int n = static_cast<int>(line.size());

    // Affine target sequences (every dilation/resampling in this codebase)
    // take the O(n log n) chirp-z route.
    if (index_targets.size() >= 4) {
        const double idx0 = index_targets.front();
        const double didx = index_targets[1] - index_targets[0];
        bool affine = true;
        for (std::size_t j = 2; j < index_targets.size(); ++j) {
            const double expect = idx0 + static_cast<double>(j) * didx;
            if (std::abs(index_targets[j] - expect) >
                1e-9 * (std::abs(expect) + 1.0)) {
                affine = false;
                break;
            }
        }
        if (affine) return trig_resample_affine(line, idx0, didx, index_targets.size());
    }

    Grid g1{1, n, static_cast<double>(n)};  // index-space torus of length n
    Field tmp(g1);
    tmp.values = line;
    auto coeff = forward_fft(tmp);

    // Series over m in [-n/2+1, n/2-1] plus the Nyquist bucket handled as a
    // cosine (the symmetric treatment of the m = -N/2 mode).
    const int m_max = n / 2 - 1;
    const cplx c_nyq = coeff[static_cast<std::size_t>(n / 2)];
    std::vector<cplx> out(index_targets.size());
    const double two_pi_over_n = 2.0 * std::numbers::pi / n;
    for (std::size_t t = 0; t < index_targets.size(); ++t) {
        const double theta = two_pi_over_n * index_targets[t];
        const cplx w = std::polar(1.0, theta);
        // Horner over ascending m = -m_max .. m_max.
        cplx acc = coeff[static_cast<std::size_t>(m_max)];
        for (int m = m_max - 1; m >= -m_max; --m) {
            const std::size_t idx = static_cast<std::size_t>(m >= 0 ? m : m + n);
            acc = acc * w + coeff[idx];
        }
        acc *= std::polar(1.0, -theta * m_max);
        acc += c_nyq * std::cos(0.5 * n * theta);
        out[t] = acc;
    }
    return out;
}

std::vector<cplx> interpolate_tensor(const Field& u,
                                     const std::vector<std::vector<double>>& axis_coords) {
    if (static_cast<int>(axis_coords.size()) != u.grid.dim)
        throw std::invalid_argument("interpolate_tensor: need one coordinate set per axis");
    const int n = u.grid.n;
    const double h = u.grid.spacing();
    const double half = 0.5 * u.grid.length;

    auto to_index = [&](const std::vector<double>& xs) {
        std::vector<double> idx(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) idx[i] = (xs[i] + half) / h;
        return idx;
    };

    if (u.grid.dim == 1) return trig_interpolate_line(u.values, to_index(axis_coords[0]));

    // Separable 2D pass: interpolate along axis 1 (contiguous rows), then axis 0.
    const auto idx0 = to_index(axis_coords[0]);
    const auto idx1 = to_index(axis_coords[1]);
    const std::size_t m0 = idx0.size(), m1 = idx1.size();

    std::vector<cplx> stage(static_cast<std::size_t>(n) * m1);
    std::vector<cplx> line(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::copy_n(u.values.begin() + static_cast<std::size_t>(i) * n, n, line.begin());
        auto res = trig_interpolate_line(line, idx1);
        std::copy(res.begin(), res.end(), stage.begin() + static_cast<std::size_t>(i) * m1);
    }
    std::vector<cplx> out(m0 * m1);
    for (std::size_t j = 0; j < m1; ++j) {
        for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = stage[static_cast<std::size_t>(i) * m1 + j];
        auto res = trig_interpolate_line(line, idx0);
        for (std::size_t i = 0; i < m0; ++i) out[i * m1 + j] = res[i];
    }
    return out;
}

Field resample_tensor(const Field& u, const std::vector<std::vector<double>>& axis_coords) {
    for (const auto& c : axis_coords)
        if (c.size() != static_cast<std::size_t>(u.grid.n))
            throw std::invalid_argument("resample_tensor: target count must equal N");
    Field out(u.grid, u.is_real_hint);
    out.values = interpolate_tensor(u, axis_coords);
    return out;
}

Field dilate(const Field& u, double lambda, DilateInfo* info) {
    if (!(lambda > 0)) throw std::invalid_argument("dilate: lambda must be positive");
    if (lambda == 1.0) {
        if (info) {
            info->aliasing_risk = false;
            info->top_octave_before = info->top_octave_after = top_octave_fraction(u);
        }
        return u;
    }
    std::vector<std::vector<double>> targets(u.grid.dim);
    for (int a = 0; a < u.grid.dim; ++a) {
        targets[a].resize(u.grid.n);
        for (int j = 0; j < u.grid.n; ++j) targets[a][j] = lambda * u.grid.coord(j);
    }
    Field out = resample_tensor(u, targets);
    // Stretched points beyond the fundamental cell would sample the
    // neighboring period of the interpolant; the dilated representative of a
    // localized field is zero there instead.
    if (lambda > 1.0) {
        const double half = 0.5 * u.grid.length;
        const int n = u.grid.n;
        auto outside = [&](double t) { return t < -half || t >= half; };
        if (u.grid.dim == 1) {
            for (int j = 0; j < n; ++j)
                if (outside(targets[0][static_cast<std::size_t>(j)]))
                    out.values[static_cast<std::size_t>(j)] = 0.0;
        } else {
            for (int i0 = 0; i0 < n; ++i0)
                for (int i1 = 0; i1 < n; ++i1)
                    if (outside(targets[0][static_cast<std::size_t>(i0)]) ||
                        outside(targets[1][static_cast<std::size_t>(i1)]))
                        out.values[static_cast<std::size_t>(i0) * n + i1] = 0.0;
        }
    }
    const double amp = std::pow(lambda, 0.5 * u.grid.dim);
    for (auto& v : out.values) v *= amp;
    if (info) {
        info->top_octave_before = top_octave_fraction(u);
        info->top_octave_after = top_octave_fraction(out);
        info->aliasing_risk = lambda > 1.0 && info->top_octave_after > 1e-8;
    }
    return out;
}

Field shift(const Field& u, const std::vector<double>& offset) {
    if (static_cast<int>(offset.size()) != u.grid.dim)
        throw std::invalid_argument("shift: need one offset per axis");
    auto coeff = forward_fft(u);
    const int n = u.grid.n;
    const double k_nyq = u.grid.nyquist_wavenumber();
    if (u.grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            if (i == n / 2) {
                coeff[static_cast<std::size_t>(i)] *= std::cos(k_nyq * offset[0]);
            } else {
                coeff[static_cast<std::size_t>(i)] *=
                    std::polar(1.0, -u.grid.wavenumber(i) * offset[0]);
            }
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0) {
            const cplx f0 = i0 == n / 2
                                ? cplx{std::cos(k_nyq * offset[0]), 0.0}
                                : std::polar(1.0, -u.grid.wavenumber(i0) * offset[0]);
            for (int i1 = 0; i1 < n; ++i1) {
                const cplx f1 = i1 == n / 2
                                    ? cplx{std::cos(k_nyq * offset[1]), 0.0}
                                    : std::polar(1.0, -u.grid.wavenumber(i1) * offset[1]);
                coeff[static_cast<std::size_t>(i0) * n + i1] *= f0 * f1;
            }
        }
    }
    return inverse_fft(coeff, u.grid, u.is_real_hint);
}

double top_octave_fraction(const std::vector<cplx>& coeff, const Grid& grid) {
    const int n = grid.n;
    double total = 0.0, top = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i) {
        const double e = std::norm(coeff[i]);
        total += e;
        int m_max;
        if (grid.dim == 1) {
            m_max = std::abs(grid.freq_index(static_cast<int>(i)));
        } else {
            int i0 = static_cast<int>(i / static_cast<std::size_t>(n));
            int i1 = static_cast<int>(i % static_cast<std::size_t>(n));
            m_max = std::max(std::abs(grid.freq_index(i0)), std::abs(grid.freq_index(i1)));
        }
        if (m_max >= n / 4) top += e;
    }
    return total == 0.0 ? 0.0 : top / total;
}

double top_octave_fraction(const Field& u) {
    return top_octave_fraction(forward_fft(u), u.grid);
}

double boundary_tail_fraction(const Field& u) {
    const double r2_cut = 0.0625 * u.grid.length * u.grid.length;  // (L/4)^2
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = std::norm(u.values[i]);
        total += e;
        if (u.grid.radius_sq(i) > r2_cut) tail += e;
    }
    return total == 0.0 ? 0.0 : tail / total;
}

double effective_bandwidth(const Field& u, double tail) {
    auto coeff = forward_fft(u);
    std::vector<std::pair<double, double>> modes(coeff.size());  // (|k|^2, energy)
    double total = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i) {
        const double e = std::norm(coeff[i]);
        modes[i] = {u.grid.wavenumber_sq(i), e};
        total += e;
    }
    if (total == 0.0) return 0.0;
    std::sort(modes.begin(), modes.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double cum = 0.0;
    for (const auto& [k2, e] : modes) {
        cum += e;
        if (cum > tail * total) return std::sqrt(k2);
    }
    return 0.0;
}

Field regrid(const Field& u, const Grid& fine) {
    if (fine.dim != u.grid.dim || fine.length != u.grid.length || fine.n < u.grid.n)
        throw std::invalid_argument("regrid: target must be a finer grid with the same length");
    if (fine.n == u.grid.n) return u;
    const int nc = u.grid.n, nf = fine.n;
    auto coeff = forward_fft(u);
    std::vector<cplx> out(fine.size(), cplx{0.0, 0.0});
    auto map_index = [&](int m) { return m >= 0 ? m : m + nf; };
    if (u.grid.dim == 1) {
        for (int i = 0; i < nc; ++i) {
            const int m = u.grid.freq_index(i);
            if (m == -nc / 2) {
                // split the coarse Nyquist bucket symmetrically
                out[static_cast<std::size_t>(map_index(nc / 2))] += 0.5 * coeff[static_cast<std::size_t>(i)];
                out[static_cast<std::size_t>(map_index(-nc / 2))] += 0.5 * coeff[static_cast<std::size_t>(i)];
            } else {
                out[static_cast<std::size_t>(map_index(m))] = coeff[static_cast<std::size_t>(i)];
            }
        }
    } else {
        for (int i0 = 0; i0 < nc; ++i0) {
            const int m0 = u.grid.freq_index(i0);
            for (int i1 = 0; i1 < nc; ++i1) {
                const int m1 = u.grid.freq_index(i1);
                const cplx c = coeff[static_cast<std::size_t>(i0) * nc + i1];
                const bool ny0 = m0 == -nc / 2, ny1 = m1 == -nc / 2;
                const double w0 = ny0 ? 0.5 : 1.0, w1 = ny1 ? 0.5 : 1.0;
                for (int a = 0; a < (ny0 ? 2 : 1); ++a) {
                    const int mm0 = ny0 ? (a == 0 ? nc / 2 : -nc / 2) : m0;
                    for (int b = 0; b < (ny1 ? 2 : 1); ++b) {
                        const int mm1 = ny1 ? (b == 0 ? nc / 2 : -nc / 2) : m1;
                        out[static_cast<std::size_t>(map_index(mm0)) * nf + map_index(mm1)] +=
                            w0 * w1 * c;
                    }
                }
            }
        }
    }
    return inverse_fft(out, fine, u.is_real_hint);
}

Field constant_field(const Grid& grid, cplx value) {
    Field out(grid, value.imag() == 0.0);
    std::fill(out.values.begin(), out.values.end(), value);
    return out;
}

Field make_gaussian(const Grid& grid, double width,
                    const std::vector<double>& center, double amplitude) {
    if (static_cast<int>(center.size()) != grid.dim)
        throw std::invalid_argument("make_gaussian: center size mismatch");
    if (!(width > 0)) throw std::invalid_argument("make_gaussian: width must be positive");
    Field out(grid, true);
    const int n = grid.n;
    auto wrap = [&](double d) {
        // nearest periodic image
        while (d > 0.5 * grid.length) d -= grid.length;
        while (d < -0.5 * grid.length) d += grid.length;
        return d;
    };
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            double dx = wrap(grid.coord(i) - center[0]);
            out.values[static_cast<std::size_t>(i)] =
                amplitude * std::exp(-0.5 * dx * dx / (width * width));
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0) {
            double dx = wrap(grid.coord(i0) - center[0]);
            for (int i1 = 0; i1 < n; ++i1) {
                double dy = wrap(grid.coord(i1) - center[1]);
                out.values[static_cast<std::size_t>(i0) * n + i1] =
                    amplitude * std::exp(-0.5 * (dx * dx + dy * dy) / (width * width));
            }
        }
    }
    return out;
}

Field single_mode(const Grid& grid, const std::vector<int>& mode) {
    if (static_cast<int>(mode.size()) != grid.dim)
        throw std::invalid_argument("single_mode: mode size mismatch");
    Field out(grid, false);
    const int n = grid.n;
    const double two_pi = 2.0 * std::numbers::pi;
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i)
            out.values[static_cast<std::size_t>(i)] =
                std::polar(1.0, two_pi * mode[0] * grid.coord(i) / grid.length);
    } else {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1)
                out.values[static_cast<std::size_t>(i0) * n + i1] = std::polar(
                    1.0, two_pi * (mode[0] * grid.coord(i0) + mode[1] * grid.coord(i1)) /
                             grid.length);
    }
    return out;
}

void scale_to_mass(Field& u, double a) {
    if (!(a > 0)) throw std::invalid_argument("scale_to_mass: target mass must be positive");
    double m = mass(u);
    if (m == 0.0) throw std::invalid_argument("scale_to_mass: zero field");
    double f = std::sqrt(a / m);
    for (auto& v : u.values) v *= f;
}

}  // namespace fnls
