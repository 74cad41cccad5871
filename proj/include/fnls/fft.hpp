#pragma once

#include <vector>

#include "fnls/field.hpp"
#include "fnls/grid.hpp"

namespace fnls {

// Normalized DFT of the samples: u_hat[m] = N^-dim * sum_j u_j e^{-2*pi*i*m.j/N}.
// With this normalization Parseval reads  h^dim*sum|u_j|^2 = L^dim*sum|u_hat|^2.
std::vector<cplx> forward_fft(const Field& u);

// Inverse of forward_fft; preserves the real hint of the caller's choosing.
Field inverse_fft(const std::vector<cplx>& coeff, const Grid& grid,
                  bool real_hint = false);

}  // namespace fnls
