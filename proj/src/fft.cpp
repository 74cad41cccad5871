#include "fnls/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace fnls {
namespace {

// Plan creation in FFTW is not thread safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t size = 0;

    PlanPair(int dim, int n) {
        size = dim == 1 ? static_cast<std::size_t>(n)
                        : static_cast<std::size_t>(n) * n;
        buf = fftw_alloc_complex(size);
        if (!buf) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (dim == 1) {
            fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        } else {
            fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
    }
    ~PlanPair() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    PlanPair(const PlanPair&) = delete;
    PlanPair& operator=(const PlanPair&) = delete;
};

// One workspace per (dim, n) per thread.
PlanPair& workspace(int dim, int n) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> cache;
    auto& slot = cache[{dim, n}];
    if (!slot) slot = std::make_unique<PlanPair>(dim, n);
    return *slot;
}

}  // namespace

std::vector<cplx> forward_fft(const Field& u) {
    auto& ws = workspace(u.grid.dim, u.grid.n);
    std::memcpy(ws.buf, u.values.data(), ws.size * sizeof(cplx));
    fftw_execute(ws.fwd);
    std::vector<cplx> out(ws.size);
    const double scale = 1.0 / static_cast<double>(ws.size);
    auto* b = reinterpret_cast<cplx*>(ws.buf);
    for (std::size_t i = 0; i < ws.size; ++i) out[i] = b[i] * scale;
    return out;
}

Field inverse_fft(const std::vector<cplx>& coeff, const Grid& grid, bool real_hint) {
    auto& ws = workspace(grid.dim, grid.n);
    if (coeff.size() != ws.size)
        throw std::invalid_argument("inverse_fft: coefficient count mismatch");
    std::memcpy(ws.buf, coeff.data(), ws.size * sizeof(cplx));
    fftw_execute(ws.bwd);
    Field out(grid, real_hint);
    std::memcpy(out.values.data(), ws.buf, ws.size * sizeof(cplx));
    return out;
}

}  // namespace fnls
