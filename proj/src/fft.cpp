#include "qtl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace qtl {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void ensure_threads_initialized() {
    static const bool ok = fftw_init_threads() != 0;
    if (!ok) throw std::runtime_error("fftw_init_threads failed");
}

fftw_complex* as_fftw(std::span<cplx> data) {
    return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

std::shared_ptr<const Fft> Fft::get(std::size_t n, int threads) {
    // The mutex must outlive the cache: plans lock it on destruction.
    std::mutex& mtx = planner_mutex();
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<const Fft>> cache;
    if (threads < 1) threads = 1;
    std::lock_guard lock(mtx);
    auto& slot = cache[{n, threads}];
    if (!slot) slot = std::shared_ptr<const Fft>(new Fft(n, threads));
    return slot;
}

Fft::Fft(std::size_t n, int threads) : n_(n) {
    // caller holds planner_mutex
    ensure_threads_initialized();
    fftw_plan_with_nthreads(threads);
    ComplexVector scratch(n);
    auto* p = as_fftw(scratch);
    const int ni = static_cast<int>(n);
    forward_plan_ = fftw_plan_dft_1d(ni, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft_1d(ni, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FFTW planning failed");
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Fft::forward(std::span<cplx> data) const {
    if (data.size() != n_) throw std::invalid_argument("Fft::forward: size mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data), as_fftw(data));
}

void Fft::backward(std::span<cplx> data) const {
    if (data.size() != n_) throw std::invalid_argument("Fft::backward: size mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data), as_fftw(data));
}

}  // namespace qtl
