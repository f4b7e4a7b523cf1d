#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "qtl/aligned.hpp"

namespace qtl {

/// In-place complex FFT pair of one size, backed by FFTW.
///
/// Plans are created with FFTW_ESTIMATE (so the chosen algorithm, and hence
/// the rounding, is reproducible from run to run) and shared through a
/// process-wide cache; executing a plan is thread-safe, creating one is
/// serialized internally. Transforms are unnormalized: backward(forward(x))
/// = n*x.
class Fft {
public:
    /// `threads` > 1 lets FFTW split each transform across OpenMP threads.
    static std::shared_ptr<const Fft> get(std::size_t n, int threads = 1);

    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const noexcept { return n_; }
    void forward(std::span<cplx> data) const;
    void backward(std::span<cplx> data) const;

private:
    Fft(std::size_t n, int threads);

    std::size_t n_;
    void* forward_plan_ = nullptr;
    void* backward_plan_ = nullptr;
};

}  // namespace qtl
