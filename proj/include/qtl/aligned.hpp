#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace qtl {

/// Allocator returning 64-byte aligned storage, so that every amplitude
/// buffer has the alignment the FFT plans were created for.
template <class T, std::size_t Align = 64>
struct AlignedAllocator {
    using value_type = T;

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

    template <class U>
    struct rebind {
        using other = AlignedAllocator<U, Align>;
    };

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t{Align});
    }

    template <class U>
    bool operator==(const AlignedAllocator<U, Align>&) const noexcept { return true; }
};

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx, AlignedAllocator<cplx>>;

}  // namespace qtl
