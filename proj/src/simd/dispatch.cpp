#include <cstdlib>
#include <string_view>

#include "texlat/error.hpp"
#include "texlat/simd/kernels.hpp"

namespace texlat::simd {
namespace {

bool cpu_has_avx2() {
#if defined(TEXLAT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Kernels& select() {
    const char* forced = std::getenv("TEXLAT_SIMD");
    if (forced && std::string_view(forced) == "scalar") return detail::scalar_kernels();
#if defined(TEXLAT_HAVE_AVX2)
    if (cpu_has_avx2()) return detail::avx2_kernels();
#endif
    return detail::scalar_kernels();
}

} // namespace

const Kernels& kernels() {
    static const Kernels& active = select();
    return active;
}

const Kernels& kernels_for(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return detail::scalar_kernels();
    case Isa::avx2:
#if defined(TEXLAT_HAVE_AVX2)
        if (cpu_has_avx2()) return detail::avx2_kernels();
#endif
        throw UsageError("AVX2 kernels are not available on this machine");
    }
    throw UsageError("unknown kernel variant");
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
    if (cpu_has_avx2()) out.push_back(Isa::avx2);
    return out;
}

} // namespace texlat::simd
