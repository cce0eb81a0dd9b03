#include "tprof/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace tprof::kernels {
namespace {

Backend pick_backend() {
    if (const char* env = std::getenv("TPROF_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = pick_backend();

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
    g_backend = (b == Backend::avx2 && avx2_supported()) ? Backend::avx2
                                                         : Backend::scalar;
}

const KernelOps& ops() {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::avx2) return avx2_ops();
#endif
    return scalar_ops();
}

}  // namespace tprof::kernels
