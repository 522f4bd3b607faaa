#include "glmos/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace glmos::kernels {

#if defined(GLMOS_HAVE_X86_INTRIN)
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(GLMOS_HAVE_X86_INTRIN)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_ops_impl();
#endif
  return nullptr;
}

namespace {

const Ops* select() {
  if (const char* env = std::getenv("GLMOS_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_ops()) return avx2_ops();
  }
  if (const Ops* v = avx2_ops()) return v;
  return &scalar_ops();
}

}  // namespace

const Ops& ops() {
  static const Ops* chosen = select();
  return *chosen;
}

}  // namespace glmos::kernels
