#include "stabest/kernels.hpp"

#include <cstdlib>
#include <string>

#include "stabest/error.hpp"

namespace stabest::kernels {

#ifdef STABEST_HAVE_AVX2
namespace detail {
const Ops& avx2_ops_unchecked();  // defined in kernels_avx2.cpp
}
#endif

const Ops* avx2_ops() {
#ifdef STABEST_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return &detail::avx2_ops_unchecked();
#endif
  return nullptr;
}

const Ops& active() {
  static const Ops& selected = []() -> const Ops& {
    const char* env = std::getenv("STABEST_KERNELS");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return scalar_ops();
    if (want == "avx2") {
      if (const Ops* ops = avx2_ops()) return *ops;
      throw ConfigError("STABEST_KERNELS=avx2 but AVX2 is unavailable on this machine");
    }
    if (want != "auto") {
      throw ConfigError("STABEST_KERNELS must be scalar, avx2 or auto (got '" + want + "')");
    }
    if (const Ops* ops = avx2_ops()) return *ops;
    return scalar_ops();
  }();
  return selected;
}

}  // namespace stabest::kernels
