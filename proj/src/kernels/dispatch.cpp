#include <cstdlib>
#include <cstring>

#include "nol/kernels.hpp"

namespace nol::kernels {

const Table& active() {
  static const Table& selected = [] () -> const Table& {
    const char* force = std::getenv("NOL_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0 && force[0] != '\0') return scalar();
    if (const Table* t = avx2()) return *t;
    return scalar();
  }();
  return selected;
}

}  // namespace nol::kernels
