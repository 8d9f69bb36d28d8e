#include "clut/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clut::parallel {

#ifdef _OPENMP
namespace {
int g_default_threads = 0;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
    if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : g_default_threads);
}

bool openmp_enabled() { return true; }
#else
int max_threads() { return 1; }
void set_threads(int) {}
bool openmp_enabled() { return false; }
#endif

} // namespace clut::parallel
