#pragma once

namespace clut::parallel {

// Number of threads OpenMP kernels will use (1 when built without OpenMP).
int max_threads();

// n <= 0 restores the OpenMP default. All kernels in this project parallelize
// over independent output elements and keep per-output reductions in a fixed
// serial order, so results are bit-identical for every thread count.
void set_threads(int n);

bool openmp_enabled();

} // namespace clut::parallel
