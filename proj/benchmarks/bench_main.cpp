#include <benchmark/benchmark.h>

// The distro's libbenchmark_main.a carries LTO bytecode tied to one gcc build.
BENCHMARK_MAIN();
