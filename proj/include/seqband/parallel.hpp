#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seqband {

/// Serial execution is the reference path; parallel results must match it bit-for-bit.
enum class Execution { serial, parallel };

template <class Body>
void for_each_index(Execution exec, std::size_t n, Body&& body)
{
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) {
        body(static_cast<std::size_t>(i));
    }
}

inline void set_thread_count(int threads)
{
#ifdef _OPENMP
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
#else
    (void)threads;
#endif
}

inline int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace seqband
