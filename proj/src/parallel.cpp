#include "kac/parallel.hpp"

#include <cstdlib>
#include <mutex>

#ifdef KAC_HAVE_OPENMP
#include <omp.h>
#endif

namespace kac {

int worker_threads()
{
    if (const char* env = std::getenv("KAC_GAP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
#ifdef KAC_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void configure_threads()
{
    static std::once_flag once;
    std::call_once(once, [] {
#ifdef KAC_HAVE_OPENMP
        omp_set_num_threads(worker_threads());
#endif
    });
}

double z_score(double a, double sa, double b, double sb)
{
    const double s = std::sqrt(sa * sa + sb * sb);
    const double d = std::abs(a - b);
    if (s == 0.0) {
        return d == 0.0 ? 0.0 : INFINITY;
    }
    return d / s;
}

} // namespace kac
