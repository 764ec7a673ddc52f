#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <string_view>

#include <omp.h>

namespace rbsdej {

enum class Backend {
    serial,  // reference loops, single thread
    openmp,
};

/// Execution policy threaded through every path-parallel kernel.
///
/// Results of the OpenMP backend do not depend on `threads`: per-path work
/// writes into pre-allocated slots and every reduction runs over a fixed
/// block partition summed in block order.
struct Exec {
    Backend backend = Backend::openmp;
    int threads = 0;  // 0: OpenMP runtime default

    static Exec serial() { return {Backend::serial, 1}; }
    static Exec parallel(int threads = 0) { return {Backend::openmp, threads}; }
};

std::string_view to_string(Backend backend);

/// Paths per reduction block of the OpenMP backend.
inline constexpr std::size_t kReductionBlock = 256;

/// Call `fn(i)` for i in [0, n). An exception thrown by `fn` is rethrown on
/// the calling thread; with several failures, the one at the lowest index wins.
template <typename Fn>
void for_each_index(const Exec& exec, std::size_t n, Fn&& fn) {
    if (exec.backend == Backend::serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::size_t error_index = n;
    const auto count = static_cast<long long>(n);
    const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(rbsdej_for_each_index)
            {
                if (static_cast<std::size_t>(i) < error_index) {
                    error_index = static_cast<std::size_t>(i);
                    error = std::current_exception();
                }
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Sum of `values`. Serial backend: left-to-right. OpenMP backend: fixed
/// blocks of kReductionBlock summed in parallel, then block totals in order.
double sum(const Exec& exec, std::span<const double> values);

/// Mean and standard error of the mean (sample std / sqrt(n)); se is 0 for n < 2.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_se(const Exec& exec, std::span<const double> values);

}  // namespace rbsdej
