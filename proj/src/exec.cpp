#include "rbsdej/exec.hpp"

#include <cmath>
#include <vector>

namespace rbsdej {

std::string_view to_string(Backend backend) {
    switch (backend) {
        case Backend::serial: return "serial";
        case Backend::openmp: return "openmp";
    }
    return "unknown";
}

namespace {

template <typename Term>
double reduce(const Exec& exec, std::size_t n, Term&& term) {
    if (exec.backend == Backend::serial) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(blocks, 0.0);
    for_each_index(exec, blocks, [&](std::size_t b) {
        const std::size_t lo = b * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace

double sum(const Exec& exec, std::span<const double> values) {
    return reduce(exec, values.size(), [&](std::size_t i) { return values[i]; });
}

MeanSe mean_se(const Exec& exec, std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return {};
    const double mean = sum(exec, values) / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    const double ss = reduce(exec, n, [&](std::size_t i) {
        const double d = values[i] - mean;
        return d * d;
    });
    const double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace rbsdej
