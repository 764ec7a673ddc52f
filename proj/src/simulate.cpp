#include "rbsdej/simulate.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "rbsdej/rng.hpp"

namespace rbsdej {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw DomainError("time grid needs at least one step");
    if (nodes_.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
            throw DomainError("time grid must be strictly increasing");
        }
    }
}

TimeGrid build_grid(double T, std::size_t N) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("build_grid: T must be > 0");
    if (N < 1) throw DomainError("build_grid: N must be >= 1");
    std::vector<double> nodes(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        nodes[i] = T * static_cast<double>(i) / static_cast<double>(N);
    }
    nodes[N] = T;
    return TimeGrid(std::move(nodes));
}

void PathBundle::slice(std::size_t node, std::span<double> out) const {
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = x(p, node);
}

bool PathBundle::operator==(const PathBundle& o) const {
    auto same_coeffs = [&] {
        if (coeffs.size() != o.coeffs.size()) return false;
        return coeffs.empty() ||
               std::memcmp(coeffs.data(), o.coeffs.data(),
                           coeffs.size() * sizeof(CoefficientSample)) == 0;
    };
    return n_paths == o.n_paths && n_marks == o.n_marks && seed == o.seed && grid == o.grid &&
           brownian == o.brownian && jumps == o.jumps && states == o.states && A == o.A &&
           flagged_paths == o.flagged_paths && same_coeffs();
}

PathBundle sample_paths(const ProblemSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                        std::uint64_t seed, const Exec& exec) {
    if (n_paths < 1) throw DomainError("sample_paths: n_paths must be >= 1");
    if (std::abs(grid.horizon() - spec.horizon) > 1e-12 * std::max(1.0, spec.horizon)) {
        throw DomainError("sample_paths: grid horizon differs from the problem horizon");
    }

    PathBundle b;
    b.n_paths = n_paths;
    b.n_marks = spec.marks.size();
    b.seed = seed;
    b.grid = grid;
    const std::size_t n = grid.steps();
    const std::size_t nodes = grid.size();
    const std::size_t m = b.n_marks;
    b.brownian.assign(n_paths * n, 0.0);
    b.jumps.assign(n_paths * n * m, 0);
    b.states.assign(n_paths * nodes, 0.0);
    b.A.assign(n_paths * nodes, 0.0);
    b.coeffs.assign(n_paths * nodes, CoefficientSample{});
    std::vector<std::uint8_t> bad(n_paths, 0);

    const auto marks = spec.marks.marks();
    const auto weights = spec.marks.weights();

    for_each_index(exec, n_paths, [&](std::size_t p) {
        double x = spec.forward.x0;
        double a = 0.0;
        bool finite = std::isfinite(x);
        b.states[p * nodes] = x;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = grid.t(i);
            const double dt = grid.dt(i);

            StreamRng bm_rng(seed, p, i, static_cast<std::uint64_t>(Channel::brownian));
            std::normal_distribution<double> normal(0.0, std::sqrt(dt));
            const double dB = normal(bm_rng);
            b.brownian[p * n + i] = dB;

            double jump = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                StreamRng jr(seed, p, i, static_cast<std::uint64_t>(Channel::first_mark) + j);
                std::poisson_distribution<std::int32_t> poisson(weights[j] * dt);
                const std::int32_t k = poisson(jr);
                b.jumps[(p * n + i) * m + j] = k;
                if (k != 0) jump += spec.forward.jump_size(t, x, marks[j]) * k;
            }

            const CoefficientSample c = aggregate_coefficients(spec.coeffs, spec.exponents, t, x);
            b.coeffs[p * nodes + i] = c;
            a += c.zeta2 * dt;

            x = x + spec.forward.drift(t, x) * dt + spec.forward.vol(t, x) * dB + jump;
            finite = finite && std::isfinite(x) && std::isfinite(c.zeta2);
            b.states[p * nodes + i + 1] = x;
            b.A[p * nodes + i + 1] = a;
        }
        if (finite) {
            b.coeffs[p * nodes + n] =
                aggregate_coefficients(spec.coeffs, spec.exponents, grid.t(n), x);
        }
        bad[p] = finite ? 0 : 1;
    });

    for (std::size_t p = 0; p < n_paths; ++p) {
        if (bad[p]) b.flagged_paths.push_back(p);
    }
    return b;
}

namespace {

constexpr std::array<char, 8> kMagic{'R', 'B', 'S', 'J', 'P', 'A', 'T', 'H'};

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_vec(std::ofstream& os, const std::vector<T>& v) {
    put<std::uint64_t>(os, v.size());
    if (!v.empty()) os.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("bundle file truncated");
    return v;
}

template <typename T>
std::vector<T> get_vec(std::ifstream& is, std::uint64_t expected) {
    const auto n = get<std::uint64_t>(is);
    if (n != expected) throw std::runtime_error("bundle file: array length mismatch");
    std::vector<T> v(n);
    if (n != 0) is.read(reinterpret_cast<char*>(v.data()), n * sizeof(T));
    if (!is) throw std::runtime_error("bundle file truncated");
    return v;
}

}  // namespace

void save_bundle(const PathBundle& b, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, kBundleFormatVersion);
    put<std::uint64_t>(os, b.n_paths);
    put<std::uint64_t>(os, b.n_steps());
    put<std::uint64_t>(os, b.n_marks);
    put<std::uint64_t>(os, b.seed);
    put_vec(os, b.grid.nodes());
    put_vec(os, b.brownian);
    put_vec(os, b.jumps);
    put_vec(os, b.states);
    put_vec(os, b.A);
    put_vec(os, b.coeffs);
    std::vector<std::uint64_t> flagged(b.flagged_paths.begin(), b.flagged_paths.end());
    put_vec(os, flagged);
    if (!os) throw std::runtime_error("write failed: " + file.string());
}

PathBundle load_bundle(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw std::runtime_error("not a path bundle file");
    const auto version = get<std::uint32_t>(is);
    if (version != kBundleFormatVersion) {
        throw std::runtime_error("unsupported bundle version " + std::to_string(version));
    }
    const auto n_paths = get<std::uint64_t>(is);
    const auto n_steps = get<std::uint64_t>(is);
    const auto n_marks = get<std::uint64_t>(is);

    PathBundle b;
    b.n_paths = n_paths;
    b.n_marks = n_marks;
    b.seed = get<std::uint64_t>(is);
    b.grid = TimeGrid(get_vec<double>(is, n_steps + 1));
    b.brownian = get_vec<double>(is, n_paths * n_steps);
    b.jumps = get_vec<std::int32_t>(is, n_paths * n_steps * n_marks);
    b.states = get_vec<double>(is, n_paths * (n_steps + 1));
    b.A = get_vec<double>(is, n_paths * (n_steps + 1));
    b.coeffs = get_vec<CoefficientSample>(is, n_paths * (n_steps + 1));
    const auto flagged_n = get<std::uint64_t>(is);
    std::vector<std::uint64_t> flagged(flagged_n);
    if (flagged_n != 0) {
        is.read(reinterpret_cast<char*>(flagged.data()), flagged_n * sizeof(std::uint64_t));
        if (!is) throw std::runtime_error("bundle file truncated");
    }
    b.flagged_paths.assign(flagged.begin(), flagged.end());
    return b;
}

}  // namespace rbsdej
