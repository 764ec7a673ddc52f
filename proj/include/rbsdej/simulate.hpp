#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rbsdej/exec.hpp"
#include "rbsdej/model.hpp"

namespace rbsdej {

/// Strictly increasing nodes 0 = t_0 < ... < t_N = T.
class TimeGrid {
public:
    /// Throws DomainError unless nodes start at 0, are strictly increasing
    /// and contain at least two entries.
    explicit TimeGrid(std::vector<double> nodes);

    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double horizon() const noexcept { return nodes_.back(); }
    double t(std::size_t i) const { return nodes_[i]; }
    double dt(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> nodes_;
};

/// Uniform grid with N steps on [0, T].
TimeGrid build_grid(double T, std::size_t N);

/// Simulated forward data, stored path-major.
struct PathBundle {
    std::size_t n_paths = 0;
    std::size_t n_marks = 0;
    std::uint64_t seed = 0;
    TimeGrid grid{std::vector<double>{0.0, 1.0}};

    std::vector<double> brownian;        // [path][step]
    std::vector<std::int32_t> jumps;     // [path][step][mark]
    std::vector<double> states;          // [path][node]
    std::vector<double> A;               // [path][node]
    std::vector<CoefficientSample> coeffs;  // [path][node]
    /// Paths on which a model function produced a non-finite value.
    std::vector<std::size_t> flagged_paths;

    std::size_t n_steps() const noexcept { return grid.steps(); }
    std::size_t n_nodes() const noexcept { return grid.size(); }

    double dB(std::size_t path, std::size_t step) const {
        return brownian[path * n_steps() + step];
    }
    std::int32_t count(std::size_t path, std::size_t step, std::size_t mark) const {
        return jumps[(path * n_steps() + step) * n_marks + mark];
    }
    double x(std::size_t path, std::size_t node) const { return states[path * n_nodes() + node]; }
    double a(std::size_t path, std::size_t node) const { return A[path * n_nodes() + node]; }
    const CoefficientSample& coeff(std::size_t path, std::size_t node) const {
        return coeffs[path * n_nodes() + node];
    }

    /// States of every path at one node, copied into `out` (size n_paths).
    void slice(std::size_t node, std::span<double> out) const;

    bool operator==(const PathBundle& other) const;
};

/// Brownian increments ~ N(0, Δ_i), jump counts ~ Poisson(λ_j Δ_i), forward
/// Euler for X with jumps applied at the right end of each step, and the
/// coefficient path with cumulative A. Bit-identical for equal inputs,
/// independent of `exec`.
PathBundle sample_paths(const ProblemSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                        std::uint64_t seed, const Exec& exec = {});

/// Versioned binary dump: magic "RBSJPATH", u32 version, dimensions, seed,
/// grid nodes and all arrays in native byte order.
void save_bundle(const PathBundle& bundle, const std::filesystem::path& file);
PathBundle load_bundle(const std::filesystem::path& file);

inline constexpr std::uint32_t kBundleFormatVersion = 1;

}  // namespace rbsdej
