#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rbsdej/backward.hpp"
#include "rbsdej/exec.hpp"
#include "rbsdej/model.hpp"
#include "rbsdej/norms.hpp"
#include "rbsdej/reflect.hpp"
#include "rbsdej/regression.hpp"
#include "rbsdej/simulate.hpp"

namespace rbsdej {

struct PropertyResult {
    static constexpr std::size_t kMaxWitnesses = 8;

    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
    /// Largest (violation - allowance) seen; <= 0 when every trial passed.
    double worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<std::string> witnesses;
    bool passed = true;

    /// Counts one trial; `witness` is only called on failure.
    template <typename W>
    void record(bool ok, double margin, W&& witness) {
        ++trials;
        worst_margin = std::max(worst_margin, margin);
        if (!ok) {
            ++failures;
            if (witnesses.size() < kMaxWitnesses) witnesses.push_back(witness());
        }
    }
    /// Merges another result's counts into this one.
    void absorb(const PropertyResult& other);
};

struct JumpInequality {
    double lhs = 0.0;
    double rhs = 0.0;
    /// lhs - rhs plus the rounding allowance; negative means a violation.
    double slack = 0.0;
    bool pass = false;
};

/// |y+u|^p - |y|^p - p|y|^{p-1} ŷ u  >=  c(p) u² (|y| ∨ |y+u|)^{p-2}, zero
/// right side when both |y| and |y+u| vanish. Throws DomainError unless 1 < p < 2.
JumpInequality check_jump_inequality(double y, double u, double p);

/// Uniform (y, u) in [-range, range]² for each p.
PropertyResult jump_inequality_suite(std::size_t samples_per_p, const std::vector<double>& ps,
                                     std::uint64_t seed, double range = 10.0);

/// For each (n, n') with n < n', plain-terminal penalized solves on the same
/// bundle; an entry fails when y^n_i > y^{n'}_i + 3 sqrt(se_n² + se_{n'}²).
/// Passes with zero failures on deterministic bundles (the standard errors
/// vanish) and with a failure fraction <= 0.1% otherwise. Throws DomainError
/// for drivers that depend on (z, u).
PropertyResult comparison_suite(const ProblemSpec& spec, const PathBundle& bundle,
                                const RegressionBasis& basis,
                                const std::vector<std::pair<double, double>>& n_pairs,
                                const Exec& exec = {});

struct PenaltyDecay {
    PropertyResult result;
    std::vector<PenaltyError> errors;  // one per level, per_path cleared
    /// final / first; 0 when the first error is 0.
    double final_over_first = 0.0;
};

/// Every level of the schedule is solved (no early stop). Trials: each
/// consecutive pair, mean difference <= 2 joint standard errors; and
/// final < first unless first is 0. Needs >= 3 levels.
PenaltyDecay penalty_decay_suite(const ProblemSpec& spec, const PathBundle& bundle,
                                 const RegressionBasis& basis, const PenalizationSchedule& schedule,
                                 const ReflectOptions& options = {});

/// Data scaled by s: ξ, L, L_{T-}, varphi multiplied by s and
/// f_s(y, z, u) = s f(y/s, z/s, u/s).
ProblemSpec scale_data(const ProblemSpec& spec, double s);

/// Monte Carlo data side: E[e^{(p/2)βA_T}|ξ|^p] + E[(∫ e^{(β/2)A} varphi ds)^p]
/// + E[sup_i e^{(p/2)βA_i} (L_i^+)^p].
double data_norm(const ProblemSpec& spec, const PathBundle& bundle, const Exec& exec = {});

struct AprioriOptions {
    std::vector<double> scales{2.0, 4.0};
    double n_penalty = 1024.0;
    /// Relative tolerance for s^p scaling on Monte Carlo bundles.
    double mc_tolerance = 0.05;
    /// Relative tolerance on deterministic bundles (floating point only).
    double exact_tolerance = 1e-9;
    /// Grid refinement N -> 2N is sampled with this seed and path count.
    bool refinement = true;
    ReflectOptions reflect{};
};

struct Apriori {
    PropertyResult result;
    NormReport base;
    double ratio_N = 0.0;
    double ratio_2N = 0.0;
};

/// (i) all NormReport fields finite; (ii) each field scales by s^p;
/// (iii) NormReport::total() / data_norm stable within a factor 2 from N to
/// 2N (0/0 counts as stable).
Apriori apriori_suite(const ProblemSpec& spec, const PathBundle& bundle,
                      const RegressionBasis& basis, bool deterministic,
                      const AprioriOptions& options = {});

struct ContractionRow {
    double beta = 0.0;
    std::size_t iterations = 0;
    double max_ratio = 0.0;
    bool non_contraction = false;
};

struct Contraction {
    PropertyResult result;
    std::vector<ContractionRow> table;
    double y0_picard = 0.0;
    double y0_one_pass = 0.0;
    double y0_stderr = 0.0;
};

/// Picard runs at each β (reflected terminal, penalty n). At the largest β
/// every ratio d_{k+1}/d_k must be < 1, and Y_0 must match the one-pass
/// solve within 2 standard errors.
Contraction contraction_suite(const ProblemSpec& spec, const PathBundle& bundle,
                              const RegressionBasis& basis, const std::vector<double>& beta_values,
                              double n_penalty, const PicardOptions& options = {});

/// Randomized Lenglart configurations: marks, intensities, β, horizon and
/// bounded U fields drawn from `seed`.
PropertyResult lenglart_suite(std::size_t configs, std::size_t n_paths, std::uint64_t seed,
                              const Exec& exec = {});

/// name,trials,failures,worst_margin,passed
std::string property_csv_header();
void write_property_csv(std::ostream& os, const std::vector<PropertyResult>& results);
/// JUnit-style XML summary.
void write_junit_summary(std::ostream& os, const std::string& suite_name,
                         const std::vector<PropertyResult>& results);

}  // namespace rbsdej
