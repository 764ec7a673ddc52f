#include "rbsdej/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>

namespace rbsdej {

namespace pt = boost::property_tree;

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::penalized: return "penalized";
        case RunMode::reflected: return "reflected";
        case RunMode::oracle: return "oracle";
        case RunMode::verify_all: return "verify-all";
        case RunMode::norms: return "norms";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& text) {
    for (RunMode m : {RunMode::penalized, RunMode::reflected, RunMode::oracle, RunMode::verify_all,
                      RunMode::norms}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("run.mode", "unknown mode '" + text +
                                      "' (penalized, reflected, oracle, verify-all, norms)");
}

ProblemSpec ExperimentConfig::build_problem() const {
    return make_problem(problem, params, exponents(), T);
}

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"grid", {"T", "N"}},
    {"mc", {"n_paths", "seed"}},
    {"basis", {"degree"}},
    {"exponents", {"p", "beta", "eps"}},
    {"schedule", {"n0", "levels", "stop_tol"}},
    {"picard", {"tol", "max_iter"}},
    {"run", {"mode", "n_penalty"}},
};

double to_double(const std::string& field, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError(field, "expected a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& field, const std::string& text) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

}  // namespace

void validate(const ExperimentConfig& c) {
    auto require = [](bool ok, const char* field, const std::string& what) {
        if (!ok) throw ConfigError(field, what);
    };
    require(find_problem(c.problem) != nullptr, "problem.name", "unknown problem '" + c.problem + "'");
    require(c.T > 0.0 && std::isfinite(c.T), "grid.T", "must be finite and > 0");
    require(c.N >= 1, "grid.N", "must be >= 1");
    require(c.degree <= 16, "basis.degree", "must be <= 16");
    require(c.n_paths > c.degree + 1, "mc.n_paths", "must exceed basis.degree + 1");
    require(c.p > 1.0 && c.p < 2.0, "exponents.p", fmt::format("must lie in (1,2), got {:g}", c.p));
    require(c.beta >= 0.0 && std::isfinite(c.beta), "exponents.beta", "must be finite and >= 0");
    require(c.eps > 0.0 && std::isfinite(c.eps), "exponents.eps", "must be finite and > 0");
    require(c.n0 > 0.0 && std::isfinite(c.n0), "schedule.n0", "must be finite and > 0");
    require(c.levels >= 1 && c.levels <= 60, "schedule.levels", "must lie in [1, 60]");
    require(c.stop_tol > 0.0, "schedule.stop_tol", "must be > 0");
    require(c.picard_tol > 0.0, "picard.tol", "must be > 0");
    require(c.picard_max_iter >= 1, "picard.max_iter", "must be >= 1");
    require(c.n_penalty >= 0.0 && std::isfinite(c.n_penalty), "run.n_penalty",
            "must be finite and >= 0");
    // Parameter names and the problem build.
    (void)c.build_problem();
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
    }

    ExperimentConfig c;
    bool beta_given = false;
    bool named = false;
    for (const auto& [section, body] : tree) {
        if (section == "problem") {
            for (const auto& [key, node] : body) {
                const std::string v = node.get_value<std::string>();
                if (key == "name") {
                    c.problem = v;
                    named = true;
                } else {
                    c.params[key] = to_double("problem." + key, v);
                }
            }
            continue;
        }
        const auto schema = kSchema.find(section);
        if (schema == kSchema.end()) throw ConfigError(section, "unknown section");
        for (const auto& [key, node] : body) {
            const std::string field = section + "." + key;
            if (!schema->second.count(key)) throw ConfigError(field, "unknown key");
            const std::string v = node.get_value<std::string>();
            if (field == "grid.T") c.T = to_double(field, v);
            else if (field == "grid.N") c.N = to_unsigned(field, v);
            else if (field == "mc.n_paths") c.n_paths = to_unsigned(field, v);
            else if (field == "mc.seed") c.seed = to_unsigned(field, v);
            else if (field == "basis.degree") c.degree = to_unsigned(field, v);
            else if (field == "exponents.p") c.p = to_double(field, v);
            else if (field == "exponents.beta") {
                c.beta = to_double(field, v);
                beta_given = true;
            } else if (field == "exponents.eps") c.eps = to_double(field, v);
            else if (field == "schedule.n0") c.n0 = to_double(field, v);
            else if (field == "schedule.levels") c.levels = to_unsigned(field, v);
            else if (field == "schedule.stop_tol") c.stop_tol = to_double(field, v);
            else if (field == "picard.tol") c.picard_tol = to_double(field, v);
            else if (field == "picard.max_iter") c.picard_max_iter = to_unsigned(field, v);
            else if (field == "run.mode") c.mode = parse_run_mode(v);
            else if (field == "run.n_penalty") c.n_penalty = to_double(field, v);
        }
    }
    if (!named) throw ConfigError("problem.name", "missing");
    if (!(c.p > 1.0 && c.p < 2.0)) {
        throw ConfigError("exponents.p", fmt::format("must lie in (1,2), got {:g}", c.p));
    }
    if (!beta_given) c.beta = default_beta(c.p);
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config", "cannot read " + file.string());
    return parse_config(in);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
    os << "[problem]\nname = " << c.problem << '\n';
    for (const auto& [k, v] : c.params) os << fmt::format("{} = {:.17g}\n", k, v);
    os << fmt::format("\n[grid]\nT = {:.17g}\nN = {}\n", c.T, c.N);
    os << fmt::format("\n[mc]\nn_paths = {}\nseed = {}\n", c.n_paths, c.seed);
    os << fmt::format("\n[basis]\ndegree = {}\n", c.degree);
    os << fmt::format("\n[exponents]\np = {:.17g}\nbeta = {:.17g}\neps = {:.17g}\n", c.p, c.beta,
                      c.eps);
    os << fmt::format("\n[schedule]\nn0 = {:.17g}\nlevels = {}\nstop_tol = {:.17g}\n", c.n0,
                      c.levels, c.stop_tol);
    os << fmt::format("\n[picard]\ntol = {:.17g}\nmax_iter = {}\n", c.picard_tol,
                      c.picard_max_iter);
    os << fmt::format("\n[run]\nmode = {}\nn_penalty = {:.17g}\n", to_string(c.mode), c.n_penalty);
}

}  // namespace rbsdej
