#pragma once

// Instance files and the batch commands behind the `robmot` executable.
// Reports are JSON objects with a fixed key order and a schema version.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robmot/error.hpp"
#include "robmot/pricing.hpp"

namespace robmot::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kInfeasible = 1, kParse = 2, kLimit = 3 };

struct PriorSpec {
    std::string kind;  // uniform | independent | tilted | explicit
    double theta = 0.0;
    std::vector<double> weights;
};

struct Instance {
    double s0 = 0.0;
    std::vector<Marginal> marginals;
    std::vector<PriorSpec> priors;
    UtilitySpec util = UtilitySpec::exponential();
    std::optional<Payoff> payoff;
    double x = 0.0;
    SolveOptions solve{};
    std::size_t conjugacy_trials = 10;

    MarginalSystem system() const { return MarginalSystem(s0, marginals); }
};

/// Throws Error(ParseError) on malformed text, wrong types or unknown keys;
/// model errors (e.g. non-convex quotes) keep their own kinds.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

/// Priors evaluated on the instance lattice.
std::vector<std::vector<double>> prior_weights(const Instance& inst, const PathLattice& lattice);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::size_t max_paths = 100'000;
};

struct CommandResult {
    int exit_code = kOk;
    nlohmann::ordered_json report;
};

int exit_code_for(ErrorKind kind);

CommandResult cmd_validate(const Instance& inst, const RunOptions& opts = {});
CommandResult cmd_mot(const Instance& inst, const RunOptions& opts = {});
CommandResult cmd_price(const Instance& inst, const RunOptions& opts = {});
CommandResult cmd_verify(const Instance& inst, const RunOptions& opts = {});

/// Loads `path` and runs `command`; every library error becomes an error
/// report with the mapped exit code.
CommandResult run(const std::string& command, const std::string& path, const RunOptions& opts = {});

}  // namespace robmot::cli
