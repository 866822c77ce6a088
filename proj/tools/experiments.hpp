#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hamflow::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- tables

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    /// Header row plus one line per row; doubles as %.17g.
    [[nodiscard]] std::string csv() const;
};

// ---------------------------------------------------------------- config

enum class ParamKind { Real, PositiveReal, NonNegativeReal, PositiveInt, String, RealList, PositiveIntList };

struct ParamSpec {
    std::string key;
    ParamKind kind;
    std::string default_value;
    std::string help;
    std::vector<std::string> choices;  // String only; empty means free-form
};

/// Resolved, validated parameter values of one run.
class Params {
public:
    Params() = default;
    Params(std::map<std::string, std::string> values, std::uint64_t seed);

    [[nodiscard]] double real(const std::string& key) const;
    [[nodiscard]] int integer(const std::string& key) const;
    [[nodiscard]] const std::string& str(const std::string& key) const;
    [[nodiscard]] std::vector<double> reals(const std::string& key) const;
    [[nodiscard]] std::vector<int> integers(const std::string& key) const;
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::uint64_t seed_ = 0;
};

struct ExperimentResult {
    std::vector<Table> tables;
    std::map<std::string, double> metrics;  // also emitted as the "summary" table
};

struct ExperimentSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> numeric;  // [numeric] section
    std::vector<ParamSpec> params;   // [<name>] section
    std::function<ExperimentResult(const Params&)> run;
};

struct ExperimentConfig {
    std::string experiment;
    std::string output;  // path prefix
    Params params;
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

const std::vector<ExperimentSpec>& registry();
const ExperimentSpec& find_experiment(const std::string& name);

/// Parses and fully validates an INI config:
///
///   experiment = <name>
///   output = <path prefix>          (optional)
///   [numeric]   T, N, h, tol, seed  (as declared by the experiment)
///   [<name>]    experiment parameters
///
/// Unknown sections or keys, malformed values and non-positive values where
/// positivity is required raise ConfigError.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Applies command-line overrides; `seed_text` must be an unsigned 64-bit integer.
void override_seed(ExperimentConfig& cfg, const std::string& seed_text);

/// All defaults for `name`.
ExperimentConfig default_config(const std::string& name);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// The summary table built from the metrics, appended last.
Table summary_table(const ExperimentResult& result);

/// Writes <prefix>_<table>.csv for every table plus <prefix>_manifest.json.
/// Returns the written paths.
std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                       const std::string& config_path, const std::string& started_utc,
                                       const std::string& finished_utc);

// Experiment entry points, grouped by translation unit.
ExperimentResult completeness_table(const Params& p);
ExperimentResult type2_bvp(const Params& p);
ExperimentResult order_study(const Params& p);
ExperimentResult symplecticity_scan(const Params& p);
ExperimentResult noether_drift(const Params& p);
ExperimentResult hamel_rigid_body(const Params& p);
ExperimentResult adjoint_gradient(const Params& p);
ExperimentResult diffusion_adjoint(const Params& p);
ExperimentResult commutativity(const Params& p);
ExperimentResult pontryagin_lqr(const Params& p);
ExperimentResult accelopt_rate(const Params& p);

}  // namespace hamflow::cli
