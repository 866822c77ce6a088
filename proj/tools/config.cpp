#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "experiments.hpp"

namespace hamflow::cli {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool parse_real(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(t, &used);
        return used == t.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

bool parse_int(const std::string& s, long long& out) {
    const std::string t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return !t.empty() && ec == std::errc() && ptr == t.data() + t.size();
}

void check_value(const std::string& where, const ParamSpec& spec, const std::string& value) {
    auto fail = [&](const std::string& why) {
        throw ConfigError(where + "." + spec.key + " = '" + value + "': " + why);
    };
    double d = 0.0;
    long long i = 0;
    switch (spec.kind) {
        case ParamKind::Real:
            if (!parse_real(value, d)) fail("expected a real number");
            break;
        case ParamKind::PositiveReal:
            if (!parse_real(value, d) || !(d > 0.0)) fail("expected a positive real number");
            break;
        case ParamKind::NonNegativeReal:
            if (!parse_real(value, d) || !(d >= 0.0)) fail("expected a non-negative real number");
            break;
        case ParamKind::PositiveInt:
            if (!parse_int(value, i) || i < 1 || i > 100000000) fail("expected a positive integer");
            break;
        case ParamKind::String:
            if (!spec.choices.empty() &&
                std::find(spec.choices.begin(), spec.choices.end(), trim(value)) == spec.choices.end()) {
                std::string all;
                for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
                fail("expected one of: " + all);
            }
            break;
        case ParamKind::RealList:
            for (const auto& item : split_list(value)) {
                if (!parse_real(item, d)) fail("expected a comma-separated list of reals");
            }
            break;
        case ParamKind::PositiveIntList:
            for (const auto& item : split_list(value)) {
                if (!parse_int(item, i) || i < 1 || i > 100000000) fail("expected a comma-separated list of positive integers");
            }
            break;
    }
}

std::uint64_t parse_seed(const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError("seed '" + text + "' is not an unsigned 64-bit integer");
    }
    return v;
}

ExperimentConfig build_config(const boost::property_tree::ptree& tree) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> top;
    std::map<std::string, const boost::property_tree::ptree*> sections;
    for (const auto& [key, child] : tree) {
        if (child.empty() && key != "numeric" && !child.data().empty()) {
            top[key] = child.data();
        } else {
            if (sections.count(key)) throw ConfigError("duplicate section [" + key + "]");
            sections[key] = &child;
        }
    }
    for (const auto& [key, value] : top) {
        if (key != "experiment" && key != "output") throw ConfigError("unknown top-level key '" + key + "'");
    }
    if (!top.count("experiment")) throw ConfigError("missing 'experiment'");
    cfg.experiment = trim(top["experiment"]);
    const ExperimentSpec* spec = nullptr;
    for (const auto& s : registry()) {
        if (s.name == cfg.experiment) spec = &s;
    }
    if (!spec) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    cfg.output = top.count("output") ? trim(top["output"]) : "hamflow_" + cfg.experiment;
    if (cfg.output.empty()) throw ConfigError("empty output prefix");

    std::map<std::string, std::string> values;
    for (const auto& ps : spec->numeric) {
        if (ps.key != "seed") values[ps.key] = ps.default_value;
    }
    for (const auto& ps : spec->params) values[ps.key] = ps.default_value;
    std::uint64_t seed = kDefaultSeed;

    for (const auto& [name, section] : sections) {
        const std::vector<ParamSpec>* allowed = nullptr;
        if (name == "numeric") {
            allowed = &spec->numeric;
        } else if (name == spec->name) {
            allowed = &spec->params;
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
        for (const auto& [key, child] : *section) {
            if (!child.empty()) throw ConfigError("nested key '" + name + "." + key + "'");
            if (name == "numeric" && key == "seed") {
                seed = parse_seed(child.data());
                continue;
            }
            const auto it = std::find_if(allowed->begin(), allowed->end(), [&](const ParamSpec& p) { return p.key == key; });
            if (it == allowed->end()) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
            check_value(name, *it, child.data());
            values[key] = trim(child.data());
        }
    }
    cfg.params = Params(std::move(values), seed);
    return cfg;
}

}  // namespace

// ---------------------------------------------------------------- Table

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add: row width differs from header in " + name);
    rows.push_back(std::move(row));
}

std::string Table::csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            std::visit(
                [&out](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        out += format_double(v);
                    } else if constexpr (std::is_same_v<T, long long>) {
                        out += std::to_string(v);
                    } else {
                        out += v;
                    }
                },
                row[i]);
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------- Params

Params::Params(std::map<std::string, std::string> values, std::uint64_t seed) : values_(std::move(values)), seed_(seed) {}

const std::string& Params::str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::logic_error("undeclared parameter '" + key + "'");
    return it->second;
}

double Params::real(const std::string& key) const {
    double v = 0.0;
    if (!parse_real(str(key), v)) throw ConfigError("parameter '" + key + "' is not a real number");
    return v;
}

int Params::integer(const std::string& key) const {
    long long v = 0;
    if (!parse_int(str(key), v)) throw ConfigError("parameter '" + key + "' is not an integer");
    return static_cast<int>(v);
}

std::vector<double> Params::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(str(key))) {
        double v = 0.0;
        if (!parse_real(item, v)) throw ConfigError("parameter '" + key + "' is not a list of reals");
        out.push_back(v);
    }
    return out;
}

std::vector<int> Params::integers(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : split_list(str(key))) {
        long long v = 0;
        if (!parse_int(item, v)) throw ConfigError("parameter '" + key + "' is not a list of integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// ---------------------------------------------------------------- registry

namespace {

ParamSpec real(std::string key, std::string def, std::string help) {
    return {std::move(key), ParamKind::Real, std::move(def), std::move(help), {}};
}
ParamSpec pos(std::string key, std::string def, std::string help) {
    return {std::move(key), ParamKind::PositiveReal, std::move(def), std::move(help), {}};
}
ParamSpec count(std::string key, std::string def, std::string help) {
    return {std::move(key), ParamKind::PositiveInt, std::move(def), std::move(help), {}};
}
ParamSpec choice(std::string key, std::string def, std::vector<std::string> choices, std::string help) {
    return {std::move(key), ParamKind::String, std::move(def), std::move(help), std::move(choices)};
}
ParamSpec reals(std::string key, std::string def, std::string help) {
    return {std::move(key), ParamKind::RealList, std::move(def), std::move(help), {}};
}
ParamSpec counts(std::string key, std::string def, std::string help) {
    return {std::move(key), ParamKind::PositiveIntList, std::move(def), std::move(help), {}};
}

const std::vector<std::string> kSymplecticMethods = {"midpoint", "gauss4", "symplectic_euler"};
const std::vector<std::string> kAllMethods = {"midpoint", "gauss4", "symplectic_euler", "explicit_euler", "rk4", "exact"};

std::vector<ExperimentSpec> make_registry() {
    std::vector<ExperimentSpec> r;
    r.push_back({"completeness_table",
                 "Completeness of the five boundary-condition types on the model Hamiltonian",
                 {pos("T", "1", "horizon"), count("N", "100", "steps")},
                 {choice("method", "midpoint", kSymplecticMethods, "one-step map"),
                  real("f_lin", "1", "f(q_d) linear coefficient"), real("f_quad", "0", "f(q_d) quadratic coefficient"),
                  real("g_lin", "1", "g(q_d) linear coefficient"), real("g_quad", "0", "g(q_d) quadratic coefficient"),
                  reals("base_q", "0.3,0.5", "(q_r, q_d) at t = 0"), reals("base_p", "0.2,-0.1", "(p_r, p_d) at t = 0"),
                  pos("threshold_scale", "1e-8", "relative rank threshold")},
                 completeness_table});
    r.push_back({"type2_bvp",
                 "Type II solvers: sweep vs shooting, oscillator closed form, virtual-work identity",
                 {pos("T", "1", "horizon"), count("N", "2000", "oscillator steps"), pos("tol", "1e-10", "Newton tolerance")},
                 {count("sweep_N", "200", "steps for the sweep/shooting comparison"),
                  count("variations", "20", "random variations for the virtual-work check"),
                  count("dalembert_N", "200", "steps of the pendulum Type II solve")},
                 type2_bvp});
    r.push_back({"order_study",
                 "Observed orders of discrete-Hamiltonian maps and of the generating-function error",
                 {pos("T", "1", "horizon")},
                 {choice("problem", "oscillator", {"oscillator", "pendulum"}, "test problem"),
                  {"schemes", ParamKind::String, "midpoint,gauss4", "comma-separated schemes", {}},
                  counts("steps", "5,10,20,40,80", "step counts"), reals("z0", "1,0", "initial (q, p)"),
                  reals("gap_h", "0.2,0.1,0.05,0.025", "step sizes for |H_d - H_d^E|"),
                  count("gap_points", "8", "sample points for |H_d - H_d^E|")},
                 order_study});
    r.push_back({"symplecticity_scan",
                 "Symplecticity defect of every built-in map at random points, plus the Noether contrast",
                 {pos("h", "0.1", "step size"), count("N", "1000", "Noether steps"), pos("T", "10", "Noether horizon")},
                 {choice("problem", "pendulum", {"pendulum", "oscillator"}, "problem for the defect scan"),
                  count("points", "20", "random points")},
                 symplecticity_scan});
    r.push_back({"noether_drift",
                 "Angular-momentum drift on the planar central-force problem",
                 {pos("T", "10", "horizon"), count("N", "1000", "steps")},
                 {{"methods", ParamKind::String, "midpoint,gauss4,symplectic_euler,explicit_euler", "comma-separated", {}},
                  reals("q0", "1,0.2", "initial position"), reals("p0", "-0.1,0.8", "initial momentum"),
                  count("stride", "10", "row stride of the drift table")},
                 noether_drift});
    r.push_back({"hamel_rigid_body",
                 "Hamel bracket, Euler equations and trivialized Type II round trip on SO(3)",
                 {pos("T", "1", "horizon"), count("N", "100", "steps")},
                 {reals("inertia", "1,2,3", "principal moments"), count("triples", "100", "random bracket triples"),
                  reals("q0", "0.2,-0.3,0.1", "initial ZYX angles"), reals("mu0", "0.5,-0.4,0.8", "initial body momentum"),
                  reals("invariant_mu0", "0.1,0.1,1", "initial body momentum of the invariant run"),
                  count("invariant_steps", "10000", "steps of the invariant run"), pos("invariant_h", "1e-3", "its step")},
                 hamel_rigid_body});
    r.push_back({"adjoint_gradient",
                 "Adjoint gradients against finite differences and matrix-exponential oracles",
                 {count("N", "2000", "steps")},
                 {choice("method", "midpoint", kSymplecticMethods, "adjoint stepper"), pos("eps", "1e-5", "FD step"),
                  count("nx", "31", "diffusion grid points"), pos("diffusion_T", "0.1", "diffusion horizon"),
                  count("diffusion_N", "2000", "diffusion steps")},
                 adjoint_gradient});
    r.push_back({"diffusion_adjoint",
                 "Semi-discrete heat-equation adjoint and the reverse-time growth indicator",
                 {pos("T", "0.1", "horizon"), count("N", "2000", "steps")},
                 {count("nx", "31", "interior grid points"), counts("growth_nx", "3,7,15,31", "grids for the growth table"),
                  count("growth_N", "200", "steps for the growth table")},
                 diffusion_adjoint});
    r.push_back({"commutativity",
                 "Discretize-then-optimize vs optimize-then-discretize gradients",
                 {},
                 {counts("Ns", "50,100,200,400", "step counts")},
                 commutativity});
    r.push_back({"pontryagin_lqr",
                 "Forward-backward sweep on scalar LQR against the Riccati solution",
                 {pos("T", "1", "horizon"), count("N", "1000", "steps"), pos("tol", "1e-8", "stationarity tolerance")},
                 {choice("method", "midpoint", kSymplecticMethods, "stepper"), pos("relax", "0.5", "control step in (0, 1]"),
                  count("max_sweeps", "500", "sweep limit"), real("q0", "1", "initial state")},
                 pontryagin_lqr});
    r.push_back({"accelopt_rate",
                 "Time-adaptive symplectic Bregman optimization: rate and conservation",
                 {pos("h", "0.005", "fictive step"), count("N", "10000", "fictive steps")},
                 {choice("method", "gauss4", kAllMethods, "stepper"), pos("p", "2", "rate exponent"),
                  pos("p_ring", "2", "time-rescaling exponent"), pos("C", "1", "scaling constant"),
                  choice("problem", "shifted", {"shifted", "diagonal", "coupled"}, "quadratic objective"),
                  count("stride", "10", "row stride of the history table")},
                 accelopt_rate});
    for (auto& s : r) s.numeric.push_back({"seed", ParamKind::PositiveInt, std::to_string(kDefaultSeed), "random seed", {}});
    return r;
}

std::string file_stem(const std::string& prefix, const std::string& table) { return prefix + "_" + table; }

}  // namespace

const std::vector<ExperimentSpec>& registry() {
    static const std::vector<ExperimentSpec> r = make_registry();
    return r;
}

const ExperimentSpec& find_experiment(const std::string& name) {
    for (const auto& s : registry()) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return build_config(tree);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void override_seed(ExperimentConfig& cfg, const std::string& seed_text) {
    cfg.params = Params(cfg.params.values(), parse_seed(seed_text));
}

ExperimentConfig default_config(const std::string& name) { return parse_config_text("experiment = " + name + "\n"); }

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return find_experiment(cfg.experiment).run(cfg.params); }

Table summary_table(const ExperimentResult& result) {
    Table t{"summary", {"metric", "value"}, {}};
    for (const auto& [k, v] : result.metrics) t.add({k, v});
    return t;
}

std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                       const std::string& config_path, const std::string& started_utc,
                                       const std::string& finished_utc) {
    namespace fs = std::filesystem;
    const fs::path parent = fs::path(cfg.output).parent_path();
    if (!parent.empty()) fs::create_directories(parent);

    std::vector<Table> tables = result.tables;
    tables.push_back(summary_table(result));
    std::vector<std::string> written;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& t : tables) {
        const std::string path = file_stem(cfg.output, t.name) + ".csv";
        std::ofstream out(path, std::ios::binary);
        out << t.csv();
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        written.push_back(path);
        files.push_back({{"table", t.name}, {"path", path}, {"rows", t.rows.size()}, {"columns", t.columns}});
    }

    nlohmann::json manifest;
    manifest["experiment"] = cfg.experiment;
    manifest["config"] = config_path;
    manifest["output_prefix"] = cfg.output;
    manifest["seed"] = cfg.params.seed();
    manifest["parameters"] = cfg.params.values();
    manifest["files"] = files;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [k, v] : result.metrics) metrics[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
    manifest["metrics"] = metrics;
    manifest["started_utc"] = started_utc;
    manifest["finished_utc"] = finished_utc;
    const std::string path = file_stem(cfg.output, "manifest") + ".json";
    std::ofstream out(path, std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    written.push_back(path);
    return written;
}

}  // namespace hamflow::cli
