#include "fch/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "fch/diagnostics.hpp"
#include "fch/suites.hpp"

namespace fch {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_number_list(const std::string& raw, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream iss(raw);
    while (std::getline(iss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::configuration, "config: bad number in " + key + ": " + item);
        }
    }
    return out;
}

std::vector<KernelTerm> parse_terms(const std::string& raw) {
    std::vector<KernelTerm> out;
    std::string item;
    std::istringstream iss(raw);
    while (std::getline(iss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw Error(ErrorCode::configuration,
                        "config: kernel terms must be c:lambda pairs, got " + item);
        }
        try {
            out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorCode::configuration, "config: bad kernel term " + item);
        }
    }
    return out;
}

std::string format_terms(const std::vector<KernelTerm>& terms) {
    std::ostringstream oss;
    oss << std::setprecision(17);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) oss << ", ";
        oss << terms[i].c << ":" << terms[i].lambda;
    }
    return oss.str();
}

std::string format_numbers(const std::vector<double>& v) {
    std::ostringstream oss;
    oss << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) oss << ", ";
        oss << v[i];
    }
    return oss.str();
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::configuration, "config: bad number for " + key + ": " + v);
}

long to_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::configuration, "config: bad integer for " + key + ": " + v);
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::configuration, "config: bad boolean for " + key + ": " + v);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(ErrorCode::configuration,
                            "config line " + std::to_string(lineno) + ": malformed section");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "mesh" && section != "operator" && section != "potential" &&
                section != "kernel" && section != "history" && section != "solver" &&
                section != "initial" && section != "output" && section != "diagnostics") {
                throw Error(ErrorCode::configuration, "config: unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::configuration,
                        "config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qualified = section + "." + key;

        if (qualified == "mesh.a") cfg.a = to_double(value, qualified);
        else if (qualified == "mesh.b") cfg.b = to_double(value, qualified);
        else if (qualified == "mesh.n_cells") cfg.n_cells = static_cast<int>(to_long(value, qualified));
        else if (qualified == "operator.beta") cfg.beta = to_double(value, qualified);
        else if (qualified == "operator.quad_points") cfg.quad_points = static_cast<int>(to_long(value, qualified));
        else if (qualified == "potential.kind") cfg.potential_kind = value;
        else if (qualified == "potential.coefficients") cfg.coefficients = parse_number_list(value, qualified);
        else if (qualified == "kernel.kind") cfg.kernel_kind = value;
        else if (qualified == "kernel.terms") cfg.kernel_terms = parse_terms(value);
        else if (qualified == "kernel.file") cfg.kernel_file = value;
        else if (qualified == "history.mode") cfg.history_mode = value;
        else if (qualified == "history.s_max") cfg.s_max = to_double(value, qualified);
        else if (qualified == "history.n_s") cfg.n_s = static_cast<int>(to_long(value, qualified));
        else if (qualified == "history.truncation_tol") cfg.truncation_tol = to_double(value, qualified);
        else if (qualified == "solver.alpha") cfg.alpha = to_double(value, qualified);
        else if (qualified == "solver.dt") cfg.dt = to_double(value, qualified);
        else if (qualified == "solver.t_end") cfg.t_end = to_double(value, qualified);
        else if (qualified == "solver.stabilization") cfg.stabilization = to_double(value, qualified);
        else if (qualified == "solver.mean_bound") cfg.mean_bound = to_double(value, qualified);
        else if (qualified == "solver.galerkin_mode") cfg.galerkin_mode = value;
        else if (qualified == "solver.n_modes") cfg.n_modes = static_cast<int>(to_long(value, qualified));
        else if (qualified == "initial.kind") cfg.ic_kind = value;
        else if (qualified == "initial.mean") cfg.ic_mean = to_double(value, qualified);
        else if (qualified == "initial.amplitude") cfg.ic_amplitude = to_double(value, qualified);
        else if (qualified == "initial.seed") cfg.ic_seed = static_cast<std::uint64_t>(to_long(value, qualified));
        else if (qualified == "initial.mode_index") cfg.ic_mode_index = static_cast<int>(to_long(value, qualified));
        else if (qualified == "initial.file") cfg.ic_file = value;
        else if (qualified == "initial.history_file") cfg.history_file = value;
        else if (qualified == "output.dir") cfg.output_dir = value;
        else if (qualified == "output.checkpoint_every") cfg.checkpoint_every = static_cast<int>(to_long(value, qualified));
        else if (qualified == "output.store_states") cfg.store_states = to_bool(value, qualified);
        else if (qualified == "diagnostics.summary") cfg.summary = to_bool(value, qualified);
        else {
            throw Error(ErrorCode::configuration, "config: unknown key " + qualified);
        }
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::configuration, "config: cannot open " + path);
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_config_text(oss.str());
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "[mesh]\n";
    os << "a = " << cfg.a << "\n";
    os << "b = " << cfg.b << "\n";
    os << "n_cells = " << cfg.n_cells << "\n";
    os << "\n[operator]\n";
    os << "beta = " << cfg.beta << "\n";
    os << "quad_points = " << cfg.quad_points << "\n";
    os << "\n[potential]\n";
    os << "kind = " << cfg.potential_kind << "\n";
    if (!cfg.coefficients.empty()) {
        os << "coefficients = " << format_numbers(cfg.coefficients) << "\n";
    }
    os << "\n[kernel]\n";
    os << "kind = " << cfg.kernel_kind << "\n";
    if (!cfg.kernel_terms.empty()) os << "terms = " << format_terms(cfg.kernel_terms) << "\n";
    if (!cfg.kernel_file.empty()) os << "file = " << cfg.kernel_file << "\n";
    os << "\n[history]\n";
    os << "mode = " << cfg.history_mode << "\n";
    os << "s_max = " << cfg.s_max << "\n";
    os << "n_s = " << cfg.n_s << "\n";
    os << "truncation_tol = " << cfg.truncation_tol << "\n";
    os << "\n[solver]\n";
    os << "alpha = " << cfg.alpha << "\n";
    os << "dt = " << cfg.dt << "\n";
    os << "t_end = " << cfg.t_end << "\n";
    os << "stabilization = " << cfg.stabilization << "\n";
    os << "mean_bound = " << cfg.mean_bound << "\n";
    os << "galerkin_mode = " << cfg.galerkin_mode << "\n";
    os << "n_modes = " << cfg.n_modes << "\n";
    os << "\n[initial]\n";
    os << "kind = " << cfg.ic_kind << "\n";
    os << "mean = " << cfg.ic_mean << "\n";
    os << "amplitude = " << cfg.ic_amplitude << "\n";
    os << "seed = " << cfg.ic_seed << "\n";
    os << "mode_index = " << cfg.ic_mode_index << "\n";
    if (!cfg.ic_file.empty()) os << "file = " << cfg.ic_file << "\n";
    if (!cfg.history_file.empty()) os << "history_file = " << cfg.history_file << "\n";
    os << "\n[output]\n";
    os << "dir = " << cfg.output_dir << "\n";
    os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    os << "store_states = " << (cfg.store_states ? "true" : "false") << "\n";
    os << "\n[diagnostics]\n";
    os << "summary = " << (cfg.summary ? "true" : "false") << "\n";
    return os.str();
}

void validate_run_config(const RunConfig& cfg) {
    if (!(cfg.b > cfg.a)) throw Error(ErrorCode::configuration, "mesh: b must exceed a");
    if (cfg.n_cells < 2) throw Error(ErrorCode::configuration, "mesh: n_cells must be >= 2");
    if (!(cfg.beta > 0.25 && cfg.beta < 1.0)) {
        throw Error(ErrorCode::configuration, "beta must lie in (1/4, 1)");
    }
    if (!(cfg.alpha > 0.0)) {
        throw Error(ErrorCode::configuration,
                    "alpha must be positive: the inviscid limit is outside the supported range");
    }
    if (cfg.potential_kind != "double_well" && cfg.potential_kind != "polynomial") {
        throw Error(ErrorCode::configuration, "potential.kind must be double_well or polynomial");
    }
    if (cfg.kernel_kind != "exponential_sum" && cfg.kernel_kind != "tabulated") {
        throw Error(ErrorCode::configuration, "kernel.kind must be exponential_sum or tabulated");
    }
    if (cfg.history_mode != "grid" && cfg.history_mode != "prony") {
        throw Error(ErrorCode::configuration, "history.mode must be grid or prony");
    }
    if (cfg.galerkin_mode != "fem" && cfg.galerkin_mode != "eigen") {
        throw Error(ErrorCode::configuration, "solver.galerkin_mode must be fem or eigen");
    }
    if (cfg.ic_kind != "constant_noise" && cfg.ic_kind != "file" &&
        cfg.ic_kind != "equilibrium_perturbation") {
        throw Error(ErrorCode::configuration,
                    "initial.kind must be constant_noise, file or equilibrium_perturbation");
    }
    for (const std::string& path : {cfg.kernel_file, cfg.ic_file, cfg.history_file}) {
        if (!path.empty() && !std::filesystem::exists(path)) {
            throw Error(ErrorCode::configuration, "config references a missing file: " + path);
        }
    }
    if (cfg.ic_kind == "file" && cfg.ic_file.empty()) {
        throw Error(ErrorCode::configuration, "initial.kind = file needs initial.file");
    }
    if (cfg.kernel_kind == "tabulated" && cfg.kernel_file.empty()) {
        throw Error(ErrorCode::configuration, "kernel.kind = tabulated needs kernel.file");
    }
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.alpha = cfg.alpha;
    s.beta = cfg.beta;
    s.mean_bound_M = cfg.mean_bound;
    s.dt = cfg.dt;
    s.t_end = cfg.t_end;
    s.galerkin_mode = cfg.galerkin_mode == "fem" ? GalerkinMode::fem : GalerkinMode::eigen_modes;
    s.n_modes = cfg.n_modes;
    s.stabilization = cfg.stabilization;
    s.history_mode = cfg.history_mode == "grid" ? HistoryMode::grid : HistoryMode::prony;
    s.s_max = cfg.s_max;
    s.n_s = cfg.n_s;
    s.truncation_tol = cfg.truncation_tol;
    s.quad_points = cfg.quad_points;
    s.store_states = cfg.store_states;
    return s;
}

PotentialSpec potential_from_config(const RunConfig& cfg) {
    if (cfg.potential_kind == "double_well") return make_double_well();
    return make_polynomial(cfg.coefficients);
}

KernelSpec kernel_from_config(const RunConfig& cfg) {
    if (cfg.kernel_kind == "exponential_sum") return make_exponential_kernel(cfg.kernel_terms);
    return load_tabulated_kernel(cfg.kernel_file);
}

ProblemSetup setup_from_config(const RunConfig& cfg) {
    validate_run_config(cfg);
    const Mesh mesh = build_interval_mesh(cfg.a, cfg.b, cfg.n_cells);
    return build_problem(mesh, solver_config(cfg), potential_from_config(cfg),
                         kernel_from_config(cfg));
}

namespace {

Vec read_field(const std::string& path, int expected_size) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open field file: " + path);
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != expected_size) {
        std::ostringstream oss;
        oss << "field file " << path << " has " << values.size() << " values, expected "
            << expected_size;
        throw Error(ErrorCode::configuration, oss.str());
    }
    Vec out(expected_size);
    for (int i = 0; i < expected_size; ++i) out(i) = values[static_cast<std::size_t>(i)];
    return out;
}

std::string resolved_output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("FRACHEM_OUT")) {
        if (*env) return env;
    }
    return cfg.output_dir;
}

void write_state_checkpoint(const std::string& path, const SimState& s) {
    std::ofstream os(path);
    os << std::setprecision(17);
    os << "t " << s.t << "\n";
    os << "u";
    for (Eigen::Index i = 0; i < s.u.size(); ++i) os << " " << s.u(i);
    os << "\nmu";
    for (Eigen::Index i = 0; i < s.mu.size(); ++i) os << " " << s.mu(i);
    os << "\n";
}

}  // namespace

SimState initial_state_from_config(const RunConfig& cfg, const ProblemSetup& setup) {
    Vec u0;
    if (cfg.ic_kind == "constant_noise") {
        u0 = initial_constant_noise(setup, cfg.ic_mean, cfg.ic_amplitude, cfg.ic_seed);
    } else if (cfg.ic_kind == "file") {
        u0 = read_field(cfg.ic_file, setup.mesh.n_interior());
    } else {
        u0 = initial_equilibrium_perturbation(setup, cfg.ic_mean, cfg.ic_amplitude,
                                              cfg.ic_mode_index);
    }
    if (cfg.history_file.empty()) {
        return make_state_zero_history(setup, u0);
    }
    std::ifstream in(cfg.history_file);
    if (!in) throw Error(ErrorCode::io, "cannot open history file: " + cfg.history_file);
    HistoryGrid grid_history = load_history_grid(in, cfg.truncation_tol);
    if (setup.cfg.history_mode == HistoryMode::grid) {
        return make_state(setup, u0, std::move(grid_history));
    }
    return make_state(setup, u0, moments_from_grid(grid_history, *setup.prony, setup.an));
}

int run_simulation(const RunConfig& cfg) {
    try {
        ProblemSetup setup = setup_from_config(cfg);
        if (cfg.checkpoint_every > 0) setup.cfg.store_states = true;
        const SimState initial = initial_state_from_config(cfg, setup);
        // history invariants are checked up front so a bad initial state is
        // reported before any output is written
        if (std::holds_alternative<HistoryGrid>(initial.history)) {
            validate_history(std::get<HistoryGrid>(initial.history), setup.an);
        } else {
            validate_history(std::get<HistoryMoments>(initial.history), setup.an);
        }

        const std::string out_dir = resolved_output_dir(cfg);
        std::filesystem::create_directories(out_dir);

        const TrajectoryRecord rec = run(setup, initial);

        if (cfg.checkpoint_every > 0) {
            for (std::size_t n = 0; n < rec.size();
                 n += static_cast<std::size_t>(cfg.checkpoint_every)) {
                SimState snap;
                snap.t = rec.times[n];
                snap.u = rec.u_states[n];
                snap.mu = rec.mu_states[n];
                std::ostringstream name;
                name << out_dir << "/checkpoint_" << std::setw(6) << std::setfill('0') << n
                     << ".txt";
                write_state_checkpoint(name.str(), snap);
            }
        }

        {
            std::ofstream os(out_dir + "/trajectory.csv");
            write_trajectory_csv(os, rec);
        }
        if (cfg.summary) {
            std::ofstream os(out_dir + "/summary.txt");
            write_summary(os, setup, rec);
        }
        return exit_ok;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical_failure;
    }
}

int run_suite(const RunConfig& cfg, const std::string& suite_name) {
    try {
        validate_run_config(cfg);
        const std::string out_dir = resolved_output_dir(cfg);
        std::filesystem::create_directories(out_dir);
        const auto results = suites::run_suite_by_name(suite_name);
        std::ofstream report(out_dir + "/suite_" + suite_name + ".txt");
        bool all_pass = true;
        for (const auto& r : results) {
            const std::string line = suites::format_result_line(r);
            std::cout << line << "\n";
            report << line << "\n";
            all_pass = all_pass && r.pass;
        }
        return all_pass ? exit_ok : exit_invariant_breach;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical_failure;
    }
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_domain:
        case ErrorCode::parameter:
        case ErrorCode::singular_evaluation:
        case ErrorCode::assembly_tolerance:
        case ErrorCode::truncation:
        case ErrorCode::alignment:
        case ErrorCode::unsupported_reduction:
        case ErrorCode::configuration:
        case ErrorCode::io:
            return exit_config_error;
        case ErrorCode::numerical_failure:
            return exit_numerical_failure;
        case ErrorCode::mean_zero_violation:
        case ErrorCode::invariant_breach:
            return exit_invariant_breach;
    }
    return exit_numerical_failure;
}

}  // namespace fch
