#include "latsel/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "latsel/baselines.hpp"
#include "latsel/constrained.hpp"
#include "latsel/inner.hpp"
#include "latsel/robust.hpp"
#include "latsel/sfm.hpp"

namespace latsel {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sparse_regression: return "sparse_regression";
        case ExperimentKind::denoising: return "denoising";
        case ExperimentKind::discretization_sweep: return "discretization_sweep";
        case ExperimentKind::knapsack_path: return "knapsack_path";
        case ExperimentKind::robust: return "robust";
    }
    return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
    for (auto k : {ExperimentKind::sparse_regression, ExperimentKind::denoising, ExperimentKind::discretization_sweep,
                   ExperimentKind::knapsack_path, ExperimentKind::robust})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

const std::set<std::string> kSolvers = {"minnorm", "pgd", "discretized"};

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const json& j, const std::string& key) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError("config key '" + key + "' must be a nonnegative integer");
    return j.get<std::size_t>();
}

double get_real(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return j.get<double>();
}

}  // namespace

ExperimentConfig ExperimentConfig::resolved() const {
    ExperimentConfig c = *this;
    const bool sweep = experiment == ExperimentKind::discretization_sweep;
    if (!c.n) {
        switch (experiment) {
            case ExperimentKind::sparse_regression:
            case ExperimentKind::denoising: c.n = 100; break;
            case ExperimentKind::discretization_sweep: c.n = 20; break;
            case ExperimentKind::knapsack_path: c.n = 8; break;
            case ExperimentKind::robust: c.n = 5; break;
        }
    }
    if (*c.n == 0) throw ConfigError("n must be >= 1");
    if (c.k_list.empty()) {
        if (sweep) c.k_list = {50, 100, 200, 400};
        else c.k_list = {experiment == ExperimentKind::denoising ? std::size_t{101} : std::size_t{51}};
    }
    for (std::size_t i = 0; i < c.k_list.size(); ++i) {
        if (c.k_list[i] < 2) throw ConfigError("every k must be >= 2");
        if (i > 0 && c.k_list[i] <= c.k_list[i - 1]) throw ConfigError("k_list must be strictly ascending");
    }
    if (!sweep && c.k_list.size() != 1) throw ConfigError("k_list must have one entry outside the sweep");
    if (!(c.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (c.max_iter == 0) throw ConfigError("max_iter must be >= 1");
    if (c.repeats == 0) throw ConfigError("repeats must be >= 1");
    if (c.T == 0) throw ConfigError("T must be >= 1");
    if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(c.mu_smooth >= 0.0)) throw ConfigError("mu_smooth must be >= 0");
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (c.solvers.empty()) c.solvers = {"minnorm", "pgd", "discretized"};
    for (const auto& s : c.solvers)
        if (!kSolvers.count(s)) throw ConfigError("unknown solver '" + s + "'");
    if (!c.budget) c.budget = static_cast<double>(*c.n) / 2.0;
    if (!(*c.budget >= 0.0)) throw ConfigError("budget must be >= 0");
    const bool den = experiment == ExperimentKind::denoising;
    if (!c.box_lo) c.box_lo = den ? -1.0 : 0.0;
    if (!c.box_hi) c.box_hi = 1.0;
    if (!(*c.box_lo < *c.box_hi)) throw ConfigError("need box_lo < box_hi");
    return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "experiment") c.experiment = parse_experiment(get_as<std::string>(v, key));
        else if (key == "n") c.n = get_count(v, key);
        else if (key == "seed") c.seed = get_count(v, key);
        else if (key == "lambda") c.lambda = get_real(v, key);
        else if (key == "mu_smooth") c.mu_smooth = get_real(v, key);
        else if (key == "k_list") {
            if (!v.is_array()) throw ConfigError("k_list must be an array");
            c.k_list.clear();
            for (const auto& k : v) c.k_list.push_back(get_count(k, key));
        } else if (key == "tol") c.tol = get_real(v, key);
        else if (key == "max_iter") c.max_iter = get_count(v, key);
        else if (key == "repeats") c.repeats = get_count(v, key);
        else if (key == "solvers") {
            if (!v.is_array()) throw ConfigError("solvers must be an array");
            if (v.empty()) throw ConfigError("solvers must not be empty; choose from minnorm, pgd, discretized");
            c.solvers = get_as<std::vector<std::string>>(v, key);
        } else if (key == "output_dir") c.output_dir = get_as<std::string>(v, key);
        else if (key == "penalty") {
            try {
                c.penalty = parse_penalty(get_as<std::string>(v, key));
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "T") c.T = get_count(v, key);
        else if (key == "budget") c.budget = get_real(v, key);
        else if (key == "box_lo") c.box_lo = get_real(v, key);
        else if (key == "box_hi") c.box_hi = get_real(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    if (c.n) j["n"] = *c.n;
    j["seed"] = c.seed;
    j["lambda"] = c.lambda;
    j["mu_smooth"] = c.mu_smooth;
    j["k_list"] = c.k_list;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["repeats"] = c.repeats;
    j["solvers"] = c.solvers;
    j["output_dir"] = c.output_dir;
    j["penalty"] = to_string(c.penalty);
    j["T"] = c.T;
    if (c.budget) j["budget"] = *c.budget;
    if (c.box_lo) j["box_lo"] = *c.box_lo;
    if (c.box_hi) j["box_hi"] = *c.box_hi;
    return j.dump(2);
}

namespace {

using Clock = std::chrono::steady_clock;

/// Output of one solver run.
struct SolverOutput {
    double objective = 0.0;
    std::size_t iterations = 0;
    Eigen::VectorXd x;
    std::vector<TraceRow> trace;
    bool converged = true;
};

/// Runs `fn` `repeats` times; returns the last output and the mean wall time.
std::pair<SolverOutput, double> timed(std::size_t repeats, const std::function<SolverOutput()>& fn) {
    SolverOutput out;
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        out = fn();
        total += std::chrono::duration<double>(Clock::now() - t0).count();
    }
    return {std::move(out), total / static_cast<double>(repeats)};
}

class Writer {
  public:
    explicit Writer(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigError("cannot create output directory '" + dir + "'");
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        std::ofstream out(dir_ / name);
        if (!out) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
        fn(out);
        if (!out) throw ConfigError("write failed for '" + (dir_ / name).string() + "'");
        files.push_back(name);
    }

    std::vector<std::string> files;

  private:
    fs::path dir_;
};

SolverOutput run_minnorm(const InstanceSpec& inst, double tol, std::size_t max_iter) {
    CompositeFunction comp(inst.fspec, inst.g);
    MinNormOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    SolverOutput out;
    auto r = minimize_submodular(comp.as_set_function(), o, &out.trace);
    out.x = recover_primal(comp, r.minimizer).x;
    out.objective = combined_objective(comp, out.x);
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

SolverOutput run_pgd(const InstanceSpec& inst, double tol, std::size_t max_iter) {
    CompositeFunction comp(inst.fspec, inst.g);
    PgdOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    auto r = pgd_lovasz_minimize(comp, o);
    SolverOutput out;
    out.x = recover_primal(comp, r.result.minimizer).x;
    out.objective = combined_objective(comp, out.x);
    out.iterations = r.result.iterations;
    out.trace = std::move(r.trace);
    return out;
}

SolverOutput run_fw(const InstanceSpec& inst, std::size_t k, double lo, double hi, double tol, std::size_t max_iter) {
    FwOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    auto r = discretized_fw_minimize(inst.fspec, inst.g, DiscretizationGrid::uniform(inst.n, k, lo, hi), o);
    SolverOutput out;
    out.x = r.x;
    out.objective = r.value;
    out.iterations = r.iterations;
    out.trace = std::move(r.trace);
    return out;
}

ReportRow make_row(const ExperimentConfig& c, const std::string& solver, std::optional<std::size_t> k,
                   const SolverOutput& s, double wall) {
    ReportRow row;
    row.experiment = to_string(c.experiment);
    row.solver = solver;
    row.n = c.size();
    row.k = k;
    row.seed = c.seed;
    row.objective = s.objective;
    row.wall_seconds = wall;
    row.iterations = s.iterations;
    row.support = support_of(s.x).to_hex();
    return row;
}

void write_outputs(Writer& w, const std::string& solver, const SolverOutput& s) {
    w.write("trace_" + solver + ".csv", [&](std::ostream& o) { write_trace_csv(o, s.trace); });
    w.write("solution_" + solver + ".csv", [&](std::ostream& o) { write_solution_csv(o, s.x); });
}

void run_model_experiment(const ExperimentConfig& c, const InstanceSpec& inst, Writer& w, RunSummary& sum) {
    w.write("instance.json", [&](std::ostream& o) { o << instance_to_json(inst) << '\n'; });
    for (const auto& solver : c.solvers) {
        std::pair<SolverOutput, double> res;
        std::optional<std::size_t> k;
        if (solver == "minnorm") {
            res = timed(c.repeats, [&] { return run_minnorm(inst, c.tol, c.max_iter); });
            sum.converged = sum.converged && res.first.converged;
        } else if (solver == "pgd") {
            res = timed(c.repeats, [&] { return run_pgd(inst, c.tol, c.max_iter); });
        } else {
            k = c.k_list.front();
            res = timed(c.repeats, [&] { return run_fw(inst, *k, *c.box_lo, *c.box_hi, c.tol, c.max_iter); });
        }
        sum.rows.push_back(make_row(c, solver, k, res.first, res.second));
        write_outputs(w, solver, res.first);
    }
}

void run_sweep(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
    const auto inst = gen_regression_instance(c.size(), c.seed, c.lambda, c.penalty);
    w.write("instance.json", [&](std::ostream& o) { o << instance_to_json(inst) << '\n'; });
    // Exact reference: min-norm driven to a zero certificate.
    auto [exact, exact_wall] = timed(c.repeats, [&] { return run_minnorm(inst, 1e-12, 100000); });
    sum.converged = sum.converged && exact.converged;
    ReportRow ref = make_row(c, "minnorm", std::nullopt, exact, exact_wall);
    ref.gap = 0.0;
    write_outputs(w, "minnorm", exact);
    for (std::size_t k : c.k_list) {
        auto [fw, wall] = timed(c.repeats, [&] { return run_fw(inst, k, *c.box_lo, *c.box_hi, c.tol, c.max_iter); });
        auto row = make_row(c, "discretized", k, fw, wall);
        row.gap = fw.objective - exact.objective;
        sum.rows.push_back(row);
        write_outputs(w, "discretized_k" + std::to_string(k), fw);
    }
    sum.rows.push_back(ref);
}

void run_knapsack(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
    const auto inst = gen_regression_instance(c.size(), c.seed, c.lambda, c.penalty);
    w.write("instance.json", [&](std::ostream& o) { o << instance_to_json(inst) << '\n'; });
    BudgetSpec budget;
    budget.kind = BudgetKind::support_knapsack;
    budget.w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(c.size()));
    budget.budget = *c.budget;
    std::vector<BudgetSelection> path;
    BudgetSelection sel;
    bool feasible = true;
    auto [out, wall] = timed(c.repeats, [&] {
        CompositeFunction comp(inst.fspec, inst.g);
        auto chain = solve_regularization_path(comp, budget);
        sum.converged = sum.converged && chain.converged;
        const double top = std::max(chain.u_star.maxCoeff(), 0.0);
        std::vector<double> grid;
        for (int i = 0; i < 20; ++i) grid.push_back(top * 1.05 * i / 19.0);
        path = evaluate_path(chain, comp, budget, grid);
        SolverOutput s;
        try {
            sel = select_under_budget(chain, comp, budget, grid);
            feasible = true;
        } catch (const InfeasibleError& e) {
            sel = e.least_violating;
            feasible = false;
        }
        s.x = sel.solution.x;
        s.objective = sel.objective;
        s.iterations = grid.size();
        return s;
    });
    (void)feasible;
    sum.rows.push_back(make_row(c, "path", std::nullopt, out, wall));
    w.write("path.csv", [&](std::ostream& o) { write_path_csv(o, path); });
    w.write("solution_path.csv", [&](std::ostream& o) { write_solution_csv(o, out.x); });
}

void run_robust(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
    const auto spec = gen_multidomain(c.size(), c.seed, c.lambda);
    RobustTrace trace;
    InnerResult at_avg;
    auto [out, wall] = timed(c.repeats, [&] {
        trace = robust_solve(spec, c.T);
        at_avg = eval_Q(spec, trace.averaged_x);
        SolverOutput s;
        s.x = trace.averaged_x;
        s.objective = at_avg.value;
        s.iterations = c.T;
        return s;
    });
    auto row = make_row(c, "subgradient", std::nullopt, out, wall);
    row.support = at_avg.support.to_hex();
    sum.rows.push_back(row);
    w.write("trace_subgradient.csv", [&](std::ostream& o) { write_robust_trace_csv(o, trace); });
    w.write("solution_subgradient.csv", [&](std::ostream& o) { write_solution_csv(o, out.x); });
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
    const ExperimentConfig c = config.resolved();
    Writer w(c.output_dir);
    RunSummary sum;
    switch (c.experiment) {
        case ExperimentKind::sparse_regression:
            run_model_experiment(c, gen_regression_instance(c.size(), c.seed, c.lambda, c.penalty), w, sum);
            break;
        case ExperimentKind::denoising:
            run_model_experiment(c, gen_denoising_instance(c.size(), c.seed, c.mu_smooth, c.lambda), w, sum);
            break;
        case ExperimentKind::discretization_sweep: run_sweep(c, w, sum); break;
        case ExperimentKind::knapsack_path: run_knapsack(c, w, sum); break;
        case ExperimentKind::robust: run_robust(c, w, sum); break;
    }
    w.write("results.csv", [&](std::ostream& o) { write_results_csv(o, sum.rows); });
    json manifest;
    manifest["library"] = "latsel";
    manifest["version"] = kVersion;
    manifest["config"] = json::parse(config_to_json(c));
    manifest["converged"] = sum.converged;
    manifest["files"] = w.files;
    manifest["files"].push_back("manifest.json");
    w.write("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    sum.files = w.files;
    return sum;
}

}  // namespace latsel
