#include "rotopend/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "rotopend/experiments.hpp"

namespace rotopend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["model_id"] = c.model_id;
    j["kernel_id"] = c.kernel_id;
    j["kernel_a"] = c.kernel_a;
    j["seed"] = c.seed;
    j["dt"] = c.dt;
    j["n"] = c.n;
    j["t_start"] = c.t_start;
    j["I"] = c.I;
    j["phi"] = c.phi;
    j["tau"] = c.tau;
    j["p"] = c.p;
    j["q"] = c.q;
    j["t0"] = c.t0;
    j["t1"] = c.t1;
    j["h"] = c.h;
    j["variational"] = c.variational;
    j["T"] = c.T;
    j["S"] = c.S;
    j["v"] = c.v;
    j["v_auto"] = c.v_auto;
    j["n_paths"] = c.n_paths;
    j["which"] = c.which;
    j["eps_list"] = c.eps_list;
    j["eps"] = c.eps;
    j["strict"] = c.strict;
    j["out_dir"] = c.out_dir;
    j["report_dir"] = c.report_dir;
    return j;
}

void config_from_json(const json& j, RunConfig& c) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("experiment", c.experiment);
    get("model_id", c.model_id);
    get("kernel_id", c.kernel_id);
    get("kernel_a", c.kernel_a);
    get("seed", c.seed);
    get("dt", c.dt);
    get("n", c.n);
    get("t_start", c.t_start);
    get("I", c.I);
    get("phi", c.phi);
    get("tau", c.tau);
    get("p", c.p);
    get("q", c.q);
    get("t0", c.t0);
    get("t1", c.t1);
    get("h", c.h);
    get("variational", c.variational);
    get("T", c.T);
    get("S", c.S);
    get("v", c.v);
    get("v_auto", c.v_auto);
    get("n_paths", c.n_paths);
    get("which", c.which);
    get("eps_list", c.eps_list);
    get("eps", c.eps);
    get("strict", c.strict);
    get("out_dir", c.out_dir);
    get("report_dir", c.report_dir);
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    json j;
    in >> j;
    return j;
}

struct RunContext {
    fs::path dir;
    json manifest;
    std::chrono::steady_clock::time_point start;

    explicit RunContext(const RunConfig& c) {
        dir = c.out_dir.empty()
                  ? fs::path("runs") / (c.experiment + "-seed" + std::to_string(c.seed))
                  : fs::path(c.out_dir);
        fs::create_directories(dir);
        manifest["config"] = config_to_json(c);
        manifest["version"] = kVersion;
        manifest["status"] = "started";
        manifest["warnings"] = json::array();
        write_json(dir / "manifest.json", manifest);  // before any computation
        start = std::chrono::steady_clock::now();
    }

    void warn(const std::string& w) { manifest["warnings"].push_back(w); }

    void finish(const json& derived) {
        manifest["derived"] = derived;
        manifest["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["status"] = "complete";
        write_json(dir / "manifest.json", manifest);
    }
};

int finish_run(RunContext& ctx, const RunConfig& c, const json& derived, bool pass) {
    json d = derived;
    d["pass"] = pass;
    ctx.finish(d);
    return (c.strict && !pass) ? 2 : 0;
}

int run_sample_noise(const RunConfig& c) {
    RunContext ctx(c);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    SampleReport rep;
    const NoisePath path = NoisePath::sample(kernel, c.t_start, c.dt, c.n, c.seed, &rep);
    path.write_csv((ctx.dir / "path.csv").string());
    if (rep.clipped_eigenvalues > 0)
        ctx.warn("clipped " + std::to_string(rep.clipped_eigenvalues) +
                 " embedding eigenvalues");
    json derived;
    derived["kernel_id"] = kernel.id;
    derived["clipped_eigenvalues"] = rep.clipped_eigenvalues;
    derived["min_eigenvalue_ratio"] = rep.min_eigenvalue_ratio;
    derived["embedding_size"] = rep.embedding_size;
    return finish_run(ctx, c, derived, true);
}

int run_simulate(const RunConfig& c) {
    RunContext ctx(c);
    const ModelSpec model = model_from_id(c.model_id);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    const double lo = std::min(c.t0, c.t1) - 2.0, hi = std::max(c.t0, c.t1) + 2.0;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / c.dt)) + 1;
    const NoisePath path = NoisePath::sample(kernel, lo, c.dt, n, c.seed);
    IntegratorConfig icfg;
    icfg.h = c.h;
    icfg.variational = c.variational;
    const Trajectory traj =
        integrate(model, path, c.eps, State(c.I, c.phi, c.p, c.q), c.t0, c.t1, icfg);
    traj.write_csv((ctx.dir / "trajectory.csv").string());
    json derived;
    derived["beta"] = model.beta;
    derived["steps"] = traj.times.size();
    derived["final_state"] = {traj.back_state().I, traj.back_state().phi,
                              traj.back_state().p, traj.back_state().q};
    return finish_run(ctx, c, derived, true);
}

int run_melnikov_scan(const RunConfig& c) {
    RunContext ctx(c);
    const ModelSpec model = model_from_id(c.model_id);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    const NoisePath path = experiment_path(kernel, c.seed, c.t0, c.t0 + c.T, c.dt, c.S);
    MelnikovConfig mcfg;
    mcfg.S = c.S;
    const auto n = static_cast<std::size_t>(std::floor(c.T / c.dt)) + 1;
    const MelnikovSeries series =
        c.which == "I"
            ? melnikov_I_grid(model, path, c.I, c.phi, c.tau, c.t0, n, mcfg)
            : melnikov_P_grid(model, path, c.I, c.phi, c.tau, c.t0, n, mcfg);

    std::ofstream csv(ctx.dir / "series.csv");
    csv << "t,value,truncation_bound,quad_error\n";
    csv.precision(17);
    for (std::size_t j = 0; j < series.times.size(); ++j)
        csv << series.times[j] << ',' << series.values[j].value << ','
            << series.values[j].truncation_bound << ','
            << series.values[j].quad_error_estimate << "\n";

    const ZeroScan scan = find_zeros(series);
    std::ofstream zcsv(ctx.dir / "zeros.csv");
    zcsv << "t,slope\n";
    zcsv.precision(17);
    for (const auto& z : scan.zeros) zcsv << z.t << ',' << z.slope << "\n";
    if (scan.flagged_degenerate > 0)
        ctx.warn(std::to_string(scan.flagged_degenerate) + " near-degenerate zeros flagged");

    json derived;
    derived["n_zeros"] = scan.zeros.size();
    derived["flagged_degenerate"] = scan.flagged_degenerate;
    write_json(ctx.dir / "summary.json", derived);
    return finish_run(ctx, c, derived, true);
}

int run_rice(const RunConfig& c) {
    RunContext ctx(c);
    const ModelSpec model = model_from_id(c.model_id);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    const CrossingStats stats = monte_carlo_crossings(
        model, kernel, c.I, c.phi, c.tau, c.T, c.v, c.n_paths, c.seed);
    const double rel = std::fabs(stats.empirical_mean - stats.predicted) / stats.predicted;
    const bool within_se =
        std::fabs(stats.empirical_mean - stats.predicted) <= 3.0 * stats.empirical_se;
    const bool pass = rel <= 0.05 && within_se;

    json summary;
    summary["empirical_mean"] = stats.empirical_mean;
    summary["empirical_se"] = stats.empirical_se;
    summary["predicted"] = stats.predicted;
    summary["relative_error"] = rel;
    summary["within_3se"] = within_se;
    summary["coarse_mean"] = stats.coarse_mean;
    summary["chi0"] = stats.moments.chi0;
    summary["chi2"] = stats.moments.chi2;
    write_json(ctx.dir / "summary.json", summary);
    return finish_run(ctx, c, summary, pass);
}

int run_splitting(const RunConfig& c) {
    RunContext ctx(c);
    const ModelSpec model = model_from_id(c.model_id);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    const ExperimentPoint pt{c.I, c.phi, c.tau};
    const NoisePath path = experiment_path(kernel, c.seed, -5.0, c.T + 5.0, c.dt, c.S);
    const double B = 0.1;
    const double A = calibrate_envelope_A(kernel, B, path.t_start(), c.dt, path.size(),
                                          100, c.seed ^ 0xca11ULL, 0.99);
    const double T_adm = std::min(-path.t_start(), path.t_end()) - 1.0;
    const SublinearityReport adm = admissible_times(path, A, B, T_adm);
    const PickedAnchor anchor = pick_melnikov_anchor(model, path, pt, MelnikovKind::EnergyP,
                                                     adm, 0.0, c.T);

    const FirstOrderSweep sweep =
        splitting_sweep(model, path, c.eps_list, pt, anchor.t0, c.eps);

    std::ofstream csv(ctx.dir / "sweep.csv");
    csv << "eps,seed,measured,predicted,residual\n";
    csv.precision(17);
    for (const auto& row : sweep.rows)
        csv << row.eps << ',' << c.seed << ',' << row.measured << ',' << row.predicted
            << ',' << row.residual << "\n";

    const bool pass = sweep.slope >= 1.2 && sweep.rel_error_at_ref <= 0.1;
    json summary;
    summary["t0"] = sweep.t0;
    summary["melnikov_P"] = sweep.melnikov_value;
    summary["slope"] = sweep.slope;
    summary["slope_threshold"] = 1.2;
    summary["slope_ok"] = sweep.slope >= 1.2;
    summary["rel_error_at_eps_ref"] = sweep.rel_error_at_ref;
    summary["eps_ref"] = sweep.eps_ref;
    summary["A"] = A;
    write_json(ctx.dir / "summary.json", summary);
    return finish_run(ctx, c, summary, pass);
}

int run_diffusion(const RunConfig& c) {
    RunContext ctx(c);
    const ModelSpec model = model_from_id(c.model_id);
    const Kernel kernel = kernel_from_id(c.kernel_id, c.kernel_a);
    const ExperimentPoint pt{c.I, c.phi, c.tau};
    MicroDiffusionReport rep;
    if (c.v_auto) {
        rep = micro_diffusion_experiment(model, kernel, c.eps, pt, 0.5, c.seed, c.T);
    } else {
        const NoisePath path = experiment_path(kernel, c.seed, -20.0, c.T + 20.0);
        const double B = 0.1;
        const double A = calibrate_envelope_A(kernel, B, path.t_start(), path.dt(),
                                              path.size(), 100, c.seed ^ 0xca11ULL, 0.99);
        const double T_adm = std::min(-path.t_start(), path.t_end()) - 1.0;
        const SublinearityReport adm = admissible_times(path, A, B, T_adm);
        rep = micro_diffusion_demo(model, path, c.eps, c.I, c.phi, c.v, 0.0, c.T, adm);
    }
    const bool pass = rep.rel_error <= 0.2;
    json summary;
    summary["v"] = rep.v;
    summary["t_crossing"] = rep.t_crossing;
    summary["deltaI"] = rep.deltaI;
    summary["eps_v"] = rep.eps_v;
    summary["relative_error"] = rep.rel_error;
    summary["series_max"] = rep.series_max;
    summary["crossings_tried"] = rep.crossings_tried;
    write_json(ctx.dir / "summary.json", summary);
    return finish_run(ctx, c, summary, pass);
}

}  // namespace

void RunConfig::validate() const {
    static const std::set<std::string> experiments{
        "sample-noise", "simulate", "melnikov-scan", "rice",
        "splitting",    "diffusion", "report"};
    if (!experiments.count(experiment))
        throw std::invalid_argument("unknown experiment: " + experiment);
    if (dt <= 0) throw std::invalid_argument("dt must be positive");
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (h <= 0 || h > dt) throw std::invalid_argument("h must lie in (0, dt]");
    if (T <= 0 || S <= 0) throw std::invalid_argument("T and S must be positive");
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    if (which != "P" && which != "I")
        throw std::invalid_argument("which must be \"P\" or \"I\"");
    for (double e : eps_list)
        if (!(e > 0 && e <= 0.1))
            throw std::invalid_argument("eps values must lie in (0, 0.1]");
    if (!(eps > 0 && eps <= 0.1)) throw std::invalid_argument("eps must lie in (0, 0.1]");
    kernel_from_id(kernel_id, kernel_a);  // resolvable ids
    model_from_id(model_id);
    if (experiment == "report" && report_dir.empty())
        throw std::invalid_argument("report requires report_dir");
}

std::string RunConfig::to_json_string() const { return config_to_json(*this).dump(2); }

RunConfig RunConfig::from_json_file(const std::string& filename) {
    RunConfig c;
    config_from_json(read_json(filename), c);
    return c;
}

int run(const RunConfig& config) {
    config.validate();
    if (config.experiment == "sample-noise") return run_sample_noise(config);
    if (config.experiment == "simulate") return run_simulate(config);
    if (config.experiment == "melnikov-scan") return run_melnikov_scan(config);
    if (config.experiment == "rice") return run_rice(config);
    if (config.experiment == "splitting") return run_splitting(config);
    if (config.experiment == "diffusion") return run_diffusion(config);
    if (config.experiment == "report") {
        build_report(config.report_dir);
        return 0;
    }
    throw std::invalid_argument("unknown experiment: " + config.experiment);
}

std::string build_report(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw std::runtime_error(dir + " is not a directory");

    std::vector<fs::path> run_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            run_dirs.push_back(entry.path());
    if (fs::exists(root / "manifest.json")) run_dirs.push_back(root);
    if (run_dirs.empty())
        throw std::runtime_error("no run manifests found under " + dir);
    std::sort(run_dirs.begin(), run_dirs.end());

    json report;
    report["version"] = kVersion;
    report["experiments"] = json::object();
    for (const auto& rd : run_dirs) {
        const json manifest = read_json(rd / "manifest.json");
        json entry;
        entry["run_id"] = rd.filename().string();
        entry["manifest"] = manifest;
        if (fs::exists(rd / "summary.json")) {
            const json summary = read_json(rd / "summary.json");
            entry["summary"] = summary;
            if (summary.contains("slope"))
                entry["slope_at_least_1.2"] = summary["slope"].get<double>() >= 1.2;
        }
        const std::string exp = manifest["config"]["experiment"].get<std::string>();
        report["experiments"][exp].push_back(entry);
    }
    const fs::path out = root / "report.json";
    write_json(out, report);
    return out.string();
}

}  // namespace rotopend
